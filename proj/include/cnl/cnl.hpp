#pragma once

#include "cnl/bloch.hpp"
#include "cnl/crypto.hpp"
#include "cnl/distribution.hpp"
#include "cnl/errors.hpp"
#include "cnl/polytope.hpp"
#include "cnl/qcorr.hpp"
#include "cnl/rng.hpp"
