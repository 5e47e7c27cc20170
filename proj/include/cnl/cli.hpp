#pragma once

// Command-line front end. `run` takes the argument list without the program
// name and returns the process exit code:
//   0 success/pass, 1 verification failure, 2 invalid arguments or input,
//   3 not found, 4 I/O error.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cnl/bloch.hpp"
#include "cnl/crypto.hpp"
#include "cnl/errors.hpp"
#include "cnl/polytope.hpp"
#include "cnl/qcorr.hpp"
#include "cnl/rng.hpp"

namespace cnl::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kInvalidInput = 2,
  kNotFound = 3,
  kIoError = 4,
};

inline constexpr std::uint64_t kDefaultSeed = 12345;
inline constexpr long long kDefaultSamples = 1'000'000;

/// 12 significant digits, shortest general form, independent of locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v,
                               std::chars_format::general, 12);
  return std::string(buf, r.ptr);
}

/// The value that format_number prints, read back as a double.
inline double round_12(double v) {
  const std::string s = format_number(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

struct SweepRow {
  int d = 0;
  int n = 0;
  double eta = 1.0;
  double i_n = 0.0;
  double bound = 0.0;
  double l_analytic = 0.0;
  bool violated = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

inline SweepRow make_row(int d, int n, double eta) {
  SweepRow r{d, n, eta, chained_in_exact(d, n), uniform_lower_bound(d, eta),
             leggett_l_analytic(d, eta).value, false};
  r.violated = violates(r.i_n, r.bound);
  return r;
}

inline void sort_rows(SweepResult& s) {
  std::sort(s.rows.begin(), s.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.d, a.eta, a.n) < std::tie(b.d, b.eta, b.n);
  });
}

/// One row per (d, eta, N) over the given ranges.
inline SweepResult sweep_curve(const std::vector<int>& ds,
                               const std::vector<double>& etas,
                               const std::vector<int>& ns) {
  SweepResult s;
  for (int d : ds)
    for (double eta : etas)
      for (int n : ns) s.rows.push_back(make_row(d, n, eta));
  sort_rows(s);
  return s;
}

/// One row per (d, eta) at the first violating N of `ns`; when nothing in
/// the range violates, the row sits at the last N with violated = false.
inline SweepResult sweep_critical(const std::vector<int>& ds,
                                  const std::vector<double>& etas,
                                  const std::vector<int>& ns) {
  SweepResult s;
  for (int d : ds)
    for (double eta : etas) {
      std::optional<SweepRow> row;
      for (int n : ns) {
        row = make_row(d, n, eta);
        if (row->violated) break;
      }
      if (row) s.rows.push_back(*row);
    }
  sort_rows(s);
  return s;
}

inline std::string to_csv(const SweepResult& s) {
  std::string out = "d,N,eta,i_n,bound,l_analytic,violated\n";
  for (const auto& r : s.rows) {
    out += std::to_string(r.d) + ',' + std::to_string(r.n) + ',' +
           format_number(r.eta) + ',' + format_number(r.i_n) + ',' +
           format_number(r.bound) + ',' + format_number(r.l_analytic) + ',' +
           (r.violated ? "true" : "false") + '\n';
  }
  return out;
}

inline std::string to_json(const SweepResult& s) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : s.rows) {
    nlohmann::ordered_json o;
    o["d"] = r.d;
    o["N"] = r.n;
    o["eta"] = round_12(r.eta);
    o["i_n"] = round_12(r.i_n);
    o["bound"] = round_12(r.bound);
    o["l_analytic"] = round_12(r.l_analytic);
    o["violated"] = r.violated;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

/// Reads a distribution fixture: {"d": int, "n": int, "probs": [...]} with
/// probs in row-major (A, B, X, Y) order, 0-based.
inline ConditionalDistribution read_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    return ConditionalDistribution(j.at("d").get<int>(), j.at("n").get<int>(),
                                   j.at("probs").get<std::vector<double>>(),
                                   1e-9);
  } catch (const nlohmann::json::exception& e) {
    throw invalid_argument(std::string("malformed distribution file: ") +
                           e.what());
  }
}

inline void write_distribution(const std::string& path,
                               const ConditionalDistribution& dist) {
  nlohmann::ordered_json j;
  j["d"] = dist.outcomes();
  j["n"] = dist.settings();
  j["probs"] = std::vector<double>(dist.probs().begin(), dist.probs().end());
  std::ofstream out(path);
  out << j.dump() << '\n';
  if (!out) throw std::ios_base::failure("cannot write " + path);
}

namespace detail {

/// "a:b" (inclusive), or a comma-separated list.
template <class T>
std::vector<T> parse_list(const std::string& text) {
  auto parse_one = [](const std::string& s) {
    T v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw invalid_argument("cannot parse '" + s + "'");
    return v;
  };
  std::vector<T> out;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    if constexpr (std::is_integral_v<T>) {
      const T lo = parse_one(text.substr(0, colon));
      const T hi = parse_one(text.substr(colon + 1));
      for (T v = lo; v <= hi; ++v) out.push_back(v);
      return out;
    } else {
      throw invalid_argument("ranges are only supported for integers");
    }
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_one(item));
  return out;
}

inline void emit(const std::string& text, const std::string& path,
                 std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open " + path + " for writing");
  f << text;
  f.flush();
  if (!f) throw std::ios_base::failure("write to " + path + " failed");
}

struct VerifyOptions {
  std::string suite;
  int d = 3;
  int n = 3;
  int trials = 1000;
  std::uint64_t seed = kDefaultSeed;
  double tolerance = 1e-9;
  std::string input;
};

inline double trial_mix(std::uint64_t seed, int t) {
  auto g = substream(seed ^ 0x6d69780aULL, static_cast<std::uint64_t>(t));
  return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

inline std::uint64_t trial_seed(std::uint64_t seed, int t) {
  return substream(seed, static_cast<std::uint64_t>(t))();
}

inline std::vector<ConditionalDistribution> verify_corpus(
    const VerifyOptions& o) {
  std::vector<ConditionalDistribution> corpus;
  if (!o.input.empty()) {
    corpus.push_back(read_distribution(o.input));
    return corpus;
  }
  if (o.trials < 1) throw invalid_argument("--trials must be >= 1");
  for (int t = 0; t < o.trials; ++t)
    corpus.push_back(random_no_signaling(o.d, o.n, trial_mix(o.seed, t),
                                         trial_seed(o.seed, t)));
  return corpus;
}

inline int run_verify(const VerifyOptions& o, std::ostream& out) {
  bool pass = true;
  if (o.suite == "theorem1") {
    const auto corpus = verify_corpus(o);
    double min_slack = std::numeric_limits<double>::infinity();
    for (const auto& dist : corpus) {
      const auto r = verify_theorem1(dist);
      min_slack = std::min(min_slack, r.slack);
    }
    pass = min_slack >= -o.tolerance;
    out << "suite=theorem1 cases=" << corpus.size()
        << " min_slack=" << format_number(min_slack) << '\n';
  } else if (o.suite == "lemma") {
    const auto corpus = verify_corpus(o);
    double worst = -std::numeric_limits<double>::infinity();
    long long checks = 0;
    for (const auto& dist : corpus) {
      if (const auto ns = is_no_signaling(dist, 1e-9); !ns.passed)
        throw signaling_input(ns.residual);
      for (int a = 0; a < dist.settings(); ++a)
        for (int b = 0; b < dist.settings(); ++b) {
          const auto r = lemma_equality_bound(dist, a, b);
          worst = std::max(worst, r.p_equal - (1.0 - r.distance));
          ++checks;
        }
    }
    pass = worst <= o.tolerance;
    out << "suite=lemma checks=" << checks
        << " max_excess=" << format_number(worst) << '\n';
  } else if (o.suite == "lhv") {
    const auto r = lhv_min_in(o.d, o.n);
    pass = r.min_in == o.d - 1;
    out << "suite=lhv d=" << o.d << " n=" << o.n
        << " strategies=" << r.strategies
        << " min=" << format_number(r.min_in) << " expected=" << (o.d - 1)
        << '\n';
    out << "witness alice=";
    for (int v : r.witness.alice) out << v;
    out << " bob=";
    for (int v : r.witness.bob) out << v;
    out << '\n';
  } else if (o.suite == "contradiction") {
    const auto bases = cglmp_bases(make_chained_settings(o.d, std::max(o.n, 2)));
    const auto c = deterministic_crypto_contradiction(
        basis_to_bloch(bases.alice[0]), 0, basis_to_bloch(bases.alice[1]), 0);
    pass = c.exists && c.gap > 0.0;
    out << "suite=contradiction d=" << o.d
        << " max_min_overlap=" << format_number(c.max_min_overlap)
        << " gap=" << format_number(c.gap) << '\n';
  } else {
    throw invalid_argument("unknown suite '" + o.suite + "'");
  }
  out << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kOk : kVerificationFailed;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Crypto-nonlocality toolkit for qudits"};
  app.require_subcommand(1);

  int d = 3;
  int n = 2;
  double eta = 1.0;
  std::uint64_t seed = kDefaultSeed;

  auto* gamma_cmd = app.add_subcommand("gamma", "Print gamma(d)");
  gamma_cmd->add_option("--d", d, "Local dimension")->required();

  bool asymptotic = false;
  auto* in_cmd = app.add_subcommand("in", "Print the chained quantity I_N");
  in_cmd->add_option("--d", d, "Local dimension")->required();
  in_cmd->add_option("--n", n, "Settings per side")->required();
  in_cmd->add_flag("--asymptotic", asymptotic, "Use 2 gamma / N");

  bool analytic = false;
  bool mc = false;
  long long samples = kDefaultSamples;
  std::string mode = "sphere";
  auto* bound_cmd = app.add_subcommand(
      "bound", "Print the uniform-u lower bound, analytic L, or Monte Carlo L");
  bound_cmd->add_option("--d", d, "Local dimension")->required();
  bound_cmd->add_option("--eta", eta, "Purity in (0, 1]");
  auto* analytic_flag =
      bound_cmd->add_flag("--analytic", analytic, "Closed-form L");
  auto* mc_flag = bound_cmd->add_flag("--mc", mc, "Monte Carlo L");
  analytic_flag->excludes(mc_flag);
  bound_cmd->add_option("--samples", samples, "Monte Carlo samples");
  bound_cmd->add_option("--seed", seed, "RNG seed");
  bound_cmd->add_option("--mode", mode, "Hidden vector distribution")
      ->check(CLI::IsMember({"sphere", "haar"}));
  bound_cmd->add_option("--n", n, "Chain length defining the basis");

  int n_max = 1000;
  auto* ncrit_cmd = app.add_subcommand("ncrit", "Print the critical N");
  ncrit_cmd->add_option("--d", d, "Local dimension")->required();
  ncrit_cmd->add_option("--eta", eta, "Purity in (0, 1]");
  ncrit_cmd->add_option("--nmax", n_max, "Search limit");

  int fig = 2;
  std::optional<std::string> d_range, eta_list, n_range;
  std::string format = "csv";
  std::string out_path;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Tabulate I_N curves or critical N values");
  sweep_cmd->add_option("--fig", fig, "2: I_N curve, 3: critical N per (d, eta)")
      ->check(CLI::IsMember({2, 3}));
  sweep_cmd->add_option("--d-range", d_range, "e.g. 2:8 or 3");
  sweep_cmd->add_option("--eta-list", eta_list, "e.g. 1,0.9,0.7,0.5");
  sweep_cmd->add_option("--n-range", n_range, "e.g. 2:30");
  sweep_cmd->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--out", out_path, "Output file (default stdout)");

  detail::VerifyOptions vopt;
  auto* verify_cmd = app.add_subcommand("verify", "Run a property suite");
  verify_cmd->add_option("--suite", vopt.suite, "theorem1|lemma|lhv|contradiction")
      ->required()
      ->check(CLI::IsMember({"theorem1", "lemma", "lhv", "contradiction"}));
  verify_cmd->add_option("--d", vopt.d, "Local dimension");
  verify_cmd->add_option("--n", vopt.n, "Settings per side");
  verify_cmd->add_option("--trials", vopt.trials, "Generated distributions");
  verify_cmd->add_option("--seed", vopt.seed, "RNG seed");
  verify_cmd->add_option("--tolerance", vopt.tolerance, "Slack tolerance");
  verify_cmd->add_option("--input", vopt.input, "Distribution fixture (JSON)");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }

  try {
    if (*gamma_cmd) {
      out << format_number(gamma(d).gamma) << '\n';
    } else if (*in_cmd) {
      out << format_number(asymptotic ? asymptotic_in(d, n)
                                      : chained_in_exact(d, n))
          << '\n';
    } else if (*bound_cmd) {
      if (analytic) {
        out << format_number(leggett_l_analytic(d, eta).value) << '\n';
      } else if (mc) {
        LocalModel model{d, eta,
                         mode == "haar" ? HiddenDistribution::haar()
                                        : HiddenDistribution::sphere(),
                         HiddenDistribution::sphere()};
        const auto basis = basis_to_bloch(
            cglmp_bases(make_chained_settings(d, n)).alice.front());
        const auto est = leggett_l_mc(basis, model, samples, seed);
        out << format_number(est.value) << " +/- "
            << format_number(est.std_error) << " (samples=" << est.samples
            << ")\n";
      } else {
        out << format_number(uniform_lower_bound(d, eta)) << '\n';
      }
    } else if (*ncrit_cmd) {
      try {
        out << find_ncrit(d, eta, n_max) << '\n';
      } catch (const not_found& e) {
        out << "NOT-FOUND nmax=" << e.n_max()
            << " gap=" << format_number(e.gap()) << '\n';
        return kNotFound;
      }
    } else if (*sweep_cmd) {
      const bool critical = fig == 3;
      const auto ds = detail::parse_list<int>(
          d_range.value_or(critical ? "2:8" : "3"));
      const auto etas = detail::parse_list<double>(
          eta_list.value_or(critical ? "1,0.9,0.7,0.5" : "1"));
      const auto ns = detail::parse_list<int>(
          n_range.value_or(critical ? "2:2000" : "2:30"));
      if (ds.empty() || etas.empty() || ns.empty())
        throw invalid_argument("empty d, eta, or N range");
      const auto result = critical ? sweep_critical(ds, etas, ns)
                                   : sweep_curve(ds, etas, ns);
      detail::emit(format == "json" ? to_json(result) : to_csv(result),
                   out_path, out);
    } else if (*verify_cmd) {
      return detail::run_verify(vopt, out);
    }
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const signaling_input& e) {
    err << "error: rejected input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  return kOk;
}

}  // namespace cnl::cli
