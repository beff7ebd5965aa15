// circpdo: command line front end for the truncated operator calculus.
//
// exit codes
//   0  success (verify: every check passed)
//   1  verify ran cleanly but at least one check failed
//   2  unusable input: bad flags, malformed files, empty sweep list
//   3  math failure on symbols operations (ellipticity, depth, singularity)
//   4  resource failure: an output file could not be written

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "circpdo/cocycle.hpp"
#include "circpdo/connection.hpp"
#include "circpdo/errors.hpp"
#include "circpdo/report.hpp"
#include "circpdo/symbol_io.hpp"
#include "circpdo/verify.hpp"

namespace {

using namespace circpdo;

// relative output paths land in CIRCPDO_OUT_DIR when it is set
std::string resolve_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  const char* base = std::getenv("CIRCPDO_OUT_DIR");
  if (base == nullptr || *base == '\0') return path;
  return (std::filesystem::path(base) / p).string();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

TruncOperator cli_shift(int n, int K, int depth) {
  const int KX = std::min(8, std::max(K, std::abs(n)));
  return quantize(
      FormalSymbol::multiplication(
          FourierFunction::harmonic(n, Mat::Identity(1, 1), KX), depth),
      K);
}

int run_symbols(const std::string& op, const std::string& in,
                const std::string& in2, int depth, const std::string& out) {
  if (op == "compose" && in2.empty()) {
    std::cerr << "circpdo: compose needs --in2\n";
    return 2;
  }
  FormalSymbol a = FormalSymbol::unit(1, 1, 1);
  FormalSymbol b = a;
  try {
    a = read_symbol_file(in);
    if (!in2.empty()) b = read_symbol_file(in2);
  } catch (const ParseError& e) {
    std::cerr << "circpdo: bad input: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "circpdo: bad input: " << e.what() << "\n";
    return 2;
  }
  FormalSymbol result = a;
  try {
    if (op == "compose")
      result = compose(a, b, depth);
    else if (op == "adjoint")
      result = adjoint_symbol(a, depth);
    else if (op == "parametrix")
      result = parametrix(a, depth);
    else
      result = order_reduce(a, depth);
  } catch (const Error& e) {
    std::cerr << "circpdo: math failure: " << e.what() << "\n";
    return 3;
  }
  try {
    write_symbol_file(resolve_out(out), result);
  } catch (const Error& e) {
    std::cerr << "circpdo: cannot write output: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

int run_verify(const std::string& suite, int K, int depth, double tol,
               std::uint64_t seed, const std::string& report_path) {
  VerifyParams p;
  p.K = K;
  p.depth = depth;
  p.tol = tol;
  p.seed = seed;

  std::vector<SuiteResult> results;
  if (suite == "all")
    results = verify_all(p);
  else if (suite == "connections")
    results = {verify_connections(p)};
  else if (suite == "transport")
    results = {verify_transport(p)};
  else if (suite == "fredholm")
    results = {verify_fredholm(p)};
  else
    results = {verify_cocycle(p)};

  std::vector<Check> checks;
  bool any_fail = false, any_hard_fail = false;
  for (const auto& r : results) {
    for (const auto& c : r.checks) {
      Check prefixed = c;
      prefixed.name = r.suite + "/" + c.name;
      checks.push_back(prefixed);
      std::cout << "check " << prefixed.name << ": "
                << (c.pass ? "PASS" : "FAIL") << " (value=" << fmt(c.residual)
                << ", bound=" << fmt(c.threshold) << ")\n";
      if (!c.note.empty()) std::cout << "  note: " << c.note << "\n";
    }
    if (!r.pass()) {
      any_fail = true;
      if (r.outcome != "open-discrepancy") any_hard_fail = true;
    }
  }
  const std::string outcome =
      !any_fail ? "pass" : (any_hard_fail ? "fail" : "open-discrepancy");
  std::cout << "verify " << suite << ": " << outcome << "\n";

  if (!report_path.empty()) {
    ojson params;
    params["K"] = K;
    params["depth"] = depth;
    params["tol"] = tol;
    const ojson report =
        make_report("verify " + suite, params, seed, checks, outcome);
    std::ofstream f(resolve_out(report_path), std::ios::binary);
    f << report.dump(2) << "\n";
    if (!f) {
      std::cerr << "circpdo: cannot write report\n";
      return 4;
    }
  }
  return any_fail ? 1 : 0;
}

int run_sweep(const std::string& klist, const std::string& what,
              const std::string& out, std::uint64_t seed) {
  std::vector<int> Ks;
  std::stringstream ss(klist);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      size_t used = 0;
      const int K = std::stoi(tok, &used);
      if (used != tok.size() || K < 2) throw std::invalid_argument(tok);
      Ks.push_back(K);
    } catch (const std::exception&) {
      std::cerr << "circpdo: bad K value '" << tok << "'\n";
      return 2;
    }
  }
  if (Ks.empty()) {
    std::cerr << "circpdo: empty K list\n";
    return 2;
  }

  std::ostringstream csv;
  csv << "K,quantity,value,residual\n";
  for (const int K : Ks) {
    if (what == "decay") {
      // quantization defect of five seeded compositions
      Rng rng(seed);
      const int KX = std::min(8, K);
      double min_exp = std::numeric_limits<double>::infinity();
      double worst = 0;
      for (int i = 0; i < 5; ++i) {
        const int o1 = -static_cast<int>(rng.below(3));
        const int o2 = -static_cast<int>(rng.below(3));
        const FormalSymbol a = seeded_symbol(rng, o1, 1, KX, 4, 2, 1.0, false);
        const FormalSymbol b = seeded_symbol(rng, o2, 1, KX, 4, 2, 1.0, false);
        const TruncOperator defect = quantize(compose(a, b, 4), K) -
                                     multiply(quantize(a, K), quantize(b, K));
        min_exp = std::min(min_exp, decay_profile(defect, 4).fitted_exponent);
        worst = std::max(worst, defect.max_abs());
      }
      csv << K << ",defect_decay_exponent," << fmt(min_exp) << ","
          << fmt(worst) << "\n";
    } else if (what == "cocycle") {
      const cplx v = schwinger(cli_shift(1, K, 4), cli_shift(-1, K, 4));
      csv << K << ",schwinger_pair_trace," << fmt(v.real()) << ","
          << fmt(std::abs(v + cplx(1.0, 0.0))) << "\n";
    } else {
      const TruncOperator a = cli_shift(1, K, 4), b = cli_shift(-1, K, 4);
      const TruncOperator closed = curvature_closed_form(a, b);
      const TruncOperator hol = curvature_holonomy(half_plus(K, 1), a, b, 1e-2);
      csv << K << ",holonomy_curvature_norm," << fmt(hol.norm()) << ","
          << fmt((hol - closed).norm() / (1.0 + closed.norm())) << "\n";
    }
  }

  if (out.empty()) {
    std::cout << csv.str();
    return 0;
  }
  std::ofstream f(resolve_out(out), std::ios::binary);
  f << csv.str();
  if (!f) {
    std::cerr << "circpdo: cannot write CSV\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"truncated pseudo-differential calculus on the circle"};
  app.require_subcommand(1);

  std::string sym_op, sym_in, sym_in2, sym_out;
  int sym_depth = 4;
  CLI::App* sym = app.add_subcommand("symbols", "operate on symbol files");
  sym->add_option("op", sym_op, "compose | adjoint | parametrix | order-reduce")
      ->required()
      ->check(CLI::IsMember({"compose", "adjoint", "parametrix", "order-reduce"}));
  sym->add_option("--in", sym_in, "input symbol file")->required();
  sym->add_option("--in2", sym_in2, "second input (compose)");
  sym->add_option("--depth", sym_depth, "working expansion depth")
      ->check(CLI::Range(1, 64));
  sym->add_option("--out", sym_out, "output symbol file")->required();

  std::string ver_suite, ver_report;
  int ver_K = 16, ver_depth = 4;
  double ver_tol = 0.0;
  std::uint64_t ver_seed = 7;
  CLI::App* ver = app.add_subcommand("verify", "run a property suite");
  ver->add_option("suite", ver_suite,
                  "connections | transport | fredholm | cocycle | all")
      ->required()
      ->check(CLI::IsMember(
          {"connections", "transport", "fredholm", "cocycle", "all"}));
  ver->add_option("--K", ver_K, "mode truncation radius")
      ->check(CLI::Range(2, 4096));
  ver->add_option("--depth", ver_depth, "expansion depth")
      ->check(CLI::Range(1, 64));
  ver->add_option("--tol", ver_tol,
                  "override the pinned residual bounds (0 keeps them)");
  ver->add_option("--seed", ver_seed, "random seed");
  ver->add_option("--report", ver_report, "write a JSON report here");

  std::string sw_klist, sw_what = "decay", sw_out;
  std::uint64_t sw_seed = 7;
  CLI::App* sw = app.add_subcommand("sweep", "tabulate a quantity over K");
  sw->add_option("--K-list", sw_klist, "comma separated K values")->required();
  sw->add_option("--what", sw_what, "decay | cocycle | holonomy")
      ->check(CLI::IsMember({"decay", "cocycle", "holonomy"}));
  sw->add_option("--out", sw_out, "CSV output path (stdout when absent)");
  sw->add_option("--seed", sw_seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sym->parsed())
      return run_symbols(sym_op, sym_in, sym_in2, sym_depth, sym_out);
    if (ver->parsed())
      return run_verify(ver_suite, ver_K, ver_depth, ver_tol, ver_seed,
                        ver_report);
    return run_sweep(sw_klist, sw_what, sw_out, sw_seed);
  } catch (const Error& e) {
    std::cerr << "circpdo: " << e.what() << "\n";
    return 1;
  }
}
