// ddlab: run sweeps, print closed-form optima, run the acceptance checks.
//
//   ddlab <command> --config <path> [--out <path>] [--format csv|json] [--seed N]
//         [--threads N|auto] [--set key=value ...]
//
// Commands: sweep-samples, sweep-model, sweep-features, spectrum, theory, verify.

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddlab/config.hpp"
#include "ddlab/error.hpp"
#include "ddlab/harness.hpp"
#include "ddlab/output.hpp"
#include "ddlab/risk_theory.hpp"
#include "ddlab/verify.hpp"

namespace {

using namespace ddlab;

int resolve_threads(const std::string& flag) {
  std::string text = flag;
  if (text.empty()) {
    const char* env = std::getenv("DDLAB_THREADS");
    if (env && *env) text = env;
  }
  if (text.empty() || text == "auto") return omp_get_max_threads();
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || n < 1)
    throw InputError("threads must be a positive integer or 'auto', got '" + text + "'");
  return n;
}

struct SweepArgs {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::string threads;
  std::vector<std::string> overrides;
};

void add_sweep_options(CLI::App* cmd, SweepArgs& a) {
  cmd->add_option("--config", a.config, "JSON sweep configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "output file (default: stdout)");
  cmd->add_option("--format", a.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", a.seed, "master seed, overrides the config");
  cmd->add_option("--threads", a.threads, "worker threads or 'auto' (env DDLAB_THREADS)");
  cmd->add_option("--set", a.overrides, "key=value config override")->allow_extra_args(false);
}

int run_sweep_command(SweepKind kind, const SweepArgs& a) {
  SweepConfig cfg = parse_config(a.config, a.overrides);
  if (cfg.kind != kind)
    throw ConfigError("this command runs '" + sweep_kind_name(kind) + "' sweeps but the config says '" +
                          sweep_kind_name(cfg.kind) + "'",
                      "/sweep");
  if (a.seed) cfg.master_seed = *a.seed;
  const RiskCurve curve = run_sweep(cfg, {resolve_threads(a.threads)});
  const std::string text = a.format == "json" ? format_json(cfg, curve) : format_csv(cfg, curve);
  if (a.out.empty()) std::cout << text << std::flush;
  else write_text_file(a.out, text);
  return 0;
}

struct TheoryArgs {
  std::optional<long long> n, p;
  std::optional<double> sigma2, b2;
  std::string config;
  std::vector<std::string> overrides;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int run_theory(const TheoryArgs& a) {
  std::vector<Eigen::Index> ns;
  Eigen::Index p = 0;
  double sigma2 = 0.25, b2 = 1.0;
  if (!a.config.empty() || !a.overrides.empty()) {
    nlohmann::json doc = nlohmann::json::object();
    if (!a.config.empty()) {
      std::ifstream in(a.config);
      doc = nlohmann::json::parse(in, nullptr, false);
      if (doc.is_discarded()) throw ConfigError("'" + a.config + "' is not valid JSON", "");
    }
    if (!doc.contains("sweep")) doc["sweep"] = "samples";
    if (!doc.contains("grid") && a.n) doc["grid"] = nlohmann::json::array({*a.n});
    const SweepConfig cfg = parse_config_json(doc, a.overrides);
    for (std::int64_t n : cfg.grid) ns.push_back(n);
    p = cfg.fixed.p;
    sigma2 = cfg.fixed.sigma2;
    b2 = cfg.fixed.b2;
  }
  if (a.n) ns = {static_cast<Eigen::Index>(*a.n)};
  if (a.p) p = *a.p;
  if (a.sigma2) sigma2 = *a.sigma2;
  if (a.b2) b2 = *a.b2;
  if (ns.empty() || p < 1) throw InputError("theory needs n and p (flags, --config or --set)");
  if (!(b2 > 0.0) || !(sigma2 >= 0.0)) throw InputError("theory needs sigma2 >= 0 and b2 > 0");

  std::printf("%-8s %-6s %-20s %-12s %-12s %-12s %-12s %-8s %-12s %-12s\n", "n", "p", "regime",
              "gamma_opt", "lambda_opt", "excess", "total", "c", "asym_gamma", "asym_total");
  const double lambda = ridge_optimal_lambda(p, sigma2, b2);
  for (Eigen::Index n : ns) {
    const double c = static_cast<double>(p) / static_cast<double>(n);
    const AsymptoticOptimum asym = asymptotic_optimal(c, sigma2, b2);
    const Regime regime = classify_regime(n, p);
    std::printf("%-8lld %-6lld %-20s ", static_cast<long long>(n), static_cast<long long>(p),
                regime_name(regime).c_str());
    if (regime == Regime::Threshold) {
      std::printf("%-64s", "undefined at interpolation threshold");
    } else {
      const SpectralOptimum opt = spectral_optimal(n, p, sigma2, b2);
      std::printf("%-12s %-12s %-12s %-12s", num(opt.gamma_opt).c_str(), num(lambda).c_str(),
                  num(*opt.risk.excess).c_str(), num(*opt.risk.total).c_str());
    }
    std::printf(" %-8s %-12s %-12s\n", num(c).c_str(), num(asym.gamma_hat).c_str(),
                num(asym.risk).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ddlab: dropout regression risk laboratory"};
  app.require_subcommand(1);

  SweepArgs samples, model, features, spectrum;
  auto* c_samples = app.add_subcommand("sweep-samples", "risk vs sample size");
  auto* c_model = app.add_subcommand("sweep-model", "risk vs projected model size");
  auto* c_features = app.add_subcommand("sweep-features", "random ReLU feature regression");
  auto* c_spectrum = app.add_subcommand("spectrum", "largest correlation eigenvalue vs n");
  add_sweep_options(c_samples, samples);
  add_sweep_options(c_model, model);
  add_sweep_options(c_features, features);
  add_sweep_options(c_spectrum, spectrum);

  TheoryArgs theory;
  auto* c_theory = app.add_subcommand("theory", "closed-form optima, no simulation");
  c_theory->add_option("--n", theory.n, "sample size");
  c_theory->add_option("--p", theory.p, "dimension");
  c_theory->add_option("--sigma2", theory.sigma2, "noise variance (default 0.25)");
  c_theory->add_option("--b2", theory.b2, "squared norm of the truth (default 1)");
  c_theory->add_option("--config", theory.config, "take n (grid), p, sigma2, b2 from a config")
      ->check(CLI::ExistingFile);
  c_theory->add_option("--set", theory.overrides, "key=value override")->allow_extra_args(false);

  std::vector<std::string> only;
  std::string verify_threads;
  auto* c_verify = app.add_subcommand("verify", "run the acceptance checks");
  c_verify->add_option("--only", only, "run just this check (repeatable)")->allow_extra_args(false);
  c_verify->add_option("--threads", verify_threads, "worker threads or 'auto'");
  bool list = false;
  c_verify->add_flag("--list", list, "list check names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_samples->parsed()) return run_sweep_command(SweepKind::Samples, samples);
    if (c_model->parsed()) return run_sweep_command(SweepKind::Model, model);
    if (c_features->parsed()) return run_sweep_command(SweepKind::Features, features);
    if (c_spectrum->parsed()) return run_sweep_command(SweepKind::Spectrum, spectrum);
    if (c_theory->parsed()) return run_theory(theory);
    if (c_verify->parsed()) {
      if (list) {
        for (const AcceptanceCheck& c : acceptance_checks())
          std::cout << c.name << "  " << c.summary << '\n';
        return 0;
      }
      const int failures = run_acceptance(only, {resolve_threads(verify_threads)}, std::cout);
      std::cout << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed")
                << '\n';
      return failures == 0 ? 0 : 1;
    }
  } catch (const ddlab::Error& e) {
    std::cerr << "ddlab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ddlab: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
