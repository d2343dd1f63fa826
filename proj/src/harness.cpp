#include "ddlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "ddlab/datagen.hpp"
#include "ddlab/error.hpp"
#include "ddlab/estimators.hpp"
#include "ddlab/idx.hpp"
#include "ddlab/kernel_rf.hpp"
#include "ddlab/kernels.hpp"
#include "ddlab/spectral.hpp"

namespace ddlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_common(const SweepConfig& cfg, SweepKind expected) {
  if (cfg.kind != expected)
    throw ConfigError("expected sweep kind '" + sweep_kind_name(expected) + "', got '" +
                          sweep_kind_name(cfg.kind) + "'",
                      "/sweep");
  if (cfg.grid.empty()) throw ConfigError("grid must not be empty", "/grid");
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    if (cfg.grid[i] < 1)
      throw ConfigError("grid values must be positive", "/grid/" + std::to_string(i));
    if (i > 0 && cfg.grid[i] <= cfg.grid[i - 1])
      throw ConfigError("grid must be strictly increasing", "/grid/" + std::to_string(i));
  }
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1", "/trials");
  if (!(cfg.fixed.sigma2 >= 0.0)) throw ConfigError("sigma2 must be >= 0", "/sigma2");
  if (!(cfg.fixed.b2 >= 0.0)) throw ConfigError("b2 must be >= 0", "/b2");
}

void check_policy_values(const GammaPolicy& policy) {
  for (std::size_t i = 0; i < policy.values.size(); ++i)
    if (!(policy.values[i] > 0.0 && policy.values[i] <= 1.0))
      throw ConfigError("gamma values must lie in (0,1]", "/gamma_policy");
  if (policy.kind == GammaPolicy::Kind::Fixed && policy.values.size() != 1)
    throw ConfigError("fixed policy needs exactly one gamma", "/gamma_policy");
  if (policy.kind == GammaPolicy::Kind::Sweep && policy.values.empty())
    throw ConfigError("sweep policy needs at least one gamma", "/gamma_policy");
}

Vector scaled_truth(Eigen::Index p, double b2, Seed seed) {
  return sample_beta_star(p, seed) * std::sqrt(b2);
}

/// Runs fn over every (grid index, trial) pair; results are indexed g * trials + t.
template <class Fn>
auto run_trials(const SweepConfig& cfg, const RunOptions& opts, Fn&& fn) {
  const std::int64_t trials = cfg.trials;
  const std::int64_t count = static_cast<std::int64_t>(cfg.grid.size()) * trials;
  return kernels::map_indices(count, opts.threads,
                              [&](std::int64_t i) { return fn(i / trials, i % trials); });
}

// ---------------------------------------------------------------- samples

struct SampleCandidate {
  std::optional<double> gamma;
  std::optional<double> theory_excess;
  std::function<CoefficientEstimate(const RegressionDataset&)> fit;
};

CoefficientEstimate null_estimate(const RegressionDataset& ds) {
  return {Vector::Zero(ds.p()), std::nullopt};
}

std::vector<double> policy_gammas(const SweepConfig& cfg, Eigen::Index n, Eigen::Index p) {
  switch (cfg.gamma_policy.kind) {
    case GammaPolicy::Kind::Fixed:
    case GammaPolicy::Kind::Sweep:
      return cfg.gamma_policy.values;
    case GammaPolicy::Kind::OptimalPerPoint:
      // Inside the threshold band the optimal rate tends to 0: the null estimate.
      if (classify_regime(n, p) == Regime::Threshold) return {0.0};
      if (!(cfg.fixed.b2 > 0.0)) throw ConfigError("optimal gamma needs b2 > 0", "/b2");
      return {spectral_optimal(n, p, cfg.fixed.sigma2, cfg.fixed.b2).gamma_opt};
  }
  return {};
}

std::vector<SampleCandidate> sample_candidates(const SweepConfig& cfg, Eigen::Index n,
                                               Eigen::Index p) {
  const double sigma2 = cfg.fixed.sigma2, b2 = cfg.fixed.b2;
  std::vector<SampleCandidate> out;
  switch (cfg.estimator) {
    case EstimatorKind::Ols: {
      const RegimeRisk r = spectral_risk(n, p, 1.0, sigma2, b2);
      out.push_back({std::nullopt, r.excess, [](const RegressionDataset& ds) { return fit_ols(ds); }});
      break;
    }
    case EstimatorKind::Ridge: {
      if (cfg.gamma_policy.kind == GammaPolicy::Kind::Sweep)
        throw ConfigError("ridge sweeps take a fixed lambda or the optimal policy", "/gamma_policy");
      double lambda = cfg.lambda;
      if (cfg.gamma_policy.kind == GammaPolicy::Kind::OptimalPerPoint) {
        if (!(b2 > 0.0)) throw ConfigError("optimal lambda needs b2 > 0", "/b2");
        lambda = ridge_optimal_lambda(p, sigma2, b2);
      }
      if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0", "/lambda");
      out.push_back({std::nullopt, std::nullopt,
                     [lambda](const RegressionDataset& ds) { return fit_ridge(ds, lambda); }});
      break;
    }
    case EstimatorKind::DropoutScalar:
    case EstimatorKind::DropoutSpectral: {
      const bool spectral = cfg.estimator == EstimatorKind::DropoutSpectral;
      for (double g : policy_gammas(cfg, n, p)) {
        SampleCandidate c;
        c.gamma = g;
        if (spectral) c.theory_excess = spectral_risk(n, p, g, sigma2, b2).excess;
        if (g == 0.0) c.fit = null_estimate;
        else if (spectral) c.fit = [g](const RegressionDataset& ds) { return fit_dropout_spectral(ds, g); };
        else c.fit = [g](const RegressionDataset& ds) { return fit_dropout_scalar(ds, g); };
        out.push_back(std::move(c));
      }
      break;
    }
    case EstimatorKind::DropoutDiagonal: {
      if (cfg.gamma_policy.kind == GammaPolicy::Kind::OptimalPerPoint) {
        if (!(b2 > 0.0)) throw ConfigError("optimal rates need b2 > 0", "/b2");
        out.push_back({std::nullopt, std::nullopt, [sigma2, b2](const RegressionDataset& ds) {
                         const Vector m = ds.x.colwise().squaredNorm().transpose();
                         return fit_dropout_diagonal(
                             ds, generalized_dropout_rates(m, ds.p(), sigma2, b2));
                       }});
      } else {
        for (double g : cfg.gamma_policy.values)
          out.push_back({g, std::nullopt, [g](const RegressionDataset& ds) {
                           return fit_dropout_diagonal(ds, Vector::Constant(ds.p(), g));
                         }});
      }
      break;
    }
  }
  return out;
}

/// Per candidate: mean/SE over trials. Picks the candidate with the lowest mean.
template <class ValueAt>
std::size_t best_candidate(std::size_t candidates, std::int64_t trials, ValueAt&& value_at,
                           std::vector<SampleStats>& stats) {
  stats.clear();
  std::size_t best = 0;
  std::vector<double> v(static_cast<std::size_t>(trials));
  for (std::size_t c = 0; c < candidates; ++c) {
    for (std::int64_t t = 0; t < trials; ++t) v[static_cast<std::size_t>(t)] = value_at(c, t);
    stats.push_back(sample_stats(v));
    if (stats[c].mean < stats[best].mean) best = c;
  }
  return best;
}

std::optional<double> mean_if_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return std::nullopt;
  return kernels::pairwise_sum(v) / static_cast<double>(v.size());
}

void set_theory(RiskPoint& pt, std::optional<double> excess, double sigma2) {
  pt.theory_excess = excess;
  if (excess) pt.theory_total = *excess + sigma2;
}

// ------------------------------------------------------------------ model

enum class AlphaRule { MinNorm, Optimal, Uniform };

struct ModelCandidate {
  std::optional<double> gamma;
  AlphaRule rule = AlphaRule::Uniform;
  double alpha = 0.0;
};

std::vector<ModelCandidate> model_candidates(const SweepConfig& cfg) {
  std::vector<ModelCandidate> out;
  if (cfg.estimator == EstimatorKind::Ols) {
    out.push_back({std::nullopt, AlphaRule::MinNorm, 0.0});
    return out;
  }
  if (cfg.estimator == EstimatorKind::Ridge)
    throw ConfigError("model sweeps support ols or a dropout estimator", "/estimator");
  if (cfg.gamma_policy.kind == GammaPolicy::Kind::OptimalPerPoint) {
    if (!(cfg.fixed.b2 > 0.0)) throw ConfigError("optimal rates need b2 > 0", "/b2");
    out.push_back({std::nullopt, AlphaRule::Optimal, 0.0});
    return out;
  }
  for (double g : cfg.gamma_policy.values) out.push_back({g, AlphaRule::Uniform, (1.0 - g) / g});
  return out;
}

struct ModelOutcome {
  std::vector<double> excess;
  std::vector<double> theory;  // NaN when the conditional formula is singular
};

ModelOutcome model_trial(const SweepConfig& cfg, const std::vector<ModelCandidate>& candidates,
                         Eigen::Index k, Seed trial_seed) {
  const Eigen::Index n = cfg.fixed.n, p = cfg.fixed.p;
  const double sigma2 = cfg.fixed.sigma2, theta2 = cfg.fixed.b2;
  const Vector theta = scaled_truth(p, theta2, derive(trial_seed, "beta"));
  const Matrix q_proj = sample_projection(k, p, derive(trial_seed, "projection")).q;
  const RegressionDataset ds = generate_dataset(n, p, theta, sigma2, derive(trial_seed, "data"));

  const Matrix xt = ds.x * q_proj.transpose();  // n x k
  const SymEigen e = sym_eig(gram(xt));
  const Vector q = e.values.cwiseMax(0.0);
  const Matrix xs = xt * e.vectors;  // rotated projected design
  const Vector h = xs.colwise().squaredNorm().transpose();

  ModelOutcome out;
  for (const ModelCandidate& c : candidates) {
    Vector alpha(k);
    Vector w;
    if (c.rule == AlphaRule::MinNorm) {
      alpha.setZero();
      w = svd_lstsq(xs, ds.y).col(0);
    } else {
      if (c.rule == AlphaRule::Optimal) {
        Vector hpos = h.cwiseMax(std::numeric_limits<double>::min());
        alpha = modelwise_optimal_alpha(hpos, k, p, sigma2, theta2).alpha;
      } else {
        alpha.setConstant(c.alpha);
      }
      const Vector penalty = h.cwiseProduct(alpha);
      if (penalty.minCoeff() > 0.0) w = solve_generalized_ridge(xs, ds.y, penalty).col(0);
      else w = svd_lstsq(xs, ds.y).col(0);
    }
    const Vector beta_hat = q_proj.transpose() * (e.vectors * w);
    out.excess.push_back((beta_hat - theta).squaredNorm());
    double theory = kNaN;
    try {
      theory = modelwise_risk_given_spectrum(q, h, alpha, p, sigma2, theta2) - sigma2;
    } catch (const SingularityError&) {
    }
    out.theory.push_back(theory);
  }
  return out;
}

// --------------------------------------------------------------- features

struct FeatureCandidate {
  std::optional<double> gamma;
  EstimatorKind kind;
  double param = 0.0;

  EstimatorSpec spec(Eigen::Index d) const {
    switch (kind) {
      case EstimatorKind::Ols: return Ols{};
      case EstimatorKind::Ridge: return Ridge{param};
      case EstimatorKind::DropoutScalar: return DropoutScalar{param};
      case EstimatorKind::DropoutDiagonal: return DropoutDiagonal{Vector::Constant(d, param)};
      default: return DropoutSpectral{param};
    }
  }
};

std::vector<FeatureCandidate> feature_candidates(const SweepConfig& cfg) {
  std::vector<FeatureCandidate> out;
  if (cfg.estimator == EstimatorKind::Ols) return {{std::nullopt, EstimatorKind::Ols, 0.0}};
  if (cfg.estimator == EstimatorKind::Ridge) {
    if (cfg.gamma_policy.kind != GammaPolicy::Kind::Fixed &&
        cfg.gamma_policy.kind != GammaPolicy::Kind::OptimalPerPoint)
      throw ConfigError("ridge feature sweeps take a fixed lambda", "/gamma_policy");
    return {{std::nullopt, EstimatorKind::Ridge, cfg.lambda}};
  }
  if (cfg.gamma_policy.kind == GammaPolicy::Kind::OptimalPerPoint)
    throw ConfigError(
        "feature sweeps have no closed-form optimal rate; use fixed:<g> or sweep:<g1>,<g2>,...",
        "/gamma_policy");
  for (double g : cfg.gamma_policy.values) out.push_back({g, cfg.estimator, g});
  return out;
}

struct FeatureData {
  bool idx = false;
  LabeledImages train;
  Matrix test_x;
  Matrix test_y;  // one-hot
  int classes = 0;
};

Matrix one_hot(const std::vector<int>& labels, int classes) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return y;
}

FeatureData load_feature_data(const SweepConfig& cfg) {
  FeatureData data;
  const FeatureSweepOptions& f = cfg.features;
  if (!f.uses_idx()) return data;
  if (f.train_labels.empty() || f.test_images.empty() || f.test_labels.empty())
    throw ConfigError("IDX mode needs train_images, train_labels, test_images and test_labels",
                      "/train_labels");
  data.idx = true;
  data.train = load_idx(f.train_images, f.train_labels);
  LabeledImages test = load_idx(f.test_images, f.test_labels);
  if (test.x.cols() != data.train.x.cols())
    throw ConfigError("train and test images have different sizes", "/test_images");
  int top = 0;
  for (int l : data.train.labels) top = std::max(top, l);
  for (int l : test.labels) top = std::max(top, l);
  data.classes = top + 1;
  const Eigen::Index m =
      f.test_size > 0 ? std::min<Eigen::Index>(f.test_size, test.x.rows()) : test.x.rows();
  data.test_x = test.x.topRows(m);
  data.test_y = one_hot(std::vector<int>(test.labels.begin(), test.labels.begin() + m), data.classes);
  return data;
}

std::vector<double> feature_trial(const SweepConfig& cfg, const FeatureData& data,
                                  const std::vector<FeatureCandidate>& candidates, Eigen::Index n,
                                  Eigen::Index D, Seed ts) {
  const FeatureSweepOptions& f = cfg.features;
  const double sigma2 = cfg.fixed.sigma2;
  Matrix x_train, x_test, y_train, f_test;
  Eigen::Index d;
  if (data.idx) {
    const Eigen::Index pool = data.train.x.rows();
    if (n > pool)
      throw ConfigError("grid asks for " + std::to_string(n) + " training samples but only " +
                            std::to_string(pool) + " are available",
                        "/grid");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(pool));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Engine engine(derive(ts, "subsample"));
    for (Eigen::Index i = 0; i < n; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, pool - 1);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(engine))]);
    }
    d = data.train.x.cols();
    x_train.resize(n, d);
    y_train = Matrix::Zero(n, data.classes);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index r = order[static_cast<std::size_t>(i)];
      x_train.row(i) = data.train.x.row(r);
      y_train(i, data.train.labels[static_cast<std::size_t>(r)]) = 1.0;
    }
    x_test = data.test_x;
    f_test = data.test_y;
  } else {
    d = f.input_dim;
    Engine train_engine(derive(ts, "train"));
    Engine test_engine(derive(ts, "test"));
    x_train = gaussian_matrix(n, d, train_engine);
    x_test = gaussian_matrix(f.test_size, d, test_engine);
  }

  const FeatureWeights w = sample_feature_weights(D, d, derive(ts, "weights"));
  const Matrix phi_train = relu_embed(x_train, w);
  const Matrix phi_test = relu_embed(x_test, w);

  if (!data.idx) {
    Vector f_train;
    if (f.target == FeatureTarget::LinearInput) {
      const Vector beta = scaled_truth(d, cfg.fixed.b2, derive(ts, "beta"));
      f_train = x_train * beta;
      f_test = x_test * beta;
    } else {
      const Vector theta = scaled_truth(D, cfg.fixed.b2, derive(ts, "beta"));
      f_train = phi_train * theta;
      f_test = phi_test * theta;
    }
    Engine noise_engine(derive(ts, "noise"));
    std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
    y_train = f_train;
    if (sigma2 > 0.0)
      for (Eigen::Index i = 0; i < n; ++i) y_train(i, 0) += noise(noise_engine);
  }

  // ReLU columns that are zero on every training sample carry no penalty and
  // no data; they get coefficient 0, the minimum-norm choice.
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < D; ++j)
    if (phi_train.col(j).squaredNorm() > 0.0) live.push_back(j);
  const Matrix train_live = phi_train(Eigen::all, live);
  const Matrix test_live = phi_test(Eigen::all, live);

  std::vector<double> out;
  for (const FeatureCandidate& c : candidates) {
    Matrix resid = -f_test;
    if (!live.empty())
      resid += test_live * fit_multi(train_live, y_train, c.spec(static_cast<Eigen::Index>(live.size())));
    out.push_back(resid.squaredNorm() / static_cast<double>(resid.rows()));
  }
  return out;
}

}  // namespace

std::string sweep_kind_name(SweepKind k) {
  switch (k) {
    case SweepKind::Samples: return "samples";
    case SweepKind::Model: return "model";
    case SweepKind::Features: return "features";
    default: return "spectrum";
  }
}

std::string estimator_kind_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Ols: return "ols";
    case EstimatorKind::Ridge: return "ridge";
    case EstimatorKind::DropoutScalar: return "dropout_scalar";
    case EstimatorKind::DropoutDiagonal: return "dropout_diagonal";
    default: return "dropout_spectral";
  }
}

SampleStats sample_stats(const std::vector<double>& v) {
  SampleStats s;
  if (v.empty()) return s;
  const double count = static_cast<double>(v.size());
  s.mean = kernels::pairwise_sum(v) / count;
  if (v.size() < 2) return s;
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - s.mean) * (v[i] - s.mean);
  s.se = std::sqrt(kernels::pairwise_sum(dev) / (count - 1.0) / count);
  return s;
}

RiskCurve run_sample_sweep(const SweepConfig& cfg, const RunOptions& opts) {
  check_common(cfg, SweepKind::Samples);
  check_policy_values(cfg.gamma_policy);
  const Eigen::Index p = cfg.fixed.p;
  if (p < 1) throw ConfigError("p must be >= 1", "/p");

  std::vector<std::vector<SampleCandidate>> candidates;
  for (std::int64_t n : cfg.grid) candidates.push_back(sample_candidates(cfg, n, p));

  const auto outcomes = run_trials(cfg, opts, [&](std::int64_t g, std::int64_t t) {
    const Eigen::Index n = cfg.grid[static_cast<std::size_t>(g)];
    const Seed ts = derive(cfg.master_seed, "samples", static_cast<std::uint64_t>(g),
                           static_cast<std::uint64_t>(t));
    const Vector beta = scaled_truth(p, cfg.fixed.b2, derive(ts, "beta"));
    const RegressionDataset ds = generate_dataset(n, p, beta, cfg.fixed.sigma2, derive(ts, "data"));
    std::vector<double> excess;
    for (const SampleCandidate& c : candidates[static_cast<std::size_t>(g)])
      excess.push_back(test_risk(c.fit(ds), beta, ds.sigma2).excess);
    return excess;
  });

  RiskCurve curve{SweepKind::Samples, cfg.fixed.sigma2, {}};
  std::vector<SampleStats> stats;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto& cands = candidates[g];
    const std::size_t best = best_candidate(cands.size(), cfg.trials, [&](std::size_t c, std::int64_t t) {
      return outcomes[g * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)][c];
    }, stats);
    RiskPoint pt;
    pt.axis = cfg.grid[g];
    pt.n = cfg.grid[g];
    pt.p = p;
    pt.k = p;
    pt.gamma = cands[best].gamma;
    pt.trials = cfg.trials;
    pt.emp_excess_mean = stats[best].mean;
    pt.emp_excess_se = stats[best].se;
    pt.emp_total_mean = stats[best].mean + cfg.fixed.sigma2;
    set_theory(pt, cands[best].theory_excess, cfg.fixed.sigma2);
    curve.points.push_back(pt);
  }
  return curve;
}

RiskCurve run_model_sweep(const SweepConfig& cfg, const RunOptions& opts) {
  check_common(cfg, SweepKind::Model);
  check_policy_values(cfg.gamma_policy);
  const Eigen::Index n = cfg.fixed.n, p = cfg.fixed.p;
  if (p < 1) throw ConfigError("p must be >= 1", "/p");
  if (n < 1) throw ConfigError("n must be >= 1", "/n");
  for (std::size_t i = 0; i < cfg.grid.size(); ++i)
    if (cfg.grid[i] > p)
      throw ConfigError("model size k = " + std::to_string(cfg.grid[i]) + " exceeds p = " +
                            std::to_string(p),
                        "/grid/" + std::to_string(i));
  const std::vector<ModelCandidate> candidates = model_candidates(cfg);

  const auto outcomes = run_trials(cfg, opts, [&](std::int64_t g, std::int64_t t) {
    const Seed ts = derive(cfg.master_seed, "model", static_cast<std::uint64_t>(g),
                           static_cast<std::uint64_t>(t));
    return model_trial(cfg, candidates, cfg.grid[static_cast<std::size_t>(g)], ts);
  });

  RiskCurve curve{SweepKind::Model, cfg.fixed.sigma2, {}};
  std::vector<SampleStats> stats;
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const std::size_t best = best_candidate(candidates.size(), cfg.trials, [&](std::size_t c, std::int64_t t) {
      return outcomes[g * trials + static_cast<std::size_t>(t)].excess[c];
    }, stats);
    std::vector<double> theory(trials);
    for (std::size_t t = 0; t < trials; ++t) theory[t] = outcomes[g * trials + t].theory[best];
    RiskPoint pt;
    pt.axis = cfg.grid[g];
    pt.n = n;
    pt.p = p;
    pt.k = cfg.grid[g];
    pt.gamma = candidates[best].gamma;
    pt.trials = cfg.trials;
    pt.emp_excess_mean = stats[best].mean;
    pt.emp_excess_se = stats[best].se;
    pt.emp_total_mean = stats[best].mean + cfg.fixed.sigma2;
    set_theory(pt, mean_if_finite(theory), cfg.fixed.sigma2);
    curve.points.push_back(pt);
  }
  return curve;
}

RiskCurve run_feature_sweep(const SweepConfig& cfg, const RunOptions& opts) {
  check_common(cfg, SweepKind::Features);
  check_policy_values(cfg.gamma_policy);
  const FeatureSweepOptions& f = cfg.features;
  const bool by_n = f.axis == FeatureAxis::SampleSize;
  if (by_n && f.features < 1) throw ConfigError("D must be >= 1", "/D");
  if (!by_n && cfg.fixed.n < 1) throw ConfigError("n must be >= 1", "/n");
  if (!f.uses_idx() && f.input_dim < 1) throw ConfigError("d must be >= 1", "/d");
  if (!f.uses_idx() && f.test_size < 1) throw ConfigError("test_size must be >= 1", "/test_size");
  const std::vector<FeatureCandidate> candidates = feature_candidates(cfg);
  const FeatureData data = load_feature_data(cfg);

  const auto outcomes = run_trials(cfg, opts, [&](std::int64_t g, std::int64_t t) {
    const Eigen::Index axis = cfg.grid[static_cast<std::size_t>(g)];
    const Eigen::Index n = by_n ? axis : cfg.fixed.n;
    const Eigen::Index D = by_n ? f.features : axis;
    const Seed ts = derive(cfg.master_seed, "features", static_cast<std::uint64_t>(g),
                           static_cast<std::uint64_t>(t));
    return feature_trial(cfg, data, candidates, n, D, ts);
  });

  RiskCurve curve{SweepKind::Features, cfg.fixed.sigma2, {}};
  std::vector<SampleStats> stats;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const std::size_t best = best_candidate(candidates.size(), cfg.trials, [&](std::size_t c, std::int64_t t) {
      return outcomes[g * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)][c];
    }, stats);
    RiskPoint pt;
    pt.axis = cfg.grid[g];
    pt.n = by_n ? cfg.grid[g] : cfg.fixed.n;
    pt.p = by_n ? f.features : cfg.grid[g];
    pt.k = pt.p;
    pt.gamma = candidates[best].gamma;
    pt.trials = cfg.trials;
    pt.emp_excess_mean = stats[best].mean;
    pt.emp_excess_se = stats[best].se;
    pt.emp_total_mean = stats[best].mean + cfg.fixed.sigma2;
    curve.points.push_back(pt);
  }
  return curve;
}

std::vector<SpectrumRow> run_spectrum_trace(const SweepConfig& cfg, const RunOptions& opts) {
  check_common(cfg, SweepKind::Spectrum);
  const Eigen::Index p = cfg.fixed.p;
  if (p < 1) throw ConfigError("p must be >= 1", "/p");
  const auto values = run_trials(cfg, opts, [&](std::int64_t g, std::int64_t t) {
    Engine engine(derive(cfg.master_seed, "spectrum", static_cast<std::uint64_t>(g),
                         static_cast<std::uint64_t>(t)));
    const Matrix x = gaussian_matrix(cfg.grid[static_cast<std::size_t>(g)], p, engine);
    return largest_correlation_eigenvalue(x);
  });
  std::vector<SpectrumRow> rows;
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const std::vector<double> v(values.begin() + static_cast<std::ptrdiff_t>(g * trials),
                                values.begin() + static_cast<std::ptrdiff_t>((g + 1) * trials));
    const SampleStats s = sample_stats(v);
    SpectrumRow row;
    row.n = cfg.grid[g];
    row.p = p;
    row.trials = cfg.trials;
    row.empirical_largest = s.mean;
    row.empirical_se = s.se;
    row.mp_prediction = mp_edges(row.n, p).upper;
    rows.push_back(row);
  }
  return rows;
}

RiskCurve run_sweep(const SweepConfig& cfg, const RunOptions& opts) {
  switch (cfg.kind) {
    case SweepKind::Samples: return run_sample_sweep(cfg, opts);
    case SweepKind::Model: return run_model_sweep(cfg, opts);
    case SweepKind::Features: return run_feature_sweep(cfg, opts);
    case SweepKind::Spectrum: break;
  }
  RiskCurve curve{SweepKind::Spectrum, 0.0, {}};
  for (const SpectrumRow& row : run_spectrum_trace(cfg, opts)) {
    RiskPoint pt;
    pt.axis = row.n;
    pt.n = row.n;
    pt.p = row.p;
    pt.k = row.p;
    pt.trials = row.trials;
    pt.emp_excess_mean = row.empirical_largest;
    pt.emp_excess_se = row.empirical_se;
    pt.emp_total_mean = row.empirical_largest;
    pt.theory_excess = row.mp_prediction;
    pt.theory_total = row.mp_prediction;
    curve.points.push_back(pt);
  }
  return curve;
}

MonotonicityReport monotonicity_report(const RiskCurve& curve, double se_multiplier) {
  const auto& pts = curve.points;
  if (pts.size() < 3) throw InputError("monotonicity_report: need at least 3 points");
  auto pooled = [](const RiskPoint& a, const RiskPoint& b) {
    return std::sqrt(a.emp_excess_se * a.emp_excess_se + b.emp_excess_se * b.emp_excess_se);
  };
  MonotonicityReport r;
  r.max_violation = -INFINITY;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double rise = pts[i].emp_excess_mean - pts[i - 1].emp_excess_mean;
    r.max_violation = std::max(r.max_violation, rise);
    if (rise > se_multiplier * pooled(pts[i - 1], pts[i])) r.is_monotone = false;
  }
  const RiskPoint& first = pts.front();
  const RiskPoint& last = pts.back();
  const double end_max = std::max(first.emp_excess_mean, last.emp_excess_mean);
  double top = -INFINITY;
  std::optional<std::size_t> peak;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const RiskPoint& pt = pts[i];
    top = std::max(top, pt.emp_excess_mean);
    const bool above_first =
        pt.emp_excess_mean - first.emp_excess_mean > se_multiplier * pooled(pt, first);
    const bool above_last =
        pt.emp_excess_mean - last.emp_excess_mean > se_multiplier * pooled(pt, last);
    if (above_first && above_last && (!peak || pt.emp_excess_mean > pts[*peak].emp_excess_mean))
      peak = i;
  }
  if (peak) {
    r.peak_axis = pts[*peak].axis;
    r.peak_excess_over_endpoints = pts[*peak].emp_excess_mean - end_max;
  } else {
    r.peak_excess_over_endpoints = top - end_max;
  }
  return r;
}

}  // namespace ddlab
