#pragma once

// Seeded Monte Carlo sweeps over sample size, model size, random-feature
// count and correlation spectra.
//
// Trial t at grid index g draws everything from
//   derive(master_seed, <kind tag>, g, t)
// with kind tags "samples", "model", "features", "spectrum". Trials run as
// independent work items and are reduced per grid point in trial order with
// pairwise summation, so the output does not depend on the thread count.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddlab/risk_theory.hpp"
#include "ddlab/rng.hpp"

namespace ddlab {

enum class SweepKind { Samples, Model, Features, Spectrum };
enum class ReportKind { Excess, Total, Both };
enum class EstimatorKind { Ols, Ridge, DropoutScalar, DropoutDiagonal, DropoutSpectral };
enum class FeatureAxis { SampleSize, FeatureCount };
enum class FeatureTarget { LinearInput, LinearFeatures };

std::string sweep_kind_name(SweepKind k);
std::string estimator_kind_name(EstimatorKind k);

struct GammaPolicy {
  enum class Kind { Fixed, OptimalPerPoint, Sweep };
  Kind kind = Kind::OptimalPerPoint;
  std::vector<double> values;  // one entry for Fixed, the candidates for Sweep

  static GammaPolicy fixed(double gamma) { return {Kind::Fixed, {gamma}}; }
  static GammaPolicy optimal() { return {Kind::OptimalPerPoint, {}}; }
  static GammaPolicy sweep(std::vector<double> gammas) { return {Kind::Sweep, std::move(gammas)}; }
};

struct FeatureSweepOptions {
  FeatureAxis axis = FeatureAxis::SampleSize;
  FeatureTarget target = FeatureTarget::LinearInput;
  Eigen::Index input_dim = 20;   // d
  Eigen::Index features = 100;   // D when the axis is the sample size
  Eigen::Index test_size = 1000;
  // IDX files; when set they replace the synthetic inputs and targets.
  std::string train_images, train_labels, test_images, test_labels;

  bool uses_idx() const { return !train_images.empty(); }
};

struct SweepConfig {
  SweepKind kind = SweepKind::Samples;
  std::vector<std::int64_t> grid;
  ProblemScalars fixed;
  EstimatorKind estimator = EstimatorKind::DropoutSpectral;
  double lambda = 0.0;  // ridge penalty for a fixed policy
  GammaPolicy gamma_policy;
  std::int64_t trials = 1000;
  Seed master_seed = 0;
  ReportKind report = ReportKind::Both;
  FeatureSweepOptions features;
};

struct RiskPoint {
  std::int64_t axis = 0;
  Eigen::Index n = 0, p = 0, k = 0;
  std::optional<double> gamma;
  std::int64_t trials = 0;
  double emp_excess_mean = 0.0;
  double emp_excess_se = 0.0;
  double emp_total_mean = 0.0;
  std::optional<double> theory_excess;
  std::optional<double> theory_total;
};

struct RiskCurve {
  SweepKind kind = SweepKind::Samples;
  double sigma2 = 0.0;
  std::vector<RiskPoint> points;
};

struct RunOptions {
  int threads = 1;  // <= 1 runs the serial reference path
};

RiskCurve run_sample_sweep(const SweepConfig& cfg, const RunOptions& opts = {});
RiskCurve run_model_sweep(const SweepConfig& cfg, const RunOptions& opts = {});
RiskCurve run_feature_sweep(const SweepConfig& cfg, const RunOptions& opts = {});

struct SpectrumRow {
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  std::int64_t trials = 0;
  double empirical_largest = 0.0;
  double empirical_se = 0.0;
  double mp_prediction = 0.0;
};

std::vector<SpectrumRow> run_spectrum_trace(const SweepConfig& cfg, const RunOptions& opts = {});

/// Dispatches on cfg.kind. Spectrum rows are mapped onto RiskPoint with the
/// largest eigenvalue as the empirical value and the edge as theory.
RiskCurve run_sweep(const SweepConfig& cfg, const RunOptions& opts = {});

struct MonotonicityReport {
  bool is_monotone = true;
  double max_violation = 0.0;  // max over adjacent pairs of next - prev excess
  std::optional<std::int64_t> peak_axis;
  double peak_excess_over_endpoints = 0.0;
};

/// A rise between adjacent points counts as a violation only when it exceeds
/// se_multiplier * sqrt(se_a^2 + se_b^2). A peak is the highest interior point
/// that exceeds both endpoints by the same pooled margin.
MonotonicityReport monotonicity_report(const RiskCurve& curve, double se_multiplier = 2.0);

struct SampleStats {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean and standard error (sample sd / sqrt(count)) with pairwise sums.
SampleStats sample_stats(const std::vector<double>& v);

}  // namespace ddlab
