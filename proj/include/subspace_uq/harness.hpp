#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subspace_uq/inference.hpp"
#include "subspace_uq/model.hpp"

namespace subspace_uq {

enum class ExperimentKind {
  kBiasApprox,
  kCltHistogram,
  kCoverage,
  kSeriesCheck,
  kMomentCheck,
};

// One Monte-Carlo study. Replicate i draws its noise from substream
// (seed, stream = i); the model orientation comes from the reserved
// orientation stream of the same seed, so a config fully determines every
// byte of the output.
struct ExperimentConfig {
  Dims dims;
  double lambda_base = 0.0;           // lambda_i = 2^(r-i) * lambda_base
  std::vector<double> lambda_grid;    // bias-approx tables iterate this
  int replicates = 1;
  std::uint64_t seed = 0;
  LambdaKind estimator = LambdaKind::kTrue;
  std::vector<int> bias_orders = {1};
  bool include_infinity = false;
  ExperimentKind kind = ExperimentKind::kCltHistogram;
  std::vector<double> alphas;         // coverage experiments
  BiasOrder coverage_order = BiasOrder::infinity();
  int workers = 0;                    // 0 = library default
};

// Streaming first/second moments with an order-independent merge
// (Chan et al. pairwise update). Replicates are always merged in index
// order, so summaries do not depend on the execution schedule.
class MomentAccumulator {
 public:
  void add(double x);
  void merge(const MomentAccumulator& other);
  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double standard_error() const;

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Fixed-bin histogram on [-5, 5) with width 0.1; mass outside the range is
// counted separately so normalized mass always sums to one.
class Histogram {
 public:
  static constexpr double kLeft = -5.0;
  static constexpr double kRight = 5.0;
  static constexpr int kBins = 100;
  static constexpr double kWidth = 0.1;

  Histogram() : counts_(kBins, 0) {}

  void add(double x);
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t below() const { return below_; }
  std::int64_t above() const { return above_; }
  std::int64_t total() const;
  double density(int bin) const;
  static double bin_left(int bin) { return kLeft + kWidth * bin; }

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t below_ = 0;
  std::int64_t above_ = 0;
};

// Aggregated results for one bias order within a CLT experiment.
struct OrderSummary {
  std::string order_label;  // "1".."K" or "inf"
  MomentAccumulator stat;
  Histogram hist;
  double ks = 0.0;
  std::vector<double> samples;  // statistic values in replicate order
};

// Order-independent aggregate of an experiment.
struct ReplicateSummary {
  int replicates = 0;
  int svd_failures = 0;
  int shrink_failures = 0;
  MomentAccumulator dist2;
  std::vector<double> dist2_samples;      // replicate order
  std::vector<OrderSummary> orders;       // clt experiments
  std::vector<std::int64_t> coverage_counts;  // aligned with config.alphas
};

// Runs the replicate loop of a bias-approx / clt-histogram / coverage
// experiment. Parallel over replicates; the aggregate is a serial fold in
// replicate-index order and is bitwise identical for any worker count.
// Replicates whose SVD fails are skipped and counted; more than 1% failures
// aborts with ExperimentError.
ReplicateSummary run_experiment(const ExperimentConfig& config);

// Straight-loop reference implementation; must produce bitwise identical
// summaries. Kept for testing and benchmarking the parallel path.
ReplicateSummary run_experiment_serial(const ExperimentConfig& config);

// Two-sided Kolmogorov-Smirnov distance between the sample and the standard
// normal CDF.
double ks_distance(std::vector<double> samples);

struct BiasTableRow {
  double lambda = 0.0;
  std::string order;  // "1".."K" or "inf"
  double bias = 0.0;
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double signed_err = 0.0;  // bias - mc_mean
};

// One row per (lambda, order) over config.lambda_grid, orders
// config.bias_orders plus "inf". Uses the true-lambda ladder; the MC column
// is the mean of dist^2 over replicates.
std::vector<BiasTableRow> bias_table(const ExperimentConfig& config);

struct CoverageRow {
  double alpha = 0.0;
  double coverage = 0.0;
  double se = 0.0;  // sqrt(p (1-p) / n)
  int replicates = 0;
};

std::vector<CoverageRow> coverage_table(const ExperimentConfig& config);

}  // namespace subspace_uq
