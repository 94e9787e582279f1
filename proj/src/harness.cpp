#include "subspace_uq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "subspace_uq/errors.hpp"

namespace subspace_uq {

void MomentAccumulator::add(double x) {
  // Welford update.
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / double(n_);
  m2_ += delta * (x - mean_);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double delta = other.mean_ - mean_;
  const std::int64_t n = n_ + other.n_;
  m2_ += other.m2_ + delta * delta * double(n_) * double(other.n_) / double(n);
  mean_ += delta * double(other.n_) / double(n);
  n_ = n;
}

double MomentAccumulator::variance() const {
  return n_ > 1 ? m2_ / double(n_ - 1) : 0.0;
}

double MomentAccumulator::standard_error() const {
  return n_ > 0 ? std::sqrt(variance() / double(n_)) : 0.0;
}

void Histogram::add(double x) {
  if (x < kLeft) {
    ++below_;
  } else if (x >= kRight) {
    ++above_;
  } else {
    int bin = static_cast<int>((x - kLeft) / kWidth);
    bin = std::min(std::max(bin, 0), kBins - 1);
    ++counts_[static_cast<std::size_t>(bin)];
  }
}

std::int64_t Histogram::total() const {
  std::int64_t n = below_ + above_;
  for (std::int64_t c : counts_) n += c;
  return n;
}

double Histogram::density(int bin) const {
  const std::int64_t n = total();
  if (n == 0) return 0.0;
  return double(counts_[static_cast<std::size_t>(bin)]) / (double(n) * kWidth);
}

double ks_distance(std::vector<double> samples) {
  if (samples.empty())
    throw std::invalid_argument("ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = double(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = std_normal_cdf(samples[i]);
    d = std::max(d, (double(i) + 1.0) / n - f);
    d = std::max(d, f - double(i) / n);
  }
  return d;
}

namespace {

struct OrderSpec {
  std::string label;
  BiasOrder order;
};

std::vector<OrderSpec> order_specs(const ExperimentConfig& config) {
  std::vector<OrderSpec> specs;
  for (int k : config.bias_orders)
    specs.push_back({std::to_string(k), BiasOrder::order(k)});
  if (config.include_infinity) specs.push_back({"inf", BiasOrder::infinity()});
  return specs;
}

// The per-replicate results that feed the deterministic fold.
struct PerReplicate {
  bool svd_failed = false;
  bool shrink_invalid = false;
  double dist2 = 0.0;
  std::vector<double> stat_values;   // aligned with order_specs
  std::vector<char> covered;         // aligned with config.alphas
};

PerReplicate run_one(const ExperimentConfig& config, const LowRankModel& model,
                     const std::vector<OrderSpec>& specs, int replicate) try {
  PerReplicate out;
  EmpiricalSVD svd;
  try {
    const Matrix z = sample_noise(
        config.dims,
        NoiseSpec{config.seed, static_cast<std::uint64_t>(replicate), 1.0});
    svd = top_r_svd(observe(model, z), config.dims.r);
  } catch (const NumericalError&) {
    out.svd_failed = true;
    return out;
  }

  out.dist2 = projection_distance2(model.U, model.V, svd.U, svd.V);

  if (config.kind == ExperimentKind::kCltHistogram) {
    SingularValueEstimate lambda;
    switch (config.estimator) {
      case LambdaKind::kTrue:
        lambda = true_lambda(model.lambda);
        break;
      case LambdaKind::kEmpirical:
        lambda = empirical_lambda(svd.lambda);
        break;
      case LambdaKind::kShrunk:
        lambda = shrink_singular_values(config.dims, svd.lambda);
        break;
    }
    out.shrink_invalid = !lambda.all_valid();
    out.stat_values.reserve(specs.size());
    for (const auto& spec : specs)
      out.stat_values.push_back(
          clt_statistic(out.dist2, config.dims, lambda, spec.order).value);
  } else if (config.kind == ExperimentKind::kCoverage) {
    const SingularValueEstimate lambda = true_lambda(model.lambda);
    out.covered.reserve(config.alphas.size());
    for (double alpha : config.alphas) {
      const RegionResult res = confidence_region_contains(
          model.U, model.V, svd.U, svd.V, config.dims, lambda,
          ConfidenceRegionSpec(alpha, config.coverage_order));
      out.covered.push_back(res.contained ? 1 : 0);
    }
  }
  return out;
} catch (const std::exception&) {
  // Exceptions must not escape the parallel region. Degenerate replicates
  // (e.g. a zero empirical singular value) are counted like SVD failures;
  // the > 1% gate in fold() still turns systematic problems into an error.
  PerReplicate failed;
  failed.svd_failed = true;
  return failed;
}

ReplicateSummary fold(const ExperimentConfig& config,
                      const std::vector<OrderSpec>& specs,
                      const std::vector<PerReplicate>& results) {
  ReplicateSummary summary;
  summary.replicates = config.replicates;
  summary.coverage_counts.assign(config.alphas.size(), 0);
  summary.orders.resize(specs.size());
  for (std::size_t j = 0; j < specs.size(); ++j)
    summary.orders[j].order_label = specs[j].label;

  for (const PerReplicate& rep : results) {
    if (rep.svd_failed) {
      ++summary.svd_failures;
      continue;
    }
    if (rep.shrink_invalid) ++summary.shrink_failures;
    summary.dist2.add(rep.dist2);
    summary.dist2_samples.push_back(rep.dist2);
    for (std::size_t j = 0; j < rep.stat_values.size(); ++j) {
      OrderSummary& os = summary.orders[j];
      os.stat.add(rep.stat_values[j]);
      os.hist.add(rep.stat_values[j]);
      os.samples.push_back(rep.stat_values[j]);
    }
    for (std::size_t a = 0; a < rep.covered.size(); ++a)
      summary.coverage_counts[a] += rep.covered[a];
  }
  for (OrderSummary& os : summary.orders)
    if (!os.samples.empty()) os.ks = ks_distance(os.samples);

  if (summary.svd_failures * 100 > summary.replicates)
    throw ExperimentError("more than 1% of replicates failed SVD (" +
                          std::to_string(summary.svd_failures) + " of " +
                          std::to_string(summary.replicates) + ")");
  return summary;
}

void validate_config(const ExperimentConfig& config) {
  if (config.replicates < 1)
    throw std::invalid_argument("ExperimentConfig: replicates must be >= 1");
  if (config.kind == ExperimentKind::kCltHistogram ||
      config.kind == ExperimentKind::kBiasApprox ||
      config.kind == ExperimentKind::kCoverage) {
    if (!(config.lambda_base > 0.0))
      throw std::invalid_argument("ExperimentConfig: lambda_base must be > 0");
  }
}

}  // namespace

ReplicateSummary run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const LowRankModel model =
      make_model(config.dims, geometric_lambda(config.dims.r, config.lambda_base),
                 config.seed);
  const std::vector<OrderSpec> specs = order_specs(config);

  std::vector<PerReplicate> results(
      static_cast<std::size_t>(config.replicates));
#ifdef _OPENMP
  const int workers = config.workers > 0 ? config.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
  for (int i = 0; i < config.replicates; ++i)
    results[static_cast<std::size_t>(i)] = run_one(config, model, specs, i);

  return fold(config, specs, results);
}

ReplicateSummary run_experiment_serial(const ExperimentConfig& config) {
  validate_config(config);
  const LowRankModel model =
      make_model(config.dims, geometric_lambda(config.dims.r, config.lambda_base),
                 config.seed);
  const std::vector<OrderSpec> specs = order_specs(config);

  std::vector<PerReplicate> results(
      static_cast<std::size_t>(config.replicates));
  for (int i = 0; i < config.replicates; ++i)
    results[static_cast<std::size_t>(i)] = run_one(config, model, specs, i);

  return fold(config, specs, results);
}

std::vector<BiasTableRow> bias_table(const ExperimentConfig& config) {
  if (config.kind != ExperimentKind::kBiasApprox)
    throw std::invalid_argument("bias_table: experiment kind must be bias-approx");
  if (config.lambda_grid.empty())
    throw std::invalid_argument("bias_table: empty lambda grid");

  std::vector<BiasTableRow> rows;
  for (double lambda_base : config.lambda_grid) {
    ExperimentConfig sub = config;
    sub.lambda_base = lambda_base;
    sub.kind = ExperimentKind::kBiasApprox;
    const ReplicateSummary summary = run_experiment(sub);
    const Vector lambda = geometric_lambda(config.dims.r, lambda_base);
    const double mc_mean = summary.dist2.mean();
    const double mc_se = summary.dist2.standard_error();
    for (int k : config.bias_orders) {
      const double b = bias_k(config.dims, lambda, k);
      rows.push_back({lambda_base, std::to_string(k), b, mc_mean, mc_se,
                      b - mc_mean});
    }
    const double binf = bias_infinity(config.dims, lambda);
    rows.push_back({lambda_base, "inf", binf, mc_mean, mc_se, binf - mc_mean});
  }
  return rows;
}

std::vector<CoverageRow> coverage_table(const ExperimentConfig& config) {
  if (config.kind != ExperimentKind::kCoverage)
    throw std::invalid_argument("coverage_table: experiment kind must be coverage");
  if (config.alphas.empty())
    throw std::invalid_argument("coverage_table: no alpha levels");

  const ReplicateSummary summary = run_experiment(config);
  const int n = summary.replicates - summary.svd_failures;
  std::vector<CoverageRow> rows;
  for (std::size_t a = 0; a < config.alphas.size(); ++a) {
    const double p = n > 0 ? double(summary.coverage_counts[a]) / double(n) : 0.0;
    const double se = n > 0 ? std::sqrt(p * (1.0 - p) / double(n)) : 0.0;
    rows.push_back({config.alphas[a], p, se, n});
  }
  return rows;
}

}  // namespace subspace_uq
