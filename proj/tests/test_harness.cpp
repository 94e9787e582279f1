#include <doctest.h>

#include <cmath>

#include "subspace_uq/bias.hpp"
#include "subspace_uq/harness.hpp"

using namespace subspace_uq;

namespace {

bool summaries_identical(const ReplicateSummary& a, const ReplicateSummary& b) {
  if (a.replicates != b.replicates || a.svd_failures != b.svd_failures ||
      a.shrink_failures != b.shrink_failures)
    return false;
  if (a.dist2_samples != b.dist2_samples) return false;
  if (a.dist2.mean() != b.dist2.mean() || a.dist2.variance() != b.dist2.variance())
    return false;
  if (a.orders.size() != b.orders.size()) return false;
  for (std::size_t i = 0; i < a.orders.size(); ++i) {
    if (a.orders[i].samples != b.orders[i].samples) return false;
    if (a.orders[i].ks != b.orders[i].ks) return false;
    if (a.orders[i].hist.counts() != b.orders[i].hist.counts()) return false;
  }
  return a.coverage_counts == b.coverage_counts;
}

ExperimentConfig small_clt_config() {
  ExperimentConfig config;
  config.dims = Dims(30, 25, 2);
  config.lambda_base = 20.0;
  config.replicates = 60;
  config.seed = 77;
  config.kind = ExperimentKind::kCltHistogram;
  config.estimator = LambdaKind::kTrue;
  config.bias_orders = {1, 2};
  config.include_infinity = true;
  return config;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("ks distance") {
  SUBCASE("point mass at zero") {
    CHECK(ks_distance({0.0, 0.0, 0.0}) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("standard normal sample is close") {
    const Dims dims(100000, 1, 1);
    const Matrix z = sample_noise(dims, {5, 0, 1.0});
    std::vector<double> samples(z.data(), z.data() + z.size());
    CHECK(ks_distance(samples) < 0.01);
  }
  SUBCASE("unit shift attains 2 Phi(1/2) - 1") {
    const Dims dims(100000, 1, 1);
    const Matrix z = sample_noise(dims, {6, 0, 1.0});
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(z.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) samples.push_back(z(i) + 1.0);
    // sup_x | Phi(x - 1) - Phi(x) | is attained at x = 1/2 and equals
    // 2 Phi(1/2) - 1.
    const double analytic = 0.3829249225480262;
    CHECK(ks_distance(samples) == doctest::Approx(analytic).epsilon(0.04));
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(ks_distance({}), std::invalid_argument);
  }
}

TEST_CASE("moment accumulator matches a two-pass computation") {
  const Dims dims(500, 1, 1);
  const Matrix z = sample_noise(dims, {8, 0, 3.0});
  MomentAccumulator acc;
  for (Eigen::Index i = 0; i < z.size(); ++i) acc.add(z(i));

  const double mean = z.sum() / double(z.size());
  double ss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    ss += (z(i) - mean) * (z(i) - mean);
  const double var = ss / double(z.size() - 1);

  CHECK(acc.mean() == doctest::Approx(mean).epsilon(1e-10));
  CHECK(acc.variance() == doctest::Approx(var).epsilon(1e-10));

  SUBCASE("chunked merge agrees with the single pass") {
    MomentAccumulator left, right;
    for (Eigen::Index i = 0; i < z.size() / 2; ++i) left.add(z(i));
    for (Eigen::Index i = z.size() / 2; i < z.size(); ++i) right.add(z(i));
    left.merge(right);
    CHECK(left.count() == acc.count());
    CHECK(left.mean() == doctest::Approx(acc.mean()).epsilon(1e-12));
    CHECK(left.variance() == doctest::Approx(acc.variance()).epsilon(1e-10));
  }
}

TEST_CASE("histogram mass accounting") {
  Histogram h;
  h.add(-7.0);
  h.add(9.0);
  h.add(0.05);
  h.add(-4.999);
  h.add(4.999);
  CHECK(h.below() == 1);
  CHECK(h.above() == 1);
  CHECK(h.total() == 5);
  double mass = (double(h.below()) + double(h.above())) / double(h.total());
  for (int b = 0; b < Histogram::kBins; ++b)
    mass += h.density(b) * Histogram::kWidth;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("experiments are deterministic and schedule-independent") {
  const ExperimentConfig config = small_clt_config();

  ExperimentConfig one_worker = config;
  one_worker.workers = 1;
  ExperimentConfig many_workers = config;
  many_workers.workers = 4;

  const ReplicateSummary serial = run_experiment_serial(config);
  const ReplicateSummary w1 = run_experiment(one_worker);
  const ReplicateSummary w4 = run_experiment(many_workers);
  const ReplicateSummary w4_again = run_experiment(many_workers);

  CHECK(summaries_identical(serial, w1));
  CHECK(summaries_identical(serial, w4));
  CHECK(summaries_identical(w4, w4_again));
}

TEST_CASE("single replicate runs and reruns identically") {
  ExperimentConfig config = small_clt_config();
  config.replicates = 1;
  const ReplicateSummary a = run_experiment(config);
  const ReplicateSummary b = run_experiment(config);
  CHECK(summaries_identical(a, b));
  CHECK(a.dist2_samples.size() == 1);
}

TEST_CASE("streaming moments match a two-pass recomputation over replicates") {
  const ReplicateSummary summary = run_experiment(small_clt_config());
  double mean = 0.0;
  for (double x : summary.dist2_samples) mean += x;
  mean /= double(summary.dist2_samples.size());
  double ss = 0.0;
  for (double x : summary.dist2_samples) ss += (x - mean) * (x - mean);
  const double var = ss / double(summary.dist2_samples.size() - 1);
  CHECK(summary.dist2.mean() == doctest::Approx(mean).epsilon(1e-10));
  CHECK(summary.dist2.variance() == doctest::Approx(var).epsilon(1e-10));
}

TEST_CASE("first-order bias tracks the MC mean in the square case") {
  // d1 = d2 keeps every order equal to B_1; the MC mean must sit within the
  // Monte-Carlo window plus the higher-order remainder allowance.
  ExperimentConfig config;
  config.dims = Dims(100, 100, 6);
  config.lambda_base = 35.0;
  config.replicates = 500;
  config.seed = 31;
  config.kind = ExperimentKind::kBiasApprox;
  const ReplicateSummary summary = run_experiment(config);

  const Vector lam = geometric_lambda(6, 35.0);
  const double b1 = bias_k(config.dims, lam, 1);
  const double remainder_scale =
      36.0 * 100.0 / std::pow(35.0, 4.0);  // r^2 d_max / lambda_r^4
  CHECK(std::abs(summary.dist2.mean() - b1) <=
        4.0 * summary.dist2.standard_error() + 2.0 * remainder_scale);
}

TEST_CASE("bias table rows") {
  ExperimentConfig config;
  config.dims = Dims(40, 80, 2);
  config.kind = ExperimentKind::kBiasApprox;
  config.lambda_grid = {40.0, 45.0};
  config.bias_orders = {1, 2};
  config.replicates = 50;
  config.seed = 9;
  const auto rows = bias_table(config);
  REQUIRE(rows.size() == 6);  // 2 lambdas x (2 orders + inf)
  CHECK(rows[0].order == "1");
  CHECK(rows[1].order == "2");
  CHECK(rows[2].order == "inf");
  CHECK(rows[0].lambda == 40.0);
  CHECK(rows[3].lambda == 45.0);
  for (const auto& row : rows) {
    CHECK(row.signed_err == row.bias - row.mc_mean);
    CHECK(row.mc_se > 0.0);
  }
  // Same MC mean within a lambda block.
  CHECK(rows[0].mc_mean == rows[1].mc_mean);
  CHECK(rows[0].mc_mean == rows[2].mc_mean);
}

TEST_CASE("coverage experiment basics") {
  ExperimentConfig config;
  config.dims = Dims(50, 50, 2);
  config.lambda_base = 60.0;
  config.replicates = 200;
  config.seed = 13;
  config.kind = ExperimentKind::kCoverage;
  config.alphas = {0.05, 0.5, 0.999};
  config.coverage_order = BiasOrder::infinity();

  const auto rows = coverage_table(config);
  REQUIRE(rows.size() == 3);
  // Nested regions: coverage is non-increasing in alpha.
  CHECK(rows[0].coverage >= rows[1].coverage);
  CHECK(rows[1].coverage >= rows[2].coverage);
  // alpha -> 1 shrinks the radius to zero.
  CHECK(rows[2].coverage < 0.1);
  for (const auto& row : rows) {
    CHECK(row.replicates == 200);
    CHECK(row.se == doctest::Approx(std::sqrt(row.coverage *
                                              (1.0 - row.coverage) / 200.0)));
  }

  SUBCASE("reps = 1 gives a 0/1 coverage") {
    ExperimentConfig single = config;
    single.replicates = 1;
    single.alphas = {0.05};
    const auto row = coverage_table(single).at(0);
    CHECK((row.coverage == 0.0 || row.coverage == 1.0));
  }
}

TEST_CASE("empirical estimator shifts the statistic to the right") {
  ExperimentConfig config;
  config.dims = Dims(60, 60, 3);
  config.lambda_base = 20.0;
  config.replicates = 400;
  config.seed = 15;
  config.kind = ExperimentKind::kCltHistogram;
  config.estimator = LambdaKind::kEmpirical;
  config.bias_orders = {1};
  const ReplicateSummary summary = run_experiment(config);
  const OrderSummary& os = summary.orders.at(0);
  CHECK(os.stat.mean() > 4.0 * os.stat.standard_error());
}

TEST_CASE("config validation") {
  ExperimentConfig config = small_clt_config();
  config.replicates = 0;
  CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);
}

TEST_SUITE_END();
