#include "subspace_uq/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "subspace_uq/errors.hpp"
#include "subspace_uq/harness.hpp"
#include "subspace_uq/identities.hpp"
#include "subspace_uq/series.hpp"

namespace subspace_uq {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string g12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

// "a:b:step" inclusive grid, or a single value.
std::vector<double> parse_grid(const std::string& text) {
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) return {std::stod(text)};
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw std::invalid_argument("grid must be start:stop:step or a number: " +
                                text);
  const double start = std::stod(text.substr(0, c1));
  const double stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  const double step = std::stod(text.substr(c2 + 1));
  if (!(step > 0.0) || stop < start)
    throw std::invalid_argument("bad grid: " + text);
  std::vector<double> out;
  const int n = static_cast<int>((stop - start) / step + 1e-9);
  for (int i = 0; i <= n; ++i) out.push_back(start + step * i);
  return out;
}

// "1..4" or "2" or "1,3,4".
std::vector<int> parse_orders(const std::string& text) {
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (lo < 1 || hi < lo) throw std::invalid_argument("bad orders: " + text);
    std::vector<int> out;
    for (int k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    out.push_back(std::stoi(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("bad orders: " + text);
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    out.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("bad list: " + text);
  return out;
}

BiasOrder parse_bias_order(const std::string& text, const Dims& dims) {
  if (text == "inf") return BiasOrder::infinity();
  if (text == "log") return BiasOrder::order(default_bias_order(dims));
  const int k = std::stoi(text);
  if (k < 1) throw std::invalid_argument("order must be >= 1, inf, or log");
  return BiasOrder::order(k);
}

// Flat JSON object whose keys are the long flag names; command-line flags
// override file values, which override the environment seed.
class FileConfig {
 public:
  static FileConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    FileConfig cfg;
    in >> cfg.j_;
    if (!cfg.j_.is_object())
      throw std::invalid_argument("config file must hold a JSON object");
    return cfg;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string str(const std::string& key) const {
    const json& v = j_.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return g12(v.get<double>());
    throw std::invalid_argument("config key has unsupported type: " + key);
  }

  template <typename T>
  void fill_number(const CLI::App* cmd, const std::string& flag,
                   const std::string& key, T& target) const {
    if (cmd->count(flag) == 0 && has(key)) target = j_.at(key).get<T>();
  }

  void fill_string(const CLI::App* cmd, const std::string& flag,
                   const std::string& key, std::string& target) const {
    if (cmd->count(flag) == 0 && has(key)) target = str(key);
  }

 private:
  json j_;
};

struct CommonOpts {
  int d1 = 100, d2 = 100, r = 6;
  int reps = 500;
  std::uint64_t seed = 1;
  bool seed_given = false;
  int workers = 0;
  std::string out = ".";
  std::string config_path;
};

void add_common(CLI::App* cmd, CommonOpts& o, int def_d1, int def_d2,
                int def_r, int def_reps) {
  o.d1 = def_d1;
  o.d2 = def_d2;
  o.r = def_r;
  o.reps = def_reps;
  cmd->add_option("--d1", o.d1, "row dimension");
  cmd->add_option("--d2", o.d2, "column dimension");
  cmd->add_option("--r", o.r, "rank");
  cmd->add_option("--reps", o.reps, "Monte-Carlo replicates");
  cmd->add_option("--seed", o.seed,
                  "base seed (SUBSPACE_UQ_SEED is the fallback)");
  cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--config", o.config_path,
                  "JSON config file; flags override file values");
}

// Applies config-file values and the environment seed fallback after parsing.
std::optional<FileConfig> finish_common(const CLI::App* cmd, CommonOpts& o) {
  std::optional<FileConfig> cfg;
  if (!o.config_path.empty()) cfg = FileConfig::load(o.config_path);
  if (cfg) {
    cfg->fill_number(cmd, "--d1", "d1", o.d1);
    cfg->fill_number(cmd, "--d2", "d2", o.d2);
    cfg->fill_number(cmd, "--r", "r", o.r);
    cfg->fill_number(cmd, "--reps", "reps", o.reps);
    cfg->fill_number(cmd, "--workers", "workers", o.workers);
    cfg->fill_string(cmd, "--out", "out", o.out);
  }
  if (cmd->count("--seed") > 0) {
    // flag wins
  } else if (cfg && cfg->has("seed")) {
    o.seed = std::stoull(cfg->str("seed"));
  } else if (const char* env = std::getenv("SUBSPACE_UQ_SEED")) {
    o.seed = std::stoull(env);
  }
  return cfg;
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::invalid_argument("output directory not usable: " + out);
  return dir;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// bias-table

int cmd_bias_table(const CommonOpts& o, const std::string& lambda_text,
                   const std::string& orders_text) {
  const fs::path dir = prepare_out_dir(o.out);
  ExperimentConfig config;
  config.dims = Dims(o.d1, o.d2, o.r);
  config.kind = ExperimentKind::kBiasApprox;
  config.lambda_grid = parse_grid(lambda_text);
  config.bias_orders = parse_orders(orders_text);
  config.replicates = o.reps;
  config.seed = o.seed;
  config.workers = o.workers;

  const std::vector<BiasTableRow> rows = bias_table(config);
  std::string csv = "lambda,order,B,mc_mean,mc_se,signed_err\n";
  for (const auto& row : rows) {
    csv += g12(row.lambda) + "," + row.order + "," + g12(row.bias) + "," +
           g12(row.mc_mean) + "," + g12(row.mc_se) + "," +
           g12(row.signed_err) + "\n";
  }
  write_text_file(dir / "bias_table.csv", csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// clt

int cmd_clt(const CommonOpts& o, double lambda_base,
            const std::string& estimator_text, const std::string& order_text) {
  const fs::path dir = prepare_out_dir(o.out);
  ExperimentConfig config;
  config.dims = Dims(o.d1, o.d2, o.r);
  config.kind = ExperimentKind::kCltHistogram;
  config.lambda_base = lambda_base;
  config.replicates = o.reps;
  config.seed = o.seed;
  config.workers = o.workers;

  if (estimator_text == "true")
    config.estimator = LambdaKind::kTrue;
  else if (estimator_text == "empirical")
    config.estimator = LambdaKind::kEmpirical;
  else if (estimator_text == "shrunk")
    config.estimator = LambdaKind::kShrunk;
  else
    throw std::invalid_argument("estimator must be true, empirical or shrunk");

  const BiasOrder order = parse_bias_order(order_text, config.dims);
  if (order.infinite) {
    config.bias_orders.clear();
    config.include_infinity = true;
  } else {
    config.bias_orders = {order.k};
  }

  const ReplicateSummary summary = run_experiment(config);
  const OrderSummary& os = summary.orders.at(0);

  std::string csv = "bin_left,bin_right,density\n";
  for (int b = 0; b < Histogram::kBins; ++b) {
    csv += g12(Histogram::bin_left(b)) + "," +
           g12(Histogram::bin_left(b) + Histogram::kWidth) + "," +
           g12(os.hist.density(b)) + "\n";
  }
  write_text_file(dir / "clt_hist.csv", csv);

  json summary_json = {
      {"ks", os.ks},
      {"mean", os.stat.mean()},
      {"var", os.stat.variance()},
      {"reps", summary.replicates - summary.svd_failures},
      {"shrink_failures", summary.shrink_failures},
  };
  write_text_file(dir / "clt_summary.json", summary_json.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// series-check

int cmd_series_check(const CommonOpts& o, double lambda_base, int max_order,
                     double snr) {
  const fs::path dir = prepare_out_dir(o.out);
  const Dims dims(o.d1, o.d2, o.r);
  if (dims.total() > 200)
    throw std::invalid_argument(
        "series-check needs d1 + d2 <= 200 (dense oracle)");
  if (max_order < 1 || max_order > kMaxSeriesOrder)
    throw std::invalid_argument("series-check: K out of range");
  if (!(snr > 0.0))
    throw std::invalid_argument("series-check: snr must be positive");

  const LowRankModel model =
      make_model(dims, geometric_lambda(dims.r, lambda_base), o.seed);
  const SymmetricDilation dil = dilate(model);

  Matrix z = sample_noise(dims, NoiseSpec{o.seed, 0, 1.0});
  z *= snr * dil.lambda_min() / spectral_norm(z);
  const double q = 4.0 * snr;

  // Dense oracle: empirical minus true signal projector of the dilation.
  const EmpiricalSVD svd = top_r_svd(observe(model, z), dims.r);
  const int d1 = dims.d1, d2 = dims.d2;
  Matrix delta = Matrix::Zero(d1 + d2, d1 + d2);
  delta.topLeftCorner(d1, d1) =
      svd.U * svd.U.transpose() - model.U * model.U.transpose();
  delta.bottomRightCorner(d2, d2) =
      svd.V * svd.V.transpose() - model.V * model.V.transpose();

  std::string csv = "K,frob_err,tail_bound\n";
  Matrix partial = Matrix::Zero(d1 + d2, d1 + d2);
  bool bound_violated = false;
  for (int k = 1; k <= max_order; ++k) {
    partial += series_term(dil, z, k);
    const double err = (delta - partial).norm();
    const double bound =
        2.0 * dims.r * std::pow(q, k + 1) / (1.0 - q);
    if (err > bound) bound_violated = true;
    csv += std::to_string(k) + "," + g12(err) + "," + g12(bound) + "\n";
  }
  write_text_file(dir / "series_decay.csv", csv);
  if (bound_violated) {
    std::cerr << "series-check: truncation error exceeded the analytic tail "
                 "bound\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// coverage

int cmd_coverage(const CommonOpts& o, double lambda_base,
                 const std::string& alphas_text, const std::string& order_text) {
  const fs::path dir = prepare_out_dir(o.out);
  ExperimentConfig config;
  config.dims = Dims(o.d1, o.d2, o.r);
  config.kind = ExperimentKind::kCoverage;
  config.lambda_base = lambda_base;
  config.replicates = o.reps;
  config.seed = o.seed;
  config.workers = o.workers;
  config.alphas = parse_double_list(alphas_text);
  config.coverage_order = parse_bias_order(order_text, config.dims);
  for (double a : config.alphas)
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("alpha levels must lie in (0,1)");

  const std::vector<CoverageRow> rows = coverage_table(config);
  std::string csv = "alpha,coverage,se,reps\n";
  for (const auto& row : rows)
    csv += g12(row.alpha) + "," + g12(row.coverage) + "," + g12(row.se) + "," +
           std::to_string(row.replicates) + "\n";
  write_text_file(dir / "coverage.csv", csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// selftest

int cmd_selftest(std::uint64_t seed) {
  int failures = 0;

  try {
    identity_checks(25);
    std::cout << "selftest: combinatorial identities (k0 <= 25): ok\n";
  } catch (const std::exception& e) {
    std::cout << "selftest: combinatorial identities FAILED: " << e.what()
              << "\n";
    ++failures;
  }

  {
    // Shrinkage round trip on the noiseless fixed point.
    const Dims dims(100, 60, 1);
    const double dsum = dims.d1 + dims.d2;
    const double dprod = double(dims.d1) * dims.d2;
    double worst = 0.0;
    for (int i = 1; i <= 50; ++i) {
      const double l2 = 2.0 * dims.d_max() * i;
      const double inflated2 = l2 + dsum + dprod / l2;
      Vector hat(1);
      hat(0) = std::sqrt(inflated2);
      const SingularValueEstimate shrunk = shrink_singular_values(dims, hat);
      if (!shrunk.all_valid()) {
        worst = 1.0;
        break;
      }
      const double rel = std::abs(shrunk.values(0) * shrunk.values(0) - l2) / l2;
      worst = std::max(worst, rel);
    }
    if (worst < 1e-9) {
      std::cout << "selftest: shrinkage round-trip grid: ok (max rel err "
                << g12(worst) << ")\n";
    } else {
      std::cout << "selftest: shrinkage round-trip grid FAILED (max rel err "
                << g12(worst) << ")\n";
      ++failures;
    }
  }

  {
    // Wishart Frobenius moment versus Monte Carlo.
    const int reps = 5000, d = 50;
    Vector lambda(3);
    lambda << 3.0, 2.0, 1.0;
    const double closed = wishart_frobenius_moment(lambda, d, 1, 1);
    const Dims zdims(3, d, 1);
    MomentAccumulator acc;
    for (int i = 0; i < reps; ++i) {
      const Matrix z =
          sample_noise(zdims, NoiseSpec{seed, static_cast<std::uint64_t>(i), 1.0});
      const Matrix w = lambda.cwiseInverse().asDiagonal() * (z * z.transpose()) *
                       lambda.cwiseInverse().asDiagonal();
      acc.add(w.squaredNorm());
    }
    const double gap = std::abs(acc.mean() - closed);
    const double tol = 4.0 * acc.standard_error();
    if (gap <= tol) {
      std::cout << "selftest: Wishart Frobenius moment MC: ok (|gap| "
                << g12(gap) << " <= 4*SE " << g12(tol) << ")\n";
    } else {
      std::cout << "selftest: Wishart Frobenius moment MC FAILED (|gap| "
                << g12(gap) << " > 4*SE " << g12(tol) << ")\n";
      ++failures;
    }
  }

  return failures == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Monte-Carlo error quantification for empirical singular "
               "subspaces of noisy low-rank matrices",
               "subspace-uq"};
  app.require_subcommand(1);

  // bias-table
  CommonOpts bt_opts;
  std::string bt_lambda = "30:40:0.5";
  std::string bt_orders = "1..4";
  CLI::App* bt = app.add_subcommand(
      "bias-table", "expected-distance approximations vs Monte-Carlo means");
  add_common(bt, bt_opts, 100, 100, 6, 500);
  bt->add_option("--lambda", bt_lambda, "signal grid start:stop:step");
  bt->add_option("--orders", bt_orders, "approximation orders, e.g. 1..4");

  // clt
  CommonOpts clt_opts;
  std::string clt_lambda = "35";
  std::string clt_estimator = "true";
  std::string clt_order = "1";
  CLI::App* clt = app.add_subcommand(
      "clt", "normalized-statistic histogram and KS distance");
  add_common(clt, clt_opts, 100, 100, 6, 3000);
  clt->add_option("--lambda", clt_lambda, "signal strength");
  clt->add_option("--estimator", clt_estimator, "true | empirical | shrunk");
  clt->add_option("--order", clt_order, "bias order: k, inf, or log");

  // series-check
  CommonOpts sc_opts;
  std::string sc_lambda = "2";
  int sc_k = 8;
  double sc_snr = 0.1;
  CLI::App* sc = app.add_subcommand(
      "series-check", "projector series truncation error vs dense oracle");
  add_common(sc, sc_opts, 20, 20, 3, 1);
  sc->add_option("--lambda", sc_lambda, "signal strength");
  sc->add_option("--K", sc_k, "maximum series order");
  sc->add_option("--snr", sc_snr, "noise scale ||X|| / lambda_r");

  // coverage
  CommonOpts cov_opts;
  std::string cov_lambda = "50";
  std::string cov_alphas = "0.05,0.1";
  std::string cov_order = "log";
  CLI::App* cov = app.add_subcommand(
      "coverage", "empirical confidence-region coverage");
  add_common(cov, cov_opts, 100, 100, 3, 2000);
  cov->add_option("--lambda", cov_lambda, "signal strength");
  cov->add_option("--alphas", cov_alphas, "comma-separated levels");
  cov->add_option("--order", cov_order, "bias order: k, inf, or log");

  // selftest
  CommonOpts st_opts;
  CLI::App* st = app.add_subcommand(
      "selftest", "exact identities, shrinkage round-trip, moment smoke test");
  st->add_option("--seed", st_opts.seed, "Monte-Carlo seed for the smoke test");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (bt->parsed()) {
      const auto cfg = finish_common(bt, bt_opts);
      if (cfg) {
        cfg->fill_string(bt, "--lambda", "lambda", bt_lambda);
        cfg->fill_string(bt, "--orders", "orders", bt_orders);
      }
      return cmd_bias_table(bt_opts, bt_lambda, bt_orders);
    }
    if (clt->parsed()) {
      const auto cfg = finish_common(clt, clt_opts);
      if (cfg) {
        cfg->fill_string(clt, "--lambda", "lambda", clt_lambda);
        cfg->fill_string(clt, "--estimator", "estimator", clt_estimator);
        cfg->fill_string(clt, "--order", "order", clt_order);
      }
      return cmd_clt(clt_opts, std::stod(clt_lambda), clt_estimator, clt_order);
    }
    if (sc->parsed()) {
      const auto cfg = finish_common(sc, sc_opts);
      if (cfg) {
        cfg->fill_string(sc, "--lambda", "lambda", sc_lambda);
        cfg->fill_number(sc, "--K", "K", sc_k);
        cfg->fill_number(sc, "--snr", "snr", sc_snr);
      }
      return cmd_series_check(sc_opts, std::stod(sc_lambda), sc_k, sc_snr);
    }
    if (cov->parsed()) {
      const auto cfg = finish_common(cov, cov_opts);
      if (cfg) {
        cfg->fill_string(cov, "--lambda", "lambda", cov_lambda);
        cfg->fill_string(cov, "--alphas", "alphas", cov_alphas);
        cfg->fill_string(cov, "--order", "order", cov_order);
      }
      return cmd_coverage(cov_opts, std::stod(cov_lambda), cov_alphas,
                          cov_order);
    }
    if (st->parsed()) {
      if (st->count("--seed") == 0) {
        if (const char* env = std::getenv("SUBSPACE_UQ_SEED"))
          st_opts.seed = std::stoull(env);
      }
      return cmd_selftest(st_opts.seed);
    }
  } catch (const SnrGateError& e) {
    std::cerr << "error: " << e.what() << " (||X|| = " << g12(e.noise_norm())
              << ", lambda_r = " << g12(e.lambda_r()) << ")\n";
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "usage error: bad config file: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace subspace_uq
