#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "perms/estimators.hpp"
#include "perms/models.hpp"

namespace perms {

struct RunOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  bool debug = false;
};

// ---- toy ----

struct ToyRunResult {
  int n = 0;
  double exact_log_ml = 0.0;
  EstimateReport report;
};

ToyRunResult run_toy(int n, std::size_t S, const RunOptions& opts);

// ---- iris ----

struct IrisRunResult {
  EstimateReport perms;
  std::size_t comparator_samples = 0;
  double naive_log_ml = 0.0;
  double bridge_log_ml = 0.0;
  double naive_seconds = 0.0;
  double bridge_seconds = 0.0;
  double mh_acceptance = 0.0;
  std::vector<double> mh_ess;
};

IrisRunResult run_iris(const std::filesystem::path& csv, std::size_t S, const RunOptions& opts);

// ---- bioassay ----

struct BioassayRunResult {
  EstimateReport perms;
  double stick_log_ml = 0.0;
  double stick_max_tail = 0.0;
  double stick_seconds = 0.0;
};

BioassayRunResult run_bioassay(const BioassayTable& tb, std::size_t S, const RunOptions& opts,
                               const StickBreakingParams& stick = {});

// ---- changepoint ----

// seed that generated data/langlie_inputs.csv
inline constexpr std::uint64_t kLanglieFixtureSeed = 1;

struct ChangepointRunResult {
  EstimateReport null_report;
  std::vector<int> taus;
  std::vector<double> log_ml_tau;  // left + right, -inf if either side vanished
  double log_ml_alt = 0.0;
  double log_bayes_factor = 0.0;
  double bayes_factor = 0.0;
  int posterior_mode = 0;
  double wall_time_seconds = 0.0;
};

// Latents from opts.seed. data normally comes from
// changepoint_data(cfg, fixture, opts.seed).
ChangepointRunResult run_changepoint(const ChangepointConfig& cfg, const BinaryDesign& data, const RunOptions& opts,
                                     const QuantilePyramidParams& qp = {});

// ---- scaling bench ----

struct BenchPoint {
  int n = 0;
  std::size_t S = 0;
  std::size_t nonzero = 0;
  double seconds = 0.0;
  double seconds_per_nonzero = 0.0;
  std::size_t max_table = 0;
};

struct BenchFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
  double constant = 0.0;  // slope^2: time ~ constant * n^2
};

struct OracleCheck {
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  double max_abs_error = 0.0;
};

struct BenchResult {
  std::vector<BenchPoint> points;
  BenchFit fit;
  bool oracle_checked = false;
  OracleCheck oracle;
};

std::vector<int> default_bench_grid();
BenchPoint bench_point(int n, std::size_t S, const RunOptions& opts);
BenchFit fit_sqrt_time(const std::vector<BenchPoint>& points);
BenchResult run_bench(const std::vector<int>& grid, std::size_t S, const RunOptions& opts, bool oracle_check);

// Engine versus exact dense counts on random sample-derived matrices of
// size <= n_max, plus the exhaustive small-instance ladder when requested.
OracleCheck oracle_check_samples(int n_max, std::size_t cases, std::uint64_t seed);
OracleCheck oracle_check_exhaustive(int n_max);

// ---- reports ----

nlohmann::json to_json(const ToyRunResult& r);
nlohmann::json to_json(const IrisRunResult& r);
nlohmann::json to_json(const BioassayRunResult& r);
nlohmann::json to_json(const ChangepointRunResult& r);
nlohmann::json to_json(const BenchResult& r);
nlohmann::json to_json(const OracleCheck& r);

}  // namespace perms
