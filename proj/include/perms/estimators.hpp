#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "perms/design.hpp"
#include "perms/permanent.hpp"

namespace perms {

// Row-major S x n matrix of doubles.
struct RealMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  RealMatrix() = default;
  RealMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Per-sample log permutation numbers; nullopt marks a vanishing one.
struct LogWeights {
  std::vector<std::optional<double>> entries;
  int n = 0;

  std::size_t size() const { return entries.size(); }
  std::size_t num_nonzero() const;
  std::vector<double> finite_values() const;
  // NaN for absent entries
  std::vector<double> as_nan_array() const;
  static LogWeights from_nan_array(std::span<const double> values, int n);
  void validate() const;
};

struct EstimateReport {
  double log_ml = 0.0;
  std::size_t S = 0;
  std::size_t num_nonzero = 0;
  double proportion_nonzero = 0.0;
  double wall_time_seconds = 0.0;
  bool all_absent = false;
};

nlohmann::json to_json(const EstimateReport& r);

EstimateReport log_ml(const LogWeights& lw);

// Adds sum_j log C(trials_j, successes_j) for the expanded bioassay design.
EstimateReport log_ml_bioassay(const LogWeights& lw, const BioassayTable& tb);
double bioassay_log_constant(const BioassayTable& tb);

// sum h_s w_s / sum w_s over the nonzero weights.
double posterior_mean(std::span<const double> h, const LogWeights& lw);

double bayes_factor(double log_ml_alt, double log_ml_null);

struct PipelineOptions {
  int threads = 1;
  bool debug = false;
};

struct PipelineResult {
  LogWeights weights;
  EstimateReport report;
  EngineCounters counters;
};

// One log permutation number per latent row against a fixed design. The
// latent matrix is not modified; output does not depend on opts.threads.
PipelineResult run_pipeline(const RealMatrix& latents, const BinaryDesign& design, const PipelineOptions& opts);

// Same, where row s uses thresholds.row(s) with the shared responses y.
PipelineResult run_pipeline(const RealMatrix& latents, const RealMatrix& thresholds, std::span<const int> y,
                            const PipelineOptions& opts);

// One value per line, "nan" for absent.
void write_log_weights(std::ostream& os, const LogWeights& lw);
LogWeights read_log_weights(std::istream& is, int n);

}  // namespace perms
