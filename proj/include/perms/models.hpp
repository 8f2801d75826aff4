#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perms/design.hpp"
#include "perms/estimators.hpp"
#include "perms/rng.hpp"

namespace perms {

// ---- toy problem ----

struct ToyProblem {
  BinaryDesign design;
  double exact_log_ml;
};

ToyProblem toy_problem(int n);
RealMatrix uniform_latents(std::size_t S, std::size_t n, std::uint64_t seed);

// ---- logistic regression ----

struct LogisticRegressionModel {
  Eigen::MatrixXd Z;  // n x p, intercept column last

  int n() const { return static_cast<int>(Z.rows()); }
  int p() const { return static_cast<int>(Z.cols()); }
  void validate() const;
};

struct IrisData {
  LogisticRegressionModel model;
  std::vector<int> y;  // setosa indicator
};

// Reads the 150-row iris CSV (4 numeric columns then species), standardizes
// the features and appends an intercept.
IrisData load_iris(const std::filesystem::path& csv);

struct LogisticBatch {
  RealMatrix thresholds;
  RealMatrix latents;
};

LogisticBatch logistic_batch(const LogisticRegressionModel& model, std::size_t S, std::uint64_t seed);

double logistic_loglik(const Eigen::VectorXd& theta, const LogisticRegressionModel& model, std::span<const int> y);
Eigen::VectorXd logistic_loglik_grad(const Eigen::VectorXd& theta, const LogisticRegressionModel& model,
                                     std::span<const int> y);

// Log likelihoods at S' prior draws.
std::vector<double> prior_logliks(const LogisticRegressionModel& model, std::span<const int> y, std::size_t S,
                                  std::uint64_t seed);
double naive_ml(std::span<const double> prior_ll);
double naive_ml(const LogisticRegressionModel& model, std::span<const int> y, std::size_t S, std::uint64_t seed);

// Geometric bridge between prior and posterior draws.
double bridge_ml(std::span<const double> prior_ll, std::span<const double> posterior_ll);

struct MhResult {
  Eigen::MatrixXd chain;  // kept draws (after burn-in), one per row
  std::vector<double> logliks;
  double acceptance_rate = 0.0;
  std::vector<double> ess;
};

inline constexpr double kMhProposalScale = 0.7;
inline constexpr double kMhBurnIn = 0.1;

MhResult mh_sample(const LogisticRegressionModel& model, std::span<const int> y, std::size_t chain_length,
                   std::uint64_t seed, double proposal_scale = kMhProposalScale);

// Effective sample size from the initial positive sequence of autocorrelations.
double effective_sample_size(std::span<const double> x);

// ---- Dirichlet process ----

struct DPParams {
  double alpha = 1.0;  // base measure is N(0, 1)
};

RealMatrix dp_urn_batch(const DPParams& params, std::size_t S, std::size_t n, std::uint64_t seed);

struct StickBreakingParams {
  DPParams dp;
  int K = 1000;
  double tail_tolerance = 1e-15;
};

struct StickDraw {
  std::vector<double> weights;
  std::vector<double> atoms;
  double tail_mass = 0.0;
};

StickDraw stick_breaking_draw(const StickBreakingParams& params, Rng& rng);

// log pi(counts | P) for one truncated measure, binomial constants included.
double stick_log_likelihood(const StickDraw& draw, const BioassayTable& tb);

struct StickResult {
  double log_ml = 0.0;
  double max_tail_mass = 0.0;
};

StickResult stick_ml(const StickBreakingParams& params, const BioassayTable& tb, std::size_t S, std::uint64_t seed);

// ---- quantile pyramid ----

struct QuantilePyramidParams {
  double c = 2.5;
  int depth = 12;
  double scale = 4.0;
  double shift = -2.0;
};

// Quantiles at j / 2^depth, j = 0..2^depth, on [0, 1].
std::vector<double> quantile_pyramid(const QuantilePyramidParams& params, Rng& rng);

RealMatrix qp_latent_batch(const QuantilePyramidParams& params, std::size_t S, std::size_t n, std::uint64_t seed);

// ---- changepoint ----

struct ChangepointConfig {
  int n = 200;
  int n1 = 120;
  double mu1 = 0.2, sigma1 = 1.0;
  double mu2 = -0.7, sigma2 = 0.7;
  int gamma = 5;
  double prior_change = 0.5;
  std::size_t S = 2000;

  void validate() const;
};

// Langlie up-and-down inputs on [lower, upper], driven by simulated responses.
std::vector<double> langlie_inputs(const ChangepointConfig& cfg, double lower, double upper, std::uint64_t seed);

std::vector<double> load_langlie_inputs(const std::filesystem::path& csv);
void save_langlie_inputs(const std::filesystem::path& csv, std::span<const double> t);

BinaryDesign changepoint_data(const ChangepointConfig& cfg, std::span<const double> t, std::uint64_t seed);
BinaryDesign changepoint_data(const ChangepointConfig& cfg, const std::filesystem::path& fixture, std::uint64_t seed);

// ---- bioassay ----

BioassayTable gen_bioassay_counts(std::uint64_t seed);
BioassayTable load_bioassay_table(const std::filesystem::path& csv);

}  // namespace perms
