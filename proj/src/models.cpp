#include "perms/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "csv.hpp"
#include "perms/log_math.hpp"

namespace perms {

namespace {

double log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

ToyProblem toy_problem(int n) {
  if (n < 2 || n % 2 != 0) throw InvalidInput("toy problem needs an even n >= 2");
  ToyProblem tp;
  tp.design.t.resize(n);
  tp.design.y.resize(n);
  double exact = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    tp.design.t[i] = t;
    tp.design.y[i] = i < n / 2 ? 0 : 1;
    exact += i < n / 2 ? std::log1p(-t) : std::log(t);
  }
  tp.exact_log_ml = exact;
  return tp;
}

RealMatrix uniform_latents(std::size_t S, std::size_t n, std::uint64_t seed) {
  RealMatrix x(S, n);
  for (std::size_t s = 0; s < S; ++s) {
    Rng rng = make_rng(seed, kStreamUniform, s);
    for (double& v : x.row(s)) v = std::generate_canonical<double, 53>(rng);
  }
  return x;
}

void LogisticRegressionModel::validate() const {
  if (Z.rows() < 1 || Z.cols() < 1) throw InvalidInput("logistic model needs n >= 1 and p >= 1");
  if (!Z.allFinite()) throw InvalidInput("logistic covariates must be finite");
}

IrisData load_iris(const std::filesystem::path& path) {
  const auto tab = csv::read(path);
  if (tab.header.size() != 5) throw InvalidInput("iris csv: expected 4 feature columns and a species column");
  const auto n = static_cast<Eigen::Index>(tab.rows.size());
  IrisData d;
  d.model.Z.resize(n, 5);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = tab.rows[i];
    for (int j = 0; j < 4; ++j) d.model.Z(i, j) = csv::to_double(row[j], "iris csv row " + std::to_string(i + 2));
    d.y[i] = row[4].find("setosa") != std::string::npos ? 1 : 0;
  }
  for (int j = 0; j < 4; ++j) {
    auto col = d.model.Z.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().mean());
    if (!(sd > 0)) throw InvalidInput("iris csv: constant feature column");
    col = (col.array() - mean) / sd;
  }
  d.model.Z.col(4).setOnes();
  return d;
}

LogisticBatch logistic_batch(const LogisticRegressionModel& model, std::size_t S, std::uint64_t seed) {
  model.validate();
  const auto n = static_cast<std::size_t>(model.n());
  LogisticBatch b{RealMatrix(S, n), RealMatrix(S, n)};
  std::normal_distribution<double> norm;
  Eigen::VectorXd theta(model.p());
  for (std::size_t s = 0; s < S; ++s) {
    Rng rng = make_rng(seed, kStreamLogistic, s);
    for (int k = 0; k < model.p(); ++k) theta[k] = norm(rng);
    const Eigen::VectorXd t = model.Z * theta;
    for (std::size_t i = 0; i < n; ++i) {
      b.thresholds(s, i) = t[static_cast<Eigen::Index>(i)];
      const double u = uniform_open(rng);
      b.latents(s, i) = std::log(u) - std::log1p(-u);
    }
  }
  return b;
}

double logistic_loglik(const Eigen::VectorXd& theta, const LogisticRegressionModel& model, std::span<const int> y) {
  const Eigen::VectorXd z = model.Z * theta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) ll += y[i] ? log_sigmoid(z[i]) : log_sigmoid(-z[i]);
  return ll;
}

Eigen::VectorXd logistic_loglik_grad(const Eigen::VectorXd& theta, const LogisticRegressionModel& model,
                                     std::span<const int> y) {
  const Eigen::VectorXd z = model.Z * theta;
  Eigen::VectorXd r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r[i] = y[i] - sigmoid(z[i]);
  return model.Z.transpose() * r;
}

std::vector<double> prior_logliks(const LogisticRegressionModel& model, std::span<const int> y, std::size_t S,
                                  std::uint64_t seed) {
  std::vector<double> out(S);
  std::normal_distribution<double> norm;
  Eigen::VectorXd theta(model.p());
  for (std::size_t s = 0; s < S; ++s) {
    Rng rng = make_rng(seed, kStreamPrior, s);
    for (int k = 0; k < model.p(); ++k) theta[k] = norm(rng);
    out[s] = logistic_loglik(theta, model, y);
  }
  return out;
}

double naive_ml(std::span<const double> prior_ll) {
  if (prior_ll.empty()) throw InvalidInput("naive_ml: no samples");
  return log_sum_exp(prior_ll) - std::log(static_cast<double>(prior_ll.size()));
}

double naive_ml(const LogisticRegressionModel& model, std::span<const int> y, std::size_t S, std::uint64_t seed) {
  const auto ll = prior_logliks(model, y, S, seed);
  return naive_ml(ll);
}

double bridge_ml(std::span<const double> prior_ll, std::span<const double> posterior_ll) {
  if (prior_ll.empty() || posterior_ll.empty()) throw InvalidInput("bridge_ml: empty sample");
  std::vector<double> a(prior_ll.size()), b(posterior_ll.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.5 * prior_ll[i];
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = -0.5 * posterior_ll[i];
  return log_sum_exp(a) - std::log(static_cast<double>(a.size())) - log_sum_exp(b) +
         std::log(static_cast<double>(b.size()));
}

MhResult mh_sample(const LogisticRegressionModel& model, std::span<const int> y, std::size_t chain_length,
                   std::uint64_t seed, double proposal_scale) {
  model.validate();
  if (chain_length < 2) throw InvalidInput("mh_sample: chain too short");
  const int p = model.p();
  const auto burn = static_cast<std::size_t>(std::floor(kMhBurnIn * static_cast<double>(chain_length)));
  Rng rng = make_rng(seed, kStreamMh);
  std::normal_distribution<double> norm;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  double ll = logistic_loglik(theta, model, y);
  double lp = ll - 0.5 * theta.squaredNorm();
  MhResult res;
  res.chain.resize(static_cast<Eigen::Index>(chain_length - burn), p);
  res.logliks.resize(chain_length - burn);
  std::size_t accepted = 0;
  Eigen::VectorXd prop(p);
  for (std::size_t it = 0; it < chain_length; ++it) {
    for (int k = 0; k < p; ++k) prop[k] = theta[k] + proposal_scale * norm(rng);
    const double ll_prop = logistic_loglik(prop, model, y);
    const double lp_prop = ll_prop - 0.5 * prop.squaredNorm();
    if (std::log(uniform_open(rng)) < lp_prop - lp) {
      theta = prop;
      ll = ll_prop;
      lp = lp_prop;
      ++accepted;
    }
    if (it >= burn) {
      res.chain.row(static_cast<Eigen::Index>(it - burn)) = theta.transpose();
      res.logliks[it - burn] = ll;
    }
  }
  res.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(chain_length);
  res.ess.resize(p);
  std::vector<double> col(chain_length - burn);
  for (int k = 0; k < p; ++k) {
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = res.chain(static_cast<Eigen::Index>(i), k);
    res.ess[k] = effective_sample_size(col);
  }
  return res;
}

double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0)) return static_cast<double>(n);
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
    if (pair <= 0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / std::max(tau, 1e-12);
}

RealMatrix dp_urn_batch(const DPParams& params, std::size_t S, std::size_t n, std::uint64_t seed) {
  if (!(params.alpha > 0)) throw InvalidInput("concentration must be positive");
  RealMatrix x(S, n);
  std::normal_distribution<double> norm;
  for (std::size_t s = 0; s < S; ++s) {
    Rng rng = make_rng(seed, kStreamUrn, s);
    auto row = x.row(s);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = std::generate_canonical<double, 53>(rng) * (params.alpha + static_cast<double>(i));
      if (u < params.alpha) {
        row[i] = norm(rng);
      } else {
        const auto j = std::min(static_cast<std::size_t>(u - params.alpha), i - 1);
        row[i] = row[j];
      }
    }
  }
  return x;
}

StickDraw stick_breaking_draw(const StickBreakingParams& params, Rng& rng) {
  if (params.K < 1) throw InvalidInput("truncation K must be at least 1");
  std::normal_distribution<double> norm;
  StickDraw d;
  d.weights.resize(params.K);
  d.atoms.resize(params.K);
  // 1 - B ~ Beta(alpha, 1), i.e. U^(1/alpha)
  double log_rest = 0.0;
  for (int i = 0; i < params.K; ++i) {
    const double log_keep = std::log(uniform_open(rng)) / params.dp.alpha;
    d.weights[i] = -std::expm1(log_keep) * std::exp(log_rest);
    log_rest += log_keep;
    d.atoms[i] = norm(rng);
  }
  d.tail_mass = std::exp(log_rest);
  return d;
}

double stick_log_likelihood(const StickDraw& draw, const BioassayTable& tb) {
  const std::size_t K = draw.atoms.size();
  std::vector<std::size_t> idx(K);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return draw.atoms[a] < draw.atoms[b]; });
  std::vector<double> atoms(K), below(K + 1, kNegInf), above(K + 1, kNegInf);
  for (std::size_t i = 0; i < K; ++i) atoms[i] = draw.atoms[idx[i]];
  for (std::size_t i = 0; i < K; ++i) below[i + 1] = log_add_exp(below[i], std::log(draw.weights[idx[i]]));
  for (std::size_t i = K; i-- > 0;) above[i] = log_add_exp(above[i + 1], std::log(draw.weights[idx[i]]));
  double ll = bioassay_log_constant(tb);
  for (std::size_t j = 0; j < tb.num_levels(); ++j) {
    const auto cut = static_cast<std::size_t>(std::upper_bound(atoms.begin(), atoms.end(), tb.level[j]) - atoms.begin());
    const int succ = tb.successes[j];
    const int fail = tb.trials[j] - succ;
    if (succ > 0) ll += succ * below[cut];
    if (fail > 0) ll += fail * above[cut];
  }
  return std::isnan(ll) ? kNegInf : ll;
}

StickResult stick_ml(const StickBreakingParams& params, const BioassayTable& tb, std::size_t S, std::uint64_t seed) {
  tb.validate();
  if (S < 1) throw InvalidInput("stick_ml: need at least one draw");
  std::vector<double> terms(S);
  StickResult res;
  for (std::size_t s = 0; s < S; ++s) {
    Rng rng = make_rng(seed, kStreamStick, s);
    const StickDraw d = stick_breaking_draw(params, rng);
    res.max_tail_mass = std::max(res.max_tail_mass, d.tail_mass);
    if (d.tail_mass > params.tail_tolerance)
      throw std::runtime_error("stick-breaking tail mass " + std::to_string(d.tail_mass) + " above tolerance");
    terms[s] = stick_log_likelihood(d, tb);
  }
  res.log_ml = log_sum_exp(terms) - std::log(static_cast<double>(S));
  return res;
}

std::vector<double> quantile_pyramid(const QuantilePyramidParams& params, Rng& rng) {
  if (!(params.c > 0) || params.depth < 1 || params.depth > 24) throw InvalidInput("invalid quantile pyramid parameters");
  const std::size_t cells = std::size_t{1} << params.depth;
  std::vector<double> q(cells + 1);
  q[0] = 0.0;
  q[cells] = 1.0;
  for (int m = 1; m <= params.depth; ++m) {
    const double a = params.c * m * m * m;
    std::gamma_distribution<double> g(a / 2, 1.0);
    const std::size_t step = cells >> (m - 1);
    const std::size_t half = step / 2;
    for (std::size_t k = 0; k < cells; k += step) {
      const double x = g(rng);
      const double y = g(rng);
      q[k + half] = q[k] + x / (x + y) * (q[k + step] - q[k]);
    }
  }
  return q;
}

RealMatrix qp_latent_batch(const QuantilePyramidParams& params, std::size_t S, std::size_t n, std::uint64_t seed) {
  RealMatrix x(S, n);
  const double cells = static_cast<double>(std::size_t{1} << params.depth);
  for (std::size_t s = 0; s < S; ++s) {
    Rng rng = make_rng(seed, kStreamPyramid, s);
    const auto q = quantile_pyramid(params, rng);
    for (double& v : x.row(s)) {
      const double pos = std::generate_canonical<double, 53>(rng) * cells;
      const auto cell = std::min(static_cast<std::size_t>(pos), q.size() - 2);
      const double frac = pos - static_cast<double>(cell);
      v = params.scale * (q[cell] + frac * (q[cell + 1] - q[cell])) + params.shift;
    }
  }
  return x;
}

void ChangepointConfig::validate() const {
  if (n1 < 0 || n1 > n) throw InvalidInput("changepoint: segment sizes must add up to n");
  if (gamma < 1 || 2 * gamma >= n) throw InvalidInput("changepoint: need 1 <= gamma and 2 gamma < n");
  if (!(sigma1 > 0) || !(sigma2 > 0)) throw InvalidInput("changepoint: scales must be positive");
  if (S < 1) throw InvalidInput("changepoint: need at least one sample per side");
}

std::vector<double> langlie_inputs(const ChangepointConfig& cfg, double lower, double upper, std::uint64_t seed) {
  cfg.validate();
  // same stream as changepoint_data, so the fixture seed reproduces these responses
  Rng rng = make_rng(seed, kStreamChangepoint);
  std::normal_distribution<double> norm;
  std::vector<double> t(cfg.n);
  std::vector<int> r(cfg.n);
  t[0] = 0.5 * (lower + upper);
  for (int i = 0; i < cfg.n; ++i) {
    const bool first = i < cfg.n1;
    const double x = (first ? cfg.mu1 : cfg.mu2) + (first ? cfg.sigma1 : cfg.sigma2) * norm(rng);
    r[i] = x <= t[i] ? 1 : 0;
    if (i + 1 == cfg.n) break;
    // most recent start p with as many successes as failures in p..i
    int balance = 0;
    int p = -1;
    for (int j = i; j >= 0; --j) {
      balance += r[j] ? 1 : -1;
      if (j < i && balance == 0) {
        p = j;
        break;
      }
    }
    if (p >= 0)
      t[i + 1] = 0.5 * (t[i] + t[p]);
    else
      t[i + 1] = 0.5 * (t[i] + (r[i] ? lower : upper));
  }
  return t;
}

std::vector<double> load_langlie_inputs(const std::filesystem::path& path) {
  const auto tab = csv::read(path);
  const int col = tab.column("t");
  if (col < 0) throw InvalidInput(path.filename().string() + ": missing column t");
  std::vector<double> t;
  t.reserve(tab.rows.size());
  for (std::size_t i = 0; i < tab.rows.size(); ++i)
    t.push_back(csv::to_double(tab.rows[i][col], path.filename().string() + " row " + std::to_string(i + 2)));
  return t;
}

void save_langlie_inputs(const std::filesystem::path& path, std::span<const double> t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t\n" << std::setprecision(17);
  for (double v : t) out << v << '\n';
}

BinaryDesign changepoint_data(const ChangepointConfig& cfg, std::span<const double> t, std::uint64_t seed) {
  cfg.validate();
  if (static_cast<int>(t.size()) != cfg.n) throw InvalidInput("changepoint: input sequence length differs from n");
  Rng rng = make_rng(seed, kStreamChangepoint);
  std::normal_distribution<double> norm;
  BinaryDesign d;
  d.t.assign(t.begin(), t.end());
  d.y.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    const bool first = i < cfg.n1;
    const double x = (first ? cfg.mu1 : cfg.mu2) + (first ? cfg.sigma1 : cfg.sigma2) * norm(rng);
    d.y[i] = x <= t[i] ? 1 : 0;
  }
  return d;
}

BinaryDesign changepoint_data(const ChangepointConfig& cfg, const std::filesystem::path& fixture, std::uint64_t seed) {
  const auto t = load_langlie_inputs(fixture);
  return changepoint_data(cfg, t, seed);
}

BioassayTable gen_bioassay_counts(std::uint64_t seed) {
  Rng rng = make_rng(seed, kStreamBioassay);
  std::normal_distribution<double> norm;
  BioassayTable tb;
  for (int j = 0; j < 10; ++j) {
    const double level = -1.0 + 2.0 * j / 9.0;
    int succ = 0;
    for (int k = 0; k < 50; ++k) {
      const bool left = std::generate_canonical<double, 53>(rng) < 1.0 / 3.0;
      const double x = (left ? -2.0 : 1.0) + 0.7 * norm(rng);
      succ += x <= level;
    }
    tb.level.push_back(level);
    tb.successes.push_back(succ);
    tb.trials.push_back(50);
  }
  return tb;
}

BioassayTable load_bioassay_table(const std::filesystem::path& path) {
  const auto tab = csv::read(path);
  const int cl = tab.column("level"), cs = tab.column("successes"), ct = tab.column("trials");
  if (cl < 0 || cs < 0 || ct < 0) throw InvalidInput(path.filename().string() + ": need columns level,successes,trials");
  BioassayTable tb;
  for (std::size_t i = 0; i < tab.rows.size(); ++i) {
    const std::string where = path.filename().string() + " row " + std::to_string(i + 2);
    tb.level.push_back(csv::to_double(tab.rows[i][cl], where));
    tb.successes.push_back(csv::to_int(tab.rows[i][cs], where));
    tb.trials.push_back(csv::to_int(tab.rows[i][ct], where));
  }
  tb.validate();
  return tb;
}

}  // namespace perms
