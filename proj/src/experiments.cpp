#include "perms/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

#include "perms/log_math.hpp"
#include "perms/oracle.hpp"
#include "perms/permanent.hpp"

namespace perms {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

PipelineOptions pipeline_options(const RunOptions& opts) { return {opts.threads, opts.debug}; }

// Copy of rows [r0, r0 + nr) and columns [c0, c0 + nc).
RealMatrix submatrix(const RealMatrix& x, std::size_t r0, std::size_t nr, std::size_t c0, std::size_t nc) {
  RealMatrix out(nr, nc);
  for (std::size_t i = 0; i < nr; ++i) {
    const auto src = x.row(r0 + i).subspan(c0, nc);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

BinaryDesign slice(const BinaryDesign& d, std::size_t b, std::size_t e) {
  BinaryDesign out;
  out.t.assign(d.t.begin() + static_cast<std::ptrdiff_t>(b), d.t.begin() + static_cast<std::ptrdiff_t>(e));
  out.y.assign(d.y.begin() + static_cast<std::ptrdiff_t>(b), d.y.begin() + static_cast<std::ptrdiff_t>(e));
  return out;
}

nlohmann::json real_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

BinaryDesign bench_design(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, kStreamBenchDesign, static_cast<std::uint64_t>(n));
  BinaryDesign d;
  d.t.resize(n);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.t[i] = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    d.y[i] = uniform_open(rng) <= d.t[i] ? 1 : 0;
  }
  return d;
}

RealMatrix beta_latents(std::size_t S, int n, std::uint64_t seed) {
  RealMatrix x(S, static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < S; ++s) {
    Rng rng = make_rng(seed, kStreamBenchLatent, (static_cast<std::uint64_t>(n) << 32) ^ s);
    for (double& v : x.row(s)) v = draw_beta(rng, 2.0, 2.0);
  }
  return x;
}

void compare(OracleCheck& acc, double engine, const ExactCount& exact) {
  ++acc.cases;
  const double want = log_count(exact);
  if (want == kNegInf || engine == kNegInf) {
    if (want != engine) ++acc.mismatches;
    return;
  }
  const double err = std::abs(engine - want);
  acc.max_abs_error = std::max(acc.max_abs_error, err);
  if (err > 1e-9) ++acc.mismatches;
}

}  // namespace

ToyRunResult run_toy(int n, std::size_t S, const RunOptions& opts) {
  const ToyProblem toy = toy_problem(n);
  const RealMatrix x = uniform_latents(S, static_cast<std::size_t>(n), opts.seed);
  const auto res = run_pipeline(x, toy.design, pipeline_options(opts));
  return {n, toy.exact_log_ml, res.report};
}

IrisRunResult run_iris(const std::filesystem::path& csv, std::size_t S, const RunOptions& opts) {
  const IrisData iris = load_iris(csv);
  const auto batch = logistic_batch(iris.model, S, opts.seed);
  const auto res = run_pipeline(batch.latents, batch.thresholds, iris.y, pipeline_options(opts));

  IrisRunResult out;
  out.perms = res.report;
  out.comparator_samples = std::max<std::size_t>(res.report.num_nonzero, 1);

  auto t0 = Clock::now();
  const auto prior_ll = prior_logliks(iris.model, iris.y, out.comparator_samples, opts.seed);
  out.naive_log_ml = naive_ml(prior_ll);
  out.naive_seconds = seconds_since(t0);

  t0 = Clock::now();
  // chain long enough that the kept draws match the comparator count
  const auto chain_length =
      static_cast<std::size_t>(std::ceil(static_cast<double>(out.comparator_samples) / (1.0 - kMhBurnIn)));
  const MhResult mh = mh_sample(iris.model, iris.y, chain_length, opts.seed);
  out.bridge_log_ml = bridge_ml(prior_ll, mh.logliks);
  out.bridge_seconds = seconds_since(t0) + out.naive_seconds;
  out.mh_acceptance = mh.acceptance_rate;
  out.mh_ess = mh.ess;
  if (opts.debug)
    std::cerr << "[iris] comparators=" << out.comparator_samples << " mh_kept=" << mh.logliks.size()
              << " acceptance=" << mh.acceptance_rate << "\n";
  return out;
}

BioassayRunResult run_bioassay(const BioassayTable& tb, std::size_t S, const RunOptions& opts,
                               const StickBreakingParams& stick) {
  tb.validate();
  const BinaryDesign design = expand_bioassay(tb);
  const RealMatrix x = dp_urn_batch(stick.dp, S, design.size(), opts.seed);
  const auto res = run_pipeline(x, design, pipeline_options(opts));

  BioassayRunResult out;
  out.perms = log_ml_bioassay(res.weights, tb);
  out.perms.wall_time_seconds = res.report.wall_time_seconds;
  const auto t0 = Clock::now();
  const StickResult sr = stick_ml(stick, tb, S, opts.seed);
  out.stick_seconds = seconds_since(t0);
  out.stick_log_ml = sr.log_ml;
  out.stick_max_tail = sr.max_tail_mass;
  return out;
}

ChangepointRunResult run_changepoint(const ChangepointConfig& cfg, const BinaryDesign& data, const RunOptions& opts,
                                     const QuantilePyramidParams& qp) {
  cfg.validate();
  data.validate();
  if (static_cast<int>(data.size()) != cfg.n) throw InvalidInput("changepoint: data length differs from n");
  const auto t0 = Clock::now();
  const std::size_t S = cfg.S;
  const auto n = static_cast<std::size_t>(cfg.n);
  const RealMatrix x = qp_latent_batch(qp, 2 * S, n, opts.seed);

  ChangepointRunResult out;
  out.null_report = run_pipeline(x, data, pipeline_options(opts)).report;

  const PipelineOptions quiet{opts.threads, false};
  for (int tau = cfg.gamma; tau <= cfg.n - cfg.gamma; ++tau) {
    const auto k = static_cast<std::size_t>(tau);
    const auto left = run_pipeline(submatrix(x, 0, S, 0, k), slice(data, 0, k), quiet).report;
    const auto right = run_pipeline(submatrix(x, S, S, k, n - k), slice(data, k, n), quiet).report;
    out.taus.push_back(tau);
    out.log_ml_tau.push_back(left.log_ml + right.log_ml);
    if (opts.debug)
      std::cerr << "[changepoint] tau=" << tau << " left=" << left.log_ml << " right=" << right.log_ml << "\n";
  }

  std::vector<double> finite;
  for (double v : out.log_ml_tau)
    if (std::isfinite(v)) finite.push_back(v);
  out.log_ml_alt = finite.empty() ? kNegInf : log_sum_exp(finite) - std::log(static_cast<double>(out.taus.size()));
  const auto best = std::max_element(out.log_ml_tau.begin(), out.log_ml_tau.end());
  out.posterior_mode = out.taus[static_cast<std::size_t>(best - out.log_ml_tau.begin())];
  out.log_bayes_factor = out.log_ml_alt - out.null_report.log_ml;
  out.bayes_factor = std::exp(out.log_bayes_factor);
  out.wall_time_seconds = seconds_since(t0);
  return out;
}

std::vector<int> default_bench_grid() {
  std::vector<int> g;
  for (int n = 100; n <= 2000; n += 100) g.push_back(n);
  return g;
}

BenchPoint bench_point(int n, std::size_t S, const RunOptions& opts) {
  const BinaryDesign d = bench_design(n, opts.seed);
  const RealMatrix x = beta_latents(S, n, opts.seed);
  const auto res = run_pipeline(x, d, pipeline_options(opts));
  BenchPoint p;
  p.n = n;
  p.S = S;
  p.nonzero = res.report.num_nonzero;
  p.seconds = res.report.wall_time_seconds;
  p.seconds_per_nonzero = p.nonzero ? p.seconds / static_cast<double>(p.nonzero) : 0.0;
  p.max_table = res.counters.max_table_size;
  return p;
}

BenchFit fit_sqrt_time(const std::vector<BenchPoint>& points) {
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    if (p.nonzero == 0) continue;
    xs.push_back(p.n);
    ys.push_back(std::sqrt(p.seconds_per_nonzero));
  }
  BenchFit f;
  if (xs.size() < 2) return f;
  const double N = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= N;
  my /= N;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.constant = f.slope * f.slope;
  return f;
}

BenchResult run_bench(const std::vector<int>& grid, std::size_t S, const RunOptions& opts, bool oracle_check) {
  BenchResult out;
  for (int n : grid) {
    out.points.push_back(bench_point(n, S, opts));
    if (opts.debug) {
      const auto& p = out.points.back();
      std::cerr << "[bench] n=" << n << " nonzero=" << p.nonzero << " per_nonzero=" << p.seconds_per_nonzero
                << "s max_table=" << p.max_table << "\n";
    }
  }
  out.fit = fit_sqrt_time(out.points);
  if (oracle_check) {
    out.oracle_checked = true;
    out.oracle = oracle_check_samples(20, 200, opts.seed);
  }
  return out;
}

OracleCheck oracle_check_samples(int n_max, std::size_t cases, std::uint64_t seed) {
  if (n_max < 1 || n_max > 20) throw InvalidInput("oracle check: n_max must lie in 1..20");
  OracleCheck acc;
  Workspace ws;
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng = make_rng(seed, kStreamOracleCheck, c);
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n_max));
    BinaryDesign d;
    d.t.resize(n);
    d.y.resize(n);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
      d.t[i] = uniform_open(rng);
      d.y[i] = static_cast<int>(rng() & 1U);
      x[i] = uniform_open(rng);
    }
    const auto b = from_sample(x, canonicalize(d));
    const double engine = b ? log_permanent(*b, ws) : kNegInf;
    compare(acc, engine, per_exact_dense(dense_from_sample(x, d)));
  }
  return acc;
}

OracleCheck oracle_check_exhaustive(int n_max) {
  OracleCheck acc;
  Workspace ws;
  for_each_small_blockmat(n_max, [&](const BlockRectMatrix& b) {
    compare(acc, log_permanent(b, ws), per_exact_dense(to_dense(b)));
  });
  return acc;
}

nlohmann::json to_json(const ToyRunResult& r) {
  nlohmann::json j = to_json(r.report);
  j["n"] = r.n;
  j["exact_log_ml"] = r.exact_log_ml;
  return j;
}

nlohmann::json to_json(const IrisRunResult& r) {
  nlohmann::json j;
  j["perms"] = to_json(r.perms);
  j["comparator_samples"] = r.comparator_samples;
  j["naive"] = {{"log_ml", real_or_string(r.naive_log_ml)}, {"wall_time_seconds", r.naive_seconds}};
  j["bridge"] = {{"log_ml", real_or_string(r.bridge_log_ml)}, {"wall_time_seconds", r.bridge_seconds}};
  j["mh"] = {{"acceptance_rate", r.mh_acceptance}, {"ess", r.mh_ess}};
  return j;
}

nlohmann::json to_json(const BioassayRunResult& r) {
  nlohmann::json j;
  j["perms"] = to_json(r.perms);
  j["stick"] = {{"log_ml", real_or_string(r.stick_log_ml)},
                {"max_tail_mass", r.stick_max_tail},
                {"wall_time_seconds", r.stick_seconds}};
  return j;
}

nlohmann::json to_json(const ChangepointRunResult& r) {
  nlohmann::json j;
  j["null"] = to_json(r.null_report);
  j["log_ml_alt"] = real_or_string(r.log_ml_alt);
  j["log_bayes_factor"] = real_or_string(r.log_bayes_factor);
  j["bayes_factor"] = real_or_string(r.bayes_factor);
  j["posterior_mode"] = r.posterior_mode;
  j["wall_time_seconds"] = r.wall_time_seconds;
  auto& per = j["per_tau"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.taus.size(); ++i)
    per.push_back({{"tau", r.taus[i]}, {"log_ml", real_or_string(r.log_ml_tau[i])}});
  return j;
}

nlohmann::json to_json(const OracleCheck& r) {
  return {{"cases", r.cases}, {"mismatches", r.mismatches}, {"max_abs_error", r.max_abs_error}};
}

nlohmann::json to_json(const BenchResult& r) {
  nlohmann::json j;
  auto& pts = j["points"] = nlohmann::json::array();
  for (const auto& p : r.points)
    pts.push_back({{"n", p.n},
                   {"S", p.S},
                   {"nonzero", p.nonzero},
                   {"seconds", p.seconds},
                   {"seconds_per_nonzero", p.seconds_per_nonzero},
                   {"max_table", p.max_table}});
  j["fit"] = {{"intercept", r.fit.intercept}, {"slope", r.fit.slope}, {"r2", r.fit.r2}, {"constant", r.fit.constant}};
  if (r.oracle_checked) j["oracle"] = to_json(r.oracle);
  return j;
}

}  // namespace perms
