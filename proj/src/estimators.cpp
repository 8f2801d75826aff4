#include "perms/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "perms/log_math.hpp"

namespace perms {

std::size_t LogWeights::num_nonzero() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.has_value(); }));
}

std::vector<double> LogWeights::finite_values() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries)
    if (e) out.push_back(*e);
  return out;
}

std::vector<double> LogWeights::as_nan_array() const {
  std::vector<double> out(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    out[i] = entries[i] ? *entries[i] : std::numeric_limits<double>::quiet_NaN();
  return out;
}

LogWeights LogWeights::from_nan_array(std::span<const double> values, int n) {
  LogWeights lw;
  lw.n = n;
  lw.entries.reserve(values.size());
  for (double v : values) {
    if (std::isnan(v) || v == kNegInf)
      lw.entries.emplace_back(std::nullopt);
    else
      lw.entries.emplace_back(v);
  }
  lw.validate();
  return lw;
}

void LogWeights::validate() const {
  if (entries.empty()) throw InvalidInput("log weights: need at least one sample");
  if (n < 1) throw InvalidInput("log weights: sample size must be positive");
  const double cap = log_factorial(n);
  for (const auto& e : entries) {
    if (!e) continue;
    if (!std::isfinite(*e)) throw InvalidInput("log weights: non-finite entry");
    if (*e > cap + 1e-9 * std::max(1.0, cap)) throw InvalidInput("log weights: entry exceeds log n!");
  }
}

nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json j;
  j["log_ml"] = std::isfinite(r.log_ml) ? nlohmann::json(r.log_ml) : nlohmann::json("-inf");
  j["S"] = r.S;
  j["num_nonzero"] = r.num_nonzero;
  j["proportion_nonzero"] = r.proportion_nonzero;
  j["wall_time_seconds"] = r.wall_time_seconds;
  return j;
}

EstimateReport log_ml(const LogWeights& lw) {
  lw.validate();
  EstimateReport rep;
  rep.S = lw.size();
  const auto vals = lw.finite_values();
  rep.num_nonzero = vals.size();
  rep.proportion_nonzero = static_cast<double>(rep.num_nonzero) / static_cast<double>(rep.S);
  if (vals.empty()) {
    rep.log_ml = kNegInf;
    rep.all_absent = true;
    return rep;
  }
  rep.log_ml = log_sum_exp(vals) - std::log(static_cast<double>(rep.S)) - log_factorial(lw.n);
  return rep;
}

double bioassay_log_constant(const BioassayTable& tb) {
  tb.validate();
  double c = 0.0;
  for (std::size_t j = 0; j < tb.num_levels(); ++j) c += log_choose(tb.trials[j], tb.successes[j]);
  return c;
}

EstimateReport log_ml_bioassay(const LogWeights& lw, const BioassayTable& tb) {
  tb.validate();
  if (lw.n != tb.total_trials()) throw InvalidInput("log weights size differs from total trials");
  EstimateReport rep = log_ml(lw);
  if (!rep.all_absent) rep.log_ml += bioassay_log_constant(tb);
  return rep;
}

double posterior_mean(std::span<const double> h, const LogWeights& lw) {
  if (h.size() != lw.size()) throw InvalidInput("posterior_mean: length mismatch");
  double mx = kNegInf;
  for (const auto& e : lw.entries)
    if (e) mx = std::max(mx, *e);
  if (mx == kNegInf) throw InvalidInput("posterior_mean: all weights vanish");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t s = 0; s < h.size(); ++s) {
    if (!lw.entries[s]) continue;
    const double w = std::exp(*lw.entries[s] - mx);
    num += h[s] * w;
    den += w;
  }
  return num / den;
}

double bayes_factor(double log_ml_alt, double log_ml_null) {
  if (!std::isfinite(log_ml_alt) || !std::isfinite(log_ml_null))
    throw InvalidInput("bayes_factor: non-finite marginal likelihood");
  return std::exp(log_ml_alt - log_ml_null);
}

namespace {

// Runs body(row, workspace, scratch) over [0, rows) on contiguous chunks.
template <class Body>
EngineCounters parallel_rows(std::size_t rows, int threads, Body&& body) {
  const std::size_t nt = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(rows, 1));
  std::vector<Workspace> spaces(nt);
  auto work = [&](std::size_t t) {
    const std::size_t begin = rows * t / nt;
    const std::size_t end = rows * (t + 1) / nt;
    std::vector<double> scratch;
    std::vector<Interval> iv;
    for (std::size_t i = begin; i < end; ++i) body(i, spaces[t], scratch, iv);
  };
  if (nt == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  EngineCounters total;
  for (const auto& ws : spaces) {
    const auto& c = ws.counters();
    total.permanents += c.permanents;
    total.zero_rejected += c.zero_rejected;
    total.moves += c.moves;
    total.fallbacks += c.fallbacks;
    total.max_table_size = std::max(total.max_table_size, c.max_table_size);
  }
  return total;
}

std::optional<double> row_log_perm(std::span<const double> x, const CanonicalDesign& cd, Workspace& ws,
                                   std::vector<double>& scratch, std::vector<Interval>& iv) {
  scratch.assign(x.begin(), x.end());
  for (double v : scratch)
    if (!std::isfinite(v)) throw InvalidInput("non-finite latent value");
  std::sort(scratch.begin(), scratch.end());
  if (!sample_rows(scratch, cd, iv)) return std::nullopt;
  const double lp = log_permanent_rows(iv, static_cast<int>(scratch.size()), ws);
  if (lp == kNegInf) return std::nullopt;
  return lp;
}

PipelineResult finish(std::vector<std::optional<double>> entries, int n, EngineCounters counters,
                      std::chrono::steady_clock::time_point start, const PipelineOptions& opts) {
  PipelineResult res;
  res.weights.entries = std::move(entries);
  res.weights.n = n;
  res.counters = counters;
  res.report = log_ml(res.weights);
  res.report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (opts.debug) {
    std::cerr << "[perms] rows=" << res.weights.size() << " n=" << n << " nonzero=" << res.report.num_nonzero
              << " rejected=" << counters.zero_rejected << " moves=" << counters.moves
              << " expansions=" << counters.fallbacks << " max_table=" << counters.max_table_size
              << " time=" << res.report.wall_time_seconds << "s\n";
  }
  return res;
}

}  // namespace

PipelineResult run_pipeline(const RealMatrix& latents, const BinaryDesign& design, const PipelineOptions& opts) {
  design.validate();
  if (opts.threads < 1) throw InvalidInput("threads must be at least 1");
  if (latents.rows == 0) throw InvalidInput("latent matrix has no rows");
  if (latents.cols != design.size()) throw InvalidInput("latent matrix width differs from design size");
  const auto start = std::chrono::steady_clock::now();
  const CanonicalDesign cd = canonicalize(design);
  std::vector<std::optional<double>> entries(latents.rows);
  const auto counters = parallel_rows(latents.rows, opts.threads,
                                      [&](std::size_t i, Workspace& ws, std::vector<double>& scratch, std::vector<Interval>& iv) {
                                        entries[i] = row_log_perm(latents.row(i), cd, ws, scratch, iv);
                                      });
  return finish(std::move(entries), static_cast<int>(design.size()), counters, start, opts);
}

PipelineResult run_pipeline(const RealMatrix& latents, const RealMatrix& thresholds, std::span<const int> y,
                            const PipelineOptions& opts) {
  if (opts.threads < 1) throw InvalidInput("threads must be at least 1");
  if (latents.rows == 0) throw InvalidInput("latent matrix has no rows");
  if (thresholds.rows != latents.rows || thresholds.cols != latents.cols || y.size() != latents.cols)
    throw InvalidInput("threshold, latent and response dimensions differ");
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::optional<double>> entries(latents.rows);
  const auto counters = parallel_rows(latents.rows, opts.threads,
                                      [&](std::size_t i, Workspace& ws, std::vector<double>& scratch, std::vector<Interval>& iv) {
                                        BinaryDesign d;
                                        const auto tr = thresholds.row(i);
                                        d.t.assign(tr.begin(), tr.end());
                                        d.y.assign(y.begin(), y.end());
                                        entries[i] = row_log_perm(latents.row(i), canonicalize(d), ws, scratch, iv);
                                      });
  return finish(std::move(entries), static_cast<int>(latents.cols), counters, start, opts);
}

void write_log_weights(std::ostream& os, const LogWeights& lw) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  for (const auto& e : lw.entries) {
    if (e)
      buf << *e << '\n';
    else
      buf << "nan\n";
  }
  os << buf.str();
}

LogWeights read_log_weights(std::istream& is, int n) {
  std::vector<double> vals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "nan" || line == "NaN" || line == "NAN") {
      vals.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(line, &used));
      if (used != line.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidInput("log weights line " + std::to_string(lineno) + ": not a number");
    }
  }
  return LogWeights::from_nan_array(vals, n);
}

}  // namespace perms
