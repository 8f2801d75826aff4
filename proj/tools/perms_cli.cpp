#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "perms/experiments.hpp"
#include "perms/io.hpp"
#include "perms/oracle.hpp"

#ifndef PERMS_DATA_DIR
#define PERMS_DATA_DIR "data"
#endif

namespace {

using namespace perms;
using nlohmann::json;

struct Common {
  std::size_t samples = 0;  // 0: subcommand default
  std::uint64_t seed = 1;
  int threads = 1;
  std::string format = "json";
  std::string out;
  bool debug = false;

  RunOptions run() const { return {seed, threads, debug}; }
  std::size_t S(std::size_t fallback) const { return samples ? samples : fallback; }
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string> cols) {
    bool first = true;
    for (const auto& c : cols) {
      os_ << (first ? "" : ",") << c;
      first = false;
    }
    os_ << '\n';
  }
  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(v), first = false), ...);
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  std::ostringstream os_;
};

void emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(c.out);
  if (!os) throw std::runtime_error("cannot write " + c.out);
  os << text;
}

std::string dump(json j, const char* command, const Common& c) {
  json wrapped = {{"command", command}, {"seed", c.seed}, {"threads", c.threads}, {"result", std::move(j)}};
  return wrapped.dump(2) + "\n";
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--samples,-S", c.samples, "number of latent samples S")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--threads", c.threads, "worker threads (never changes results)")->check(CLI::PositiveNumber);
  app->add_option("--format", c.format, "report format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--out,-o", c.out, "output file (default stdout)");
  app->add_flag("--debug", c.debug, "stage timing and table occupancy on stderr");
}

struct Stage {
  const Common& c;
  const char* name;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  ~Stage() {
    if (c.debug)
      std::cerr << "[stage] " << name << " "
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << "s\n";
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perms: marginal likelihoods of exchangeable binary-response models by permutation counting"};
  app.require_subcommand(1);
  const std::string data_dir = PERMS_DATA_DIR;

  Common c;

  // toy
  int toy_n = 100;
  auto* toy = app.add_subcommand("toy", "uniform-latent toy problem with a closed-form answer");
  add_common(toy, c);
  std::string toy_design_out, toy_latents_out;
  toy->add_option("--n", toy_n, "number of trials (even)");
  toy->add_option("--save-design", toy_design_out, "write the design here (CSV t,y)");
  toy->add_option("--save-latents", toy_latents_out, "write the latent matrix here (packed if the name ends in .bin)");

  // iris
  std::string iris_csv = data_dir + "/iris.csv";
  auto* iris = app.add_subcommand("iris", "logistic regression on iris: perms, naive and bridge estimates");
  add_common(iris, c);
  iris->add_option("--csv", iris_csv, "iris CSV")->check(CLI::ExistingFile);

  // bioassay
  std::string bio_table = data_dir + "/bioassay_table.csv";
  std::int64_t bio_generate = -1;
  int stick_K = 1000;
  auto* bio = app.add_subcommand("bioassay", "Dirichlet-process bioassay: perms and stick-breaking");
  add_common(bio, c);
  bio->add_option("--table", bio_table, "dosage table CSV (level,successes,trials)")->check(CLI::ExistingFile);
  bio->add_option("--generate", bio_generate, "simulate a table from this seed instead of loading one");
  bio->add_option("--K", stick_K, "stick-breaking truncation")->check(CLI::PositiveNumber);

  // changepoint
  std::string cp_inputs = data_dir + "/langlie_inputs.csv";
  std::string cp_tau_out;
  int cp_gamma = 5;
  auto* cp = app.add_subcommand("changepoint", "Bayes factor and posterior mode for a single changepoint");
  add_common(cp, c);
  cp->add_option("--inputs", cp_inputs, "input-sequence CSV (column t)")->check(CLI::ExistingFile);
  cp->add_option("--gamma", cp_gamma, "minimum segment length")->check(CLI::PositiveNumber);
  cp->add_option("--tau-out", cp_tau_out, "write the per-tau log ML table (CSV) here");

  // bench
  int b_min = 100, b_max = 2000, b_step = 100;
  bool b_oracle = false;
  auto* bench = app.add_subcommand("bench", "time per nonzero permanent against n");
  add_common(bench, c);
  bench->add_option("--n-min", b_min)->check(CLI::PositiveNumber);
  bench->add_option("--n-max", b_max)->check(CLI::PositiveNumber);
  bench->add_option("--n-step", b_step)->check(CLI::PositiveNumber);
  bench->add_flag("--oracle-check", b_oracle, "also compare the engine with exact counts for n <= 20");

  // perms-compute
  std::string pc_design, pc_latents, pc_report;
  auto* pc = app.add_subcommand("perms-compute", "log permutation numbers for a design and a latent matrix");
  add_common(pc, c);
  pc->add_option("--design", pc_design, "design CSV (t,y or level,successes,trials)")->required()->check(CLI::ExistingFile);
  pc->add_option("--latents", pc_latents, "latent matrix, CSV or packed")->required()->check(CLI::ExistingFile);
  pc->add_option("--report", pc_report, "also write the aggregated report here (--format)");

  // oracle-check
  int oc_nmax = 20, oc_exhaustive = 0;
  std::size_t oc_cases = 1000;
  auto* oc = app.add_subcommand("oracle-check", "engine against exact dense counts");
  add_common(oc, c);
  oc->add_option("--n-max", oc_nmax, "largest random instance (<= 20)")->check(CLI::Range(1, 20));
  oc->add_option("--cases", oc_cases, "random instances")->check(CLI::PositiveNumber);
  oc->add_option("--exhaustive", oc_exhaustive, "also run every staircase system up to this size")
      ->check(CLI::Range(0, 7));

  CLI11_PARSE(app, argc, argv);

  try {
    const bool as_json = c.format == "json";
    if (toy->parsed()) {
      ToyRunResult r;
      {
        Stage st{c, "toy"};
        r = run_toy(toy_n, c.S(20000), c.run());
      }
      if (!toy_design_out.empty()) save_design_csv(toy_design_out, toy_problem(toy_n).design);
      if (!toy_latents_out.empty()) {
        const RealMatrix x = uniform_latents(c.S(20000), static_cast<std::size_t>(toy_n), c.seed);
        if (toy_latents_out.ends_with(".bin"))
          write_latents_packed(toy_latents_out, x);
        else
          write_latents_csv(toy_latents_out, x);
      }
      if (as_json) return emit(c, dump(to_json(r), "toy", c)), 0;
      Csv t({"n", "S", "exact_log_ml", "log_ml", "num_nonzero", "proportion_nonzero", "wall_time_seconds"});
      t.row(r.n, r.report.S, r.exact_log_ml, r.report.log_ml, r.report.num_nonzero, r.report.proportion_nonzero,
            r.report.wall_time_seconds);
      emit(c, t.str());
    } else if (iris->parsed()) {
      IrisRunResult r;
      {
        Stage st{c, "iris"};
        r = run_iris(iris_csv, c.S(50000), c.run());
      }
      if (as_json) return emit(c, dump(to_json(r), "iris", c)), 0;
      Csv t({"S", "log_ml", "num_nonzero", "proportion_nonzero", "perms_seconds", "comparator_samples", "naive_log_ml",
             "naive_seconds", "bridge_log_ml", "bridge_seconds", "mh_acceptance"});
      t.row(r.perms.S, r.perms.log_ml, r.perms.num_nonzero, r.perms.proportion_nonzero, r.perms.wall_time_seconds,
            r.comparator_samples, r.naive_log_ml, r.naive_seconds, r.bridge_log_ml, r.bridge_seconds,
            r.mh_acceptance);
      emit(c, t.str());
    } else if (bio->parsed()) {
      const BioassayTable tb =
          bio_generate >= 0 ? gen_bioassay_counts(static_cast<std::uint64_t>(bio_generate)) : load_bioassay_table(bio_table);
      StickBreakingParams sp;
      sp.K = stick_K;
      BioassayRunResult r;
      {
        Stage st{c, "bioassay"};
        r = run_bioassay(tb, c.S(20000), c.run(), sp);
      }
      if (as_json) return emit(c, dump(to_json(r), "bioassay", c)), 0;
      Csv t({"S", "log_ml", "num_nonzero", "proportion_nonzero", "perms_seconds", "stick_log_ml", "stick_max_tail",
             "stick_seconds"});
      t.row(r.perms.S, r.perms.log_ml, r.perms.num_nonzero, r.perms.proportion_nonzero, r.perms.wall_time_seconds,
            r.stick_log_ml, r.stick_max_tail, r.stick_seconds);
      emit(c, t.str());
    } else if (cp->parsed()) {
      ChangepointConfig cfg;
      cfg.S = c.S(2000);
      cfg.gamma = cp_gamma;
      const BinaryDesign data = [&] {
        Stage st{c, "data"};
        return changepoint_data(cfg, cp_inputs, c.seed);
      }();
      ChangepointRunResult r;
      {
        Stage st{c, "changepoint"};
        r = run_changepoint(cfg, data, c.run());
      }
      if (!cp_tau_out.empty()) {
        Csv t({"tau", "log_ml"});
        for (std::size_t i = 0; i < r.taus.size(); ++i) t.row(r.taus[i], r.log_ml_tau[i]);
        std::ofstream os(cp_tau_out);
        if (!os) throw std::runtime_error("cannot write " + cp_tau_out);
        os << t.str();
      }
      if (as_json) return emit(c, dump(to_json(r), "changepoint", c)), 0;
      Csv t({"S", "null_log_ml", "alt_log_ml", "log_bayes_factor", "bayes_factor", "posterior_mode",
             "wall_time_seconds"});
      t.row(cfg.S, r.null_report.log_ml, r.log_ml_alt, r.log_bayes_factor, r.bayes_factor, r.posterior_mode,
            r.wall_time_seconds);
      emit(c, t.str());
    } else if (bench->parsed()) {
      if (b_min > b_max) throw InvalidInput("bench: --n-min exceeds --n-max");
      std::vector<int> grid;
      for (int n = b_min; n <= b_max; n += b_step) grid.push_back(n);
      const BenchResult r = run_bench(grid, c.S(20), c.run(), b_oracle);
      if (as_json) return emit(c, dump(to_json(r), "bench", c)), 0;
      Csv t({"n", "S", "nonzero", "seconds", "seconds_per_nonzero", "max_table"});
      for (const auto& p : r.points) t.row(p.n, p.S, p.nonzero, p.seconds, p.seconds_per_nonzero, p.max_table);
      emit(c, t.str());
      std::cerr << "sqrt-time fit: r2=" << num(r.fit.r2) << " constant=" << num(r.fit.constant) << "\n";
      if (r.oracle_checked) std::cerr << "oracle: " << to_json(r.oracle).dump() << "\n";
    } else if (pc->parsed()) {
      const DesignInput in = [&] {
        Stage st{c, "read design"};
        return load_design_csv(pc_design);
      }();
      const RealMatrix x = [&] {
        Stage st{c, "read latents"};
        return read_latents(pc_latents);
      }();
      if (x.cols != in.design.size())
        throw InvalidInput("latent matrix has " + std::to_string(x.cols) + " columns, design has " +
                           std::to_string(in.design.size()) + " trials");
      PipelineResult res;
      {
        Stage st{c, "permanents"};
        res = run_pipeline(x, in.design, {c.threads, c.debug});
      }
      std::ostringstream w;
      write_log_weights(w, res.weights);
      emit(c, w.str());
      if (!pc_report.empty()) {
        EstimateReport rep = in.bioassay ? log_ml_bioassay(res.weights, *in.bioassay) : res.report;
        rep.wall_time_seconds = res.report.wall_time_seconds;
        std::ofstream os(pc_report);
        if (!os) throw std::runtime_error("cannot write " + pc_report);
        if (as_json) {
          os << dump(to_json(rep), "perms-compute", c);
        } else {
          Csv t({"S", "log_ml", "num_nonzero", "proportion_nonzero", "wall_time_seconds"});
          t.row(rep.S, rep.log_ml, rep.num_nonzero, rep.proportion_nonzero, rep.wall_time_seconds);
          os << t.str();
        }
      }
    } else if (oc->parsed()) {
      OracleCheck r = oracle_check_samples(oc_nmax, oc_cases, c.seed);
      if (oc_exhaustive > 0) {
        const OracleCheck e = oracle_check_exhaustive(oc_exhaustive);
        r.cases += e.cases;
        r.mismatches += e.mismatches;
        r.max_abs_error = std::max(r.max_abs_error, e.max_abs_error);
      }
      if (as_json) {
        emit(c, dump(to_json(r), "oracle-check", c));
      } else {
        Csv t({"cases", "mismatches", "max_abs_error"});
        t.row(r.cases, r.mismatches, r.max_abs_error);
        emit(c, t.str());
      }
      return r.mismatches == 0 ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
