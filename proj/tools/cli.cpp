#include "cli.hpp"

#include "adasmooth/bench.hpp"
#include "adasmooth/curve_io.hpp"
#include "adasmooth/cv.hpp"
#include "adasmooth/errors.hpp"
#include "adasmooth/format.hpp"
#include "adasmooth/log.hpp"
#include "adasmooth/lp_smoother.hpp"
#include "adasmooth/regularity.hpp"
#include "adasmooth/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace adasmooth::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

json
load_config(const std::string& path)
{
  if (path.empty()) {
    return json::object();
  }
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open config file '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!j.is_object()) {
    throw DataError(path + ": config must be a JSON object");
  }
  return j;
}

template<class T>
void
set_if(json& j, const char* key, const CLI::Option* opt, const T& value)
{
  if (opt->count() > 0) {
    j[key] = value;
  }
}

// One value means a constant; n values split [0, 1] into n equal segments.
json
segments_json(const std::vector<double>& v)
{
  if (v.size() == 1) {
    return v.front();
  }
  json arr = json::array();
  for (std::size_t i = 0; i < v.size(); ++i) {
    double until = i + 1 == v.size()
                     ? 1.0
                     : static_cast<double>(i + 1) / static_cast<double>(v.size());
    arr.push_back({ until, v[i] });
  }
  return arr;
}

std::vector<double>
t0s_from(const json& j, const char* key = "t0")
{
  std::vector<double> t0s;
  if (!j.contains(key)) {
    return t0s;
  }
  const auto& v = j.at(key);
  if (v.is_number()) {
    t0s.push_back(v.get<double>());
  } else {
    t0s = v.get<std::vector<double>>();
  }
  for (double t : t0s) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw UsageError("t0 = " + format_double(t) + " outside [0, 1]");
    }
  }
  return t0s;
}

std::string
required_string(const json& j, const char* key, const char* flag)
{
  if (!j.contains(key)) {
    throw UsageError(std::string(flag) + " is required");
  }
  return j.at(key).get<std::string>();
}

void
write_text(const std::string& path, const std::string& text)
{
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write '" + path + "'");
  }
  out << text;
}

LagRule
parse_lag_rule(const std::string& s)
{
  if (s == "k0") {
    return LagRule::k0_lag;
  }
  if (s == "theorem") {
    return LagRule::theorem;
  }
  throw UsageError("unknown lag rule '" + s + "' (expected k0 or theorem)");
}

RegularityConfig
regularity_config_from(const json& j)
{
  RegularityConfig cfg;
  if (j.contains("d_max")) {
    cfg.d_max = j.at("d_max").get<std::size_t>();
  }
  if (j.contains("known_sigma2") && !j.at("known_sigma2").is_null()) {
    cfg.known_sigma2 = j.at("known_sigma2").get<double>();
  }
  if (j.contains("sigma2_mode")) {
    auto mode = j.at("sigma2_mode").get<std::string>();
    if (mode != "local" && mode != "global") {
      throw UsageError("sigma2 mode must be local or global");
    }
    cfg.sigma2_local = mode == "local";
  }
  if (j.contains("lag_rule")) {
    cfg.lag_rule = parse_lag_rule(j.at("lag_rule").get<std::string>());
  }
  if (j.contains("kernel")) {
    cfg.kernel = kernel_by_name(j.at("kernel").get<std::string>());
  }
  return cfg;
}

// Options shared by simulate and benchmark.
struct SimulationFlags
{
  std::string setting, sampling;
  std::vector<double> hurst, sigma2;
  std::size_t n0 = 0, n1 = 0;
  double mu = 0.0;
  std::uint64_t seed = 0;
  CLI::Option *o_setting, *o_sampling, *o_hurst, *o_sigma2, *o_n0, *o_n1,
    *o_mu, *o_seed;

  void add(CLI::App* app)
  {
    o_setting = app->add_option("--setting", setting,
                                "fbm | piecewise_fbm | integrated_fbm");
    o_hurst = app->add_option("--hurst", hurst,
                              "Hurst exponent, or one per equal segment")
                ->delimiter(',');
    o_n0 = app->add_option("--n0", n0, "number of learning curves");
    o_n1 = app->add_option("--n1", n1, "number of online curves");
    o_mu = app->add_option("--mu", mu, "mean number of points per curve");
    o_sampling = app->add_option("--sampling", sampling, "unif | equi");
    o_sigma2 = app->add_option("--sigma2", sigma2,
                               "noise variance, or one per equal segment")
                 ->delimiter(',');
    o_seed = app->add_option("--seed", seed, "root random seed");
  }

  void merge_into(json& j) const
  {
    set_if(j, "setting", o_setting, setting);
    if (o_hurst->count() > 0) {
      j["hurst"] = segments_json(hurst);
    }
    set_if(j, "n_learning", o_n0, n0);
    set_if(j, "n_online", o_n1, n1);
    set_if(j, "mu", o_mu, mu);
    set_if(j, "sampling", o_sampling, sampling);
    if (o_sigma2->count() > 0) {
      j["sigma2"] = segments_json(sigma2);
    }
    set_if(j, "seed", o_seed, seed);
  }
};

SimulationSpec
spec_from(const json& j)
{
  if (!j.contains("seed")) {
    throw UsageError("--seed is required");
  }
  SimulationSpec spec = j.get<SimulationSpec>();
  validate(spec);
  return spec;
}

std::string
truth_csv(const std::vector<GroundTruthCurve>& curves,
          const std::vector<double>& eval_times,
          const std::vector<double>& grid_times)
{
  std::ostringstream out;
  out << "curve_id,kind,t,x\n";
  for (const auto& c : curves) {
    for (std::size_t m = 0; m < c.curve.size(); ++m) {
      out << c.curve.id << ",obs," << format_double(c.curve.times[m]) << ','
          << format_double(c.x_true[m]) << '\n';
    }
    for (std::size_t i = 0; i < eval_times.size(); ++i) {
      out << c.curve.id << ",eval," << format_double(eval_times[i]) << ','
          << format_double(c.eval_values[i]) << '\n';
    }
    for (std::size_t i = 0; i < grid_times.size(); ++i) {
      out << c.curve.id << ",grid," << format_double(grid_times[i]) << ','
          << format_double(c.grid_values[i]) << '\n';
    }
  }
  return out.str();
}

// Subcommands -----------------------------------------------------------

struct SimulateCmd
{
  std::string config, out, format = "csv";
  std::size_t grid_size = 2001;
  std::vector<double> t0s;
  unsigned threads = 0;
  SimulationFlags sim;
  CLI::Option *o_out, *o_format, *o_grid, *o_t0;

  void add(CLI::App& app)
  {
    auto* sub = app.add_subcommand("simulate", "generate learning and online sets");
    sub->add_option("--config", config, "JSON config; flags override it");
    sim.add(sub);
    o_out = sub->add_option("--out", out, "output directory");
    o_format = sub->add_option("--format", format, "csv | json")
                 ->check(CLI::IsMember({ "csv", "json" }));
    o_grid = sub->add_option("--grid-size", grid_size,
                             "points of the dense truth grid (0 disables)");
    o_t0 = sub->add_option("--t0", t0s, "extra points where truth is stored")
             ->delimiter(',');
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->callback([this] { run(); });
  }

  void run()
  {
    json j = load_config(config);
    sim.merge_into(j);
    set_if(j, "out", o_out, out);
    set_if(j, "format", o_format, format);
    set_if(j, "grid_size", o_grid, grid_size);
    set_if(j, "t0", o_t0, t0s);
    auto spec = spec_from(j);
    fs::path dir = required_string(j, "out", "--out");
    std::string fmt = j.value("format", std::string("csv"));
    if (fmt != "csv" && fmt != "json") {
      throw UsageError("format must be csv or json");
    }
    SimulationOptions opts;
    opts.eval_times = t0s_from(j);
    opts.dense_grid_size = j.value("grid_size", std::size_t{ 2001 });
    opts.threads = threads;
    auto data = simulate(spec, opts);
    fs::create_directories(dir);
    std::string ext = "." + fmt;
    write_curves((dir / ("learning" + ext)).string(), curves_of(data.learning));
    write_curves((dir / ("online" + ext)).string(), curves_of(data.online));
    write_text((dir / "learning_truth.csv").string(),
               truth_csv(data.learning, data.eval_times, data.grid_times));
    write_text((dir / "online_truth.csv").string(),
               truth_csv(data.online, data.eval_times, data.grid_times));
  }
};

struct EstimateCmd
{
  std::string config, learning, out, sigma2_mode, lag_rule, kernel;
  std::vector<double> t0s;
  std::size_t d_max = 2;
  double known_sigma2 = 0.0, interval_length = 1.0;
  unsigned threads = 0;
  CLI::Option *o_learning, *o_out, *o_t0, *o_dmax, *o_known, *o_mode, *o_lag,
    *o_kernel, *o_interval;

  void add(CLI::App& app)
  {
    auto* sub = app.add_subcommand("estimate", "estimate local regularity");
    sub->add_option("--config", config, "JSON config; flags override it");
    o_learning = sub->add_option("--learning", learning, "learning curves file");
    o_t0 = sub->add_option("--t0", t0s, "points in [0, 1]")->delimiter(',');
    o_dmax = sub->add_option("--d-max", d_max, "largest derivative order");
    o_known = sub->add_option("--known-sigma2", known_sigma2,
                              "use the known-variance estimator");
    o_mode = sub->add_option("--sigma2-mode", sigma2_mode, "local | global");
    o_lag = sub->add_option("--lag-rule", lag_rule, "k0 | theorem");
    o_kernel = sub->add_option("--kernel", kernel, "smoothing kernel");
    o_interval = sub->add_option("--interval-length", interval_length,
                                 "length of the observation interval");
    o_out = sub->add_option("--out", out, "output JSON (default stdout)");
    sub->add_option("--threads", threads, "unused; accepted for symmetry");
    sub->callback([this] { run(); });
  }

  void run()
  {
    json j = load_config(config);
    set_if(j, "learning", o_learning, learning);
    set_if(j, "t0", o_t0, t0s);
    set_if(j, "d_max", o_dmax, d_max);
    set_if(j, "known_sigma2", o_known, known_sigma2);
    set_if(j, "sigma2_mode", o_mode, sigma2_mode);
    set_if(j, "lag_rule", o_lag, lag_rule);
    set_if(j, "kernel", o_kernel, kernel);
    set_if(j, "interval_length", o_interval, interval_length);
    set_if(j, "out", o_out, out);
    auto points = t0s_from(j);
    if (points.empty()) {
      throw UsageError("--t0 is required");
    }
    auto cfg = regularity_config_from(j);
    auto sample = summarize(read_curves(required_string(j, "learning", "--learning")),
                            j.value("interval_length", 1.0));
    json result = json::array();
    for (double t0 : points) {
      result.push_back(estimate_regularity(sample, t0, cfg));
    }
    write_text(j.value("out", std::string()), result.dump(2) + "\n");
  }
};

std::vector<RegularityEstimate>
read_estimates(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open '" + path + "'");
  }
  json j;
  try {
    in >> j;
    std::vector<RegularityEstimate> out;
    if (j.is_array()) {
      for (const auto& e : j) {
        out.push_back(e.get<RegularityEstimate>());
      }
    } else {
      out.push_back(j.get<RegularityEstimate>());
    }
    return out;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

struct SmoothCmd
{
  std::string config, online, estimate, out, kernel, format = "csv";
  std::size_t degree = 0;
  bool at_times = false, trim = false;
  unsigned threads = 0;
  CLI::Option *o_online, *o_estimate, *o_out, *o_kernel, *o_degree, *o_trim,
    *o_format, *o_at;

  void add(CLI::App& app)
  {
    auto* sub = app.add_subcommand("smooth", "denoise online curves");
    sub->add_option("--config", config, "JSON config; flags override it");
    o_online = sub->add_option("--online", online, "online curves file");
    o_estimate = sub->add_option("--estimate", estimate,
                                 "regularity JSON written by 'estimate'");
    o_degree = sub->add_option("--degree", degree,
                               "polynomial degree (at least the estimated order)");
    o_kernel = sub->add_option("--kernel", kernel, "smoothing kernel");
    o_trim = sub->add_flag("--trim,!--no-trim", trim, "clamp extreme outputs");
    o_at = sub->add_flag("--at-times", at_times,
                         "evaluate at each curve's own times (single estimate)");
    o_format = sub->add_option("--format", format, "csv | json")
                 ->check(CLI::IsMember({ "csv", "json" }));
    o_out = sub->add_option("--out", out, "output file (default stdout)");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->callback([this] { run(); });
  }

  void run()
  {
    json j = load_config(config);
    set_if(j, "online", o_online, online);
    set_if(j, "estimate", o_estimate, estimate);
    set_if(j, "degree", o_degree, degree);
    set_if(j, "kernel", o_kernel, kernel);
    set_if(j, "trim", o_trim, trim);
    set_if(j, "at_times", o_at, at_times);
    set_if(j, "format", o_format, format);
    set_if(j, "out", o_out, out);
    auto curves = read_curves(required_string(j, "online", "--online"));
    auto estimates = read_estimates(required_string(j, "estimate", "--estimate"));
    if (estimates.empty()) {
      throw DataError("estimate file holds no estimates");
    }
    bool own_times = j.value("at_times", false);
    if (own_times && estimates.size() != 1) {
      throw UsageError("--at-times needs exactly one estimate");
    }
    Kernel k = kernel_by_name(j.value("kernel", std::string("epanechnikov")));
    bool use_trim = j.value("trim", false);
    SmoothingResult all;
    for (const auto& e : estimates) {
      auto spec = smoother_spec_from(e, k, use_trim);
      if (j.contains("degree")) {
        auto d = j.at("degree").get<std::size_t>();
        if (d < e.d_hat || d > max_degree) {
          throw DataError("requested degree " + std::to_string(d) +
                          " does not match estimated order " +
                          std::to_string(e.d_hat) + " at t0=" +
                          format_double(e.t0));
        }
        spec.degree = d;
      }
      std::vector<double> points;
      if (!own_times) {
        points.push_back(e.t0);
      }
      auto r = smooth_online(curves, spec, points, threads);
      all.spec = r.spec;
      for (auto& c : r.cells) {
        all.cells.push_back(std::move(c));
      }
    }
    std::string fmt = j.value("format", std::string("csv"));
    write_text(j.value("out", std::string()),
               fmt == "json" ? to_json(all).dump(2) + "\n" : to_csv(all));
  }
};

struct CvCmd
{
  std::string config, online, out, scores, kernel;
  std::vector<double> t0s, grid;
  std::size_t degree = 0, grid_size = 20;
  bool timing = false;
  unsigned threads = 0;
  CLI::Option *o_online, *o_out, *o_scores, *o_kernel, *o_t0, *o_grid,
    *o_degree, *o_grid_size;

  void add(CLI::App& app)
  {
    auto* sub = app.add_subcommand("cv", "per-curve cross-validated smoothing");
    sub->add_option("--config", config, "JSON config; flags override it");
    o_online = sub->add_option("--online", online, "online curves file");
    o_t0 = sub->add_option("--t0", t0s, "points in [0, 1] (default: own times)")
             ->delimiter(',');
    o_degree = sub->add_option("--degree", degree, "polynomial degree");
    o_grid_size = sub->add_option("--grid-size", grid_size,
                                  "size of the default log-spaced grid");
    o_grid = sub->add_option("--grid", grid, "explicit bandwidth grid")
               ->delimiter(',');
    o_kernel = sub->add_option("--kernel", kernel, "smoothing kernel");
    o_out = sub->add_option("--out", out, "estimates CSV (default stdout)");
    o_scores = sub->add_option("--scores", scores, "per-curve CV scores JSON");
    sub->add_flag("--timing", timing, "include wall-clock seconds in scores");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->callback([this] { run(); });
  }

  void run()
  {
    json j = load_config(config);
    set_if(j, "online", o_online, online);
    set_if(j, "t0", o_t0, t0s);
    set_if(j, "degree", o_degree, degree);
    set_if(j, "grid_size", o_grid_size, grid_size);
    set_if(j, "grid", o_grid, grid);
    set_if(j, "kernel", o_kernel, kernel);
    set_if(j, "out", o_out, out);
    set_if(j, "scores", o_scores, scores);
    auto curves = read_curves(required_string(j, "online", "--online"));
    auto points = t0s_from(j);
    CvOptions opt;
    opt.degree = j.value("degree", std::size_t{ 0 });
    if (opt.degree > max_degree) {
      throw UsageError("degree must not exceed " + std::to_string(max_degree));
    }
    opt.grid_size = j.value("grid_size", std::size_t{ 20 });
    if (j.contains("grid")) {
      opt.grid = j.at("grid").get<std::vector<double>>();
    }
    opt.kernel = kernel_by_name(j.value("kernel", std::string("epanechnikov")));
    opt.threads = threads;
    auto result = cv_smooth(curves, points, opt);
    write_text(j.value("out", std::string()), to_csv(result, curves, points));
    if (j.contains("scores")) {
      json arr = json::array();
      for (const auto& r : result.per_curve) {
        json e = to_json(r);
        if (!timing) {
          e.erase("seconds");
        }
        arr.push_back(e);
      }
      write_text(j.at("scores").get<std::string>(), arr.dump(2) + "\n");
    }
  }
};

struct BenchmarkCmd
{
  std::string config, out, lag_rule;
  std::vector<double> t0s;
  std::size_t replications = 100, cv_grid_size = 20, d_max = 2,
              fine_intervals = 16384;
  double known_sigma2 = 0.0;
  bool with_cv = false, trim = false, no_timing = false;
  unsigned threads = 0;
  SimulationFlags sim;
  CLI::Option *o_out, *o_t0, *o_reps, *o_cv, *o_grid, *o_trim, *o_lag, *o_dmax,
    *o_known, *o_fine;

  void add(CLI::App& app)
  {
    auto* sub = app.add_subcommand("benchmark", "Monte-Carlo risk study");
    sub->add_option("--config", config, "JSON config; flags override it");
    sim.add(sub);
    o_t0 = sub->add_option("--t0", t0s, "points in [0, 1]")->delimiter(',');
    o_reps = sub->add_option("--replications", replications, "replications");
    o_cv = sub->add_flag("--with-cv", with_cv, "also run per-curve CV");
    o_grid = sub->add_option("--cv-grid-size", cv_grid_size, "CV grid size");
    o_trim = sub->add_flag("--trim,!--no-trim", trim, "clamp extreme outputs");
    o_lag = sub->add_option("--lag-rule", lag_rule, "k0 | theorem");
    o_dmax = sub->add_option("--d-max", d_max, "largest derivative order");
    o_known = sub->add_option("--known-sigma2", known_sigma2,
                              "use the known-variance estimator");
    o_fine = sub->add_option("--fine-intervals", fine_intervals,
                             "resolution of the online truth path");
    o_out = sub->add_option("--out", out, "output directory");
    sub->add_flag("--no-timing", no_timing, "omit wall-clock fields");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->callback([this] { run(); });
  }

  int status = exit_ok;

  void run()
  {
    json j = load_config(config);
    sim.merge_into(j);
    set_if(j, "t0", o_t0, t0s);
    set_if(j, "replications", o_reps, replications);
    set_if(j, "with_cv", o_cv, with_cv);
    set_if(j, "cv_grid_size", o_grid, cv_grid_size);
    set_if(j, "trim", o_trim, trim);
    set_if(j, "lag_rule", o_lag, lag_rule);
    set_if(j, "d_max", o_dmax, d_max);
    set_if(j, "known_sigma2", o_known, known_sigma2);
    set_if(j, "fine_intervals", o_fine, fine_intervals);
    set_if(j, "out", o_out, out);
    auto spec = spec_from(j);
    auto points = t0s_from(j);
    if (points.empty()) {
      throw UsageError("--t0 is required");
    }
    fs::path dir = required_string(j, "out", "--out");
    BenchOptions opt;
    opt.regularity = regularity_config_from(j);
    opt.trim = j.value("trim", false);
    opt.cv_grid_size = j.value("cv_grid_size", std::size_t{ 20 });
    opt.simulation.fine_intervals = j.value("fine_intervals", std::size_t{ 16384 });
    opt.threads = threads;
    auto report = run_benchmark(spec, points, j.value("replications", std::size_t{ 100 }),
                                j.value("with_cv", false), opt);
    fs::create_directories(dir);
    write_text((dir / "risk_report.json").string(),
               to_json(report, !no_timing).dump(2) + "\n");
    write_text((dir / "risk.csv").string(), to_csv(report, !no_timing));
    if (report.n_failed > 0) {
      std::cerr << "adasmooth: " << report.n_failed << " of "
                << report.replications << " replications failed\n";
      status = exit_numerical;
    }
  }
};

} // namespace

int
run(int argc, const char* const* argv)
{
  CLI::App app{ "Adaptive denoising of discretely sampled noisy curves" };
  app.require_subcommand(1);
  SimulateCmd simulate_cmd;
  EstimateCmd estimate_cmd;
  SmoothCmd smooth_cmd;
  CvCmd cv_cmd;
  BenchmarkCmd benchmark_cmd;
  simulate_cmd.add(app);
  estimate_cmd.add(app);
  smooth_cmd.add(app);
  cv_cmd.add(app);
  benchmark_cmd.add(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  } catch (const UsageError& e) {
    std::cerr << "adasmooth: " << e.what() << "\n";
    return exit_usage;
  } catch (const NumericalError& e) {
    std::cerr << "adasmooth: numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const DataError& e) {
    std::cerr << "adasmooth: data error: " << e.what() << "\n";
    return exit_data;
  } catch (const json::exception& e) {
    std::cerr << "adasmooth: data error: " << e.what() << "\n";
    return exit_data;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "adasmooth: " << e.what() << "\n";
    return exit_data;
  }
  return benchmark_cmd.status;
}

int
run(const std::vector<std::string>& args)
{
  std::vector<const char*> argv{ "adasmooth" };
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace adasmooth::cli
