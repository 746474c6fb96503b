#include "adasmooth/bench.hpp"

#include "adasmooth/errors.hpp"
#include "adasmooth/format.hpp"
#include "adasmooth/log.hpp"
#include "adasmooth/lp_smoother.hpp"
#include "adasmooth/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace adasmooth {

double
risk_max(std::span<const double> estimates, std::span<const double> truths)
{
  if (estimates.size() != truths.size()) {
    throw LengthMismatch("estimates and truths differ in length");
  }
  if (estimates.empty()) {
    throw EmptySample("risk_max needs at least one curve");
  }
  double r = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    double e = estimates[i] - truths[i];
    r = std::max(r, e * e);
  }
  return r;
}

double
residual_ratio(const Curve& curve, std::span<const double> xa,
               std::span<const double> xb)
{
  if (xa.size() != curve.size() || xb.size() != curve.size()) {
    throw LengthMismatch("fitted values must match the curve length");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t m = 0; m < curve.size(); ++m) {
    double a = curve.values[m] - xa[m];
    double b = curve.values[m] - xb[m];
    num += a * a;
    den += b * b;
  }
  if (!(den > 0.0)) {
    throw ZeroDenominator("reference fit interpolates the observations");
  }
  return num / den;
}

double
quantile(std::vector<double> values, double p)
{
  if (values.empty()) {
    return std::nan("");
  }
  std::sort(values.begin(), values.end());
  double pos = p * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double w = pos - static_cast<double>(lo);
  return values[lo] + w * (values[hi] - values[lo]);
}

Quantiles
summarize_quantiles(std::span<const double> values)
{
  std::vector<double> v(values.begin(), values.end());
  return { quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75) };
}

namespace {

double
seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
    .count();
}

ReplicationRecord
run_replication(const SimulationSpec& spec, std::span<const double> t0s,
                std::size_t r, bool with_cv, const BenchOptions& options)
{
  using clock = std::chrono::steady_clock;
  ReplicationRecord rec;
  rec.replication = r;
  SimulationOptions sim = options.simulation;
  sim.eval_times.assign(t0s.begin(), t0s.end());
  sim.threads = 1;
  auto learning_truth =
    simulate_curves(spec, Role::learning, spec.n_learning, sim, r);
  auto online_truth = simulate_curves(spec, Role::online, spec.n_online, sim, r);
  auto sample = summarize(curves_of(learning_truth));
  learning_truth.clear();
  auto online = curves_of(online_truth);

  for (std::size_t i = 0; i < t0s.size(); ++i) {
    double t0 = t0s[i];
    auto start = clock::now();
    auto reg = estimate_regularity(sample, t0, options.regularity);
    rec.regularity_seconds += seconds_since(start);
    rec.flagged = rec.flagged || reg.degenerate;

    std::vector<double> truth(online.size());
    for (std::size_t n = 0; n < online.size(); ++n) {
      truth[n] = online_truth[n].eval_values[i];
    }

    start = clock::now();
    auto sspec = smoother_spec_from(reg, options.regularity.kernel, options.trim);
    double one_t0[] = { t0 };
    auto smoothed = smooth_online(online, sspec, one_t0, 1);
    rec.method_seconds += seconds_since(start);
    std::vector<double> est(online.size());
    double mse = 0.0;
    for (std::size_t n = 0; n < online.size(); ++n) {
      const auto& cell = smoothed.cells[n];
      if (cell.failed) {
        throw NumericalError("smoothing failed on curve " + cell.curve_id +
                             ": " + cell.error);
      }
      est[n] = cell.estimate;
      double e = est[n] - truth[n];
      mse += e * e;
    }
    rec.risk_method.push_back(risk_max(est, truth));
    rec.mse_method.push_back(mse / static_cast<double>(online.size()));

    if (with_cv) {
      CvOptions cvo;
      cvo.degree = reg.d_hat;
      cvo.kernel = options.regularity.kernel;
      cvo.grid_size = options.cv_grid_size;
      cvo.threads = 1;
      start = clock::now();
      auto cv = cv_smooth(online, one_t0, cvo);
      rec.cv_seconds += seconds_since(start);
      std::vector<double> cv_est(online.size());
      for (std::size_t n = 0; n < online.size(); ++n) {
        cv_est[n] = cv.fits[n][0].estimate;
      }
      rec.risk_cv.push_back(risk_max(cv_est, truth));
    }
    rec.regularity.push_back(reg);
  }
  return rec;
}

} // namespace

RiskReport
run_benchmark(const SimulationSpec& spec, std::span<const double> t0s,
              std::size_t replications, bool with_cv,
              const BenchOptions& options)
{
  if (replications == 0) {
    throw DataError("replications must be at least 1");
  }
  if (t0s.empty()) {
    throw DataError("benchmark needs at least one t0");
  }
  for (double t0 : t0s) {
    if (!(t0 >= 0.0 && t0 <= 1.0)) {
      throw DataError("t0 = " + format_double(t0) + " outside [0, 1]");
    }
  }
  validate(spec);
  auto wall = std::chrono::steady_clock::now();
  RiskReport report;
  report.spec = spec;
  report.t0s.assign(t0s.begin(), t0s.end());
  report.replications = replications;
  report.with_cv = with_cv;
  report.records.resize(replications);
  parallel_for(replications, options.threads, [&](std::size_t r) {
    try {
      report.records[r] = run_replication(spec, t0s, r, with_cv, options);
    } catch (const Error& e) {
      ReplicationRecord rec;
      rec.replication = r;
      rec.failed = true;
      rec.error = e.what();
      log_warn("replication " + std::to_string(r) + " failed: " + e.what());
      report.records[r] = std::move(rec);
    }
  });

  for (const auto& rec : report.records) {
    if (rec.failed) {
      ++report.n_failed;
      continue;
    }
    report.n_flagged += rec.flagged ? 1 : 0;
    report.timing.regularity_seconds += rec.regularity_seconds;
    report.timing.method_seconds += rec.method_seconds;
    report.timing.cv_seconds += rec.cv_seconds;
  }
  for (std::size_t i = 0; i < t0s.size(); ++i) {
    std::vector<double> m, c, h;
    std::map<std::size_t, std::size_t> d_counts;
    for (const auto& rec : report.records) {
      if (rec.failed) {
        continue;
      }
      m.push_back(rec.risk_method[i]);
      if (with_cv) {
        c.push_back(rec.risk_cv[i]);
      }
      h.push_back(rec.regularity[i].h_hat);
      ++d_counts[rec.regularity[i].d_hat];
    }
    RiskSummary s;
    s.t0 = t0s[i];
    s.method = summarize_quantiles(m);
    if (with_cv) {
      s.cv = summarize_quantiles(c);
    }
    s.h_hat = summarize_quantiles(h);
    std::size_t best = 0;
    for (const auto& [d, count] : d_counts) {
      if (count > best) {
        best = count;
        s.d_hat_mode = d;
      }
    }
    if (!m.empty()) {
      s.d_hat_mode_share = static_cast<double>(best) / static_cast<double>(m.size());
    }
    report.summaries.push_back(s);
  }
  if (with_cv && report.timing.method_seconds > 0.0) {
    report.timing.speedup = report.timing.cv_seconds / report.timing.method_seconds;
  }
  report.timing.wall_seconds = seconds_since(wall);
  return report;
}

namespace {

nlohmann::json
quantiles_json(const Quantiles& q)
{
  return { { "q25", q.q25 }, { "median", q.median }, { "q75", q.q75 } };
}

} // namespace

nlohmann::json
to_json(const RiskReport& report, bool include_timing)
{
  nlohmann::json j;
  j["spec"] = report.spec;
  j["t0s"] = report.t0s;
  j["replications"] = report.replications;
  j["with_cv"] = report.with_cv;
  j["n_failed"] = report.n_failed;
  j["n_flagged"] = report.n_flagged;
  auto summaries = nlohmann::json::array();
  for (const auto& s : report.summaries) {
    nlohmann::json e = { { "t0", s.t0 },
                         { "risk_max", quantiles_json(s.method) },
                         { "h_hat", quantiles_json(s.h_hat) },
                         { "d_hat_mode", s.d_hat_mode },
                         { "d_hat_mode_share", s.d_hat_mode_share } };
    if (report.with_cv) {
      e["risk_max_cv"] = quantiles_json(s.cv);
    }
    summaries.push_back(e);
  }
  j["summary"] = summaries;
  auto records = nlohmann::json::array();
  for (const auto& rec : report.records) {
    nlohmann::json e = { { "replication", rec.replication },
                         { "failed", rec.failed } };
    if (rec.failed) {
      e["error"] = rec.error;
    } else {
      e["flagged"] = rec.flagged;
      e["regularity"] = rec.regularity;
      e["risk_max"] = rec.risk_method;
      e["mse"] = rec.mse_method;
      if (report.with_cv) {
        e["risk_max_cv"] = rec.risk_cv;
      }
      if (include_timing) {
        e["timing"] = { { "regularity_seconds", rec.regularity_seconds },
                        { "method_seconds", rec.method_seconds },
                        { "cv_seconds", rec.cv_seconds } };
      }
    }
    records.push_back(e);
  }
  j["records"] = records;
  if (include_timing) {
    j["timing"] = { { "regularity_seconds", report.timing.regularity_seconds },
                    { "method_seconds", report.timing.method_seconds },
                    { "cv_seconds", report.timing.cv_seconds },
                    { "speedup", report.timing.speedup },
                    { "wall_seconds", report.timing.wall_seconds } };
  }
  return j;
}

std::string
to_csv(const RiskReport& report, bool include_timing)
{
  std::ostringstream out;
  out << "replication,t0,method,risk,seconds\n";
  auto secs = [&](double s, std::size_t n) {
    return include_timing ? format_double(s / static_cast<double>(n))
                          : std::string();
  };
  std::size_t nt = report.t0s.size();
  for (const auto& rec : report.records) {
    if (rec.failed) {
      continue;
    }
    for (std::size_t i = 0; i < nt; ++i) {
      out << rec.replication << ',' << format_double(report.t0s[i])
          << ",adaptive," << format_double(rec.risk_method[i]) << ','
          << secs(rec.method_seconds, nt) << '\n';
      if (report.with_cv) {
        out << rec.replication << ',' << format_double(report.t0s[i]) << ",cv,"
            << format_double(rec.risk_cv[i]) << ',' << secs(rec.cv_seconds, nt)
            << '\n';
      }
    }
  }
  return out.str();
}

} // namespace adasmooth
