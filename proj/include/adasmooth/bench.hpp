#pragma once

#include "adasmooth/curve.hpp"
#include "adasmooth/cv.hpp"
#include "adasmooth/estimate.hpp"
#include "adasmooth/regularity.hpp"
#include "adasmooth/simulate.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace adasmooth {

//! max_n (estimate_n - truth_n)^2.
double risk_max(std::span<const double> estimates, std::span<const double> truths);

//! sum (Y - xa)^2 / sum (Y - xb)^2 over the observations of one curve.
double residual_ratio(const Curve& curve, std::span<const double> xa,
                      std::span<const double> xb);

struct Quantiles
{
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

//! Linearly interpolated sample quantile (the usual "type 7").
double quantile(std::vector<double> values, double p);
Quantiles summarize_quantiles(std::span<const double> values);

struct BenchOptions
{
  RegularityConfig regularity;
  bool trim = false;
  std::size_t cv_grid_size = 20;
  SimulationOptions simulation{ {}, 0, 16384, 4096, 1 };
  unsigned threads = 0;
};

struct ReplicationRecord
{
  std::size_t replication = 0;
  bool failed = false;
  std::string error;
  bool flagged = false; //!< some regularity estimate was degenerate
  std::vector<RegularityEstimate> regularity; //!< per t0
  std::vector<double> risk_method;            //!< per t0
  std::vector<double> mse_method;             //!< per t0, mean over curves
  std::vector<double> risk_cv;                //!< per t0, empty without CV
  double regularity_seconds = 0.0;
  double method_seconds = 0.0;
  double cv_seconds = 0.0;
};

struct RiskSummary
{
  double t0 = 0.0;
  Quantiles method;
  Quantiles cv;
  Quantiles h_hat;
  double d_hat_mode_share = 0.0; //!< share of replications with the modal d_hat
  std::size_t d_hat_mode = 0;
};

struct BenchTiming
{
  double regularity_seconds = 0.0;
  double method_seconds = 0.0;
  double cv_seconds = 0.0;
  double speedup = 0.0; //!< cv_seconds / method_seconds, 0 without CV
  double wall_seconds = 0.0;
};

struct RiskReport
{
  SimulationSpec spec;
  std::vector<double> t0s;
  std::size_t replications = 0;
  bool with_cv = false;
  std::vector<ReplicationRecord> records;
  std::vector<RiskSummary> summaries; //!< per t0, successful replications
  std::size_t n_failed = 0;
  std::size_t n_flagged = 0;
  BenchTiming timing;
};

//! Monte-Carlo study: per replication, simulate the learning and online
//! sets, estimate the regularity at every t0 from the learning set, smooth
//! the online set and record risk_max against the true signal; optionally
//! run per-curve CV on the same online curves. Replication r uses the
//! substreams (spec.seed, r, ...), so results do not depend on scheduling.
RiskReport run_benchmark(const SimulationSpec& spec, std::span<const double> t0s,
                         std::size_t replications, bool with_cv,
                         const BenchOptions& options = {});

nlohmann::json to_json(const RiskReport& report, bool include_timing = true);
//! CSV with header replication,t0,method,risk,seconds; seconds is left
//! empty without timing.
std::string to_csv(const RiskReport& report, bool include_timing = true);

} // namespace adasmooth
