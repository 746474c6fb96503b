#pragma once

#include "adasmooth/curve.hpp"
#include "adasmooth/kernel.hpp"
#include "adasmooth/lp_smoother.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace adasmooth {

struct CvResult
{
  std::string curve_id;
  std::vector<double> bandwidth_grid;
  std::vector<double> cv_scores; //!< +inf where a leave-one-out fit is guarded
  double chosen = 0.0;
  bool ties_broken = false;
  double seconds = 0.0;
};

//! `size` log-spaced bandwidths from 2/m to 0.5.
std::vector<double> default_cv_grid(std::size_t m, std::size_t size = 20);

//! Leave-one-out least-squares score of every grid bandwidth; the smallest
//! minimiser wins. When every score is infinite the largest bandwidth is
//! returned.
CvResult cv_bandwidth(const Curve& curve, std::size_t degree,
                      const Kernel& kernel, std::span<const double> grid);

struct CvOptions
{
  std::size_t degree = 0;
  Kernel kernel = Kernel::epanechnikov();
  //! Shared grid; empty means default_cv_grid(M_n, grid_size) per curve.
  std::vector<double> grid;
  std::size_t grid_size = 20;
  unsigned threads = 0;
};

struct CvSmoothing
{
  std::vector<CvResult> per_curve;
  std::vector<std::vector<FitResult>> fits; //!< [curve][t0]
};

//! Per-curve CV bandwidth followed by an untrimmed fit at every t0 (each
//! curve's own times when t0s is empty).
CvSmoothing cv_smooth(std::span<const Curve> online, std::span<const double> t0s,
                      const CvOptions& options = {});

nlohmann::json to_json(const CvResult& r);
//! CSV with header curve_id,t0,estimate,bandwidth,lambda_min,guard.
std::string to_csv(const CvSmoothing& s, std::span<const Curve> online,
                   std::span<const double> t0s);

} // namespace adasmooth
