#pragma once

#include "adasmooth/curve.hpp"
#include "adasmooth/estimate.hpp"
#include "adasmooth/kernel.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace adasmooth {

inline constexpr double trim_exponent = 5.0 / 12.0;
//! Floor applied to a degenerate regularity before it enters the bandwidth
//! or trimming exponents.
inline constexpr double regularity_floor = 0.1;

enum class Guard
{
  none,
  eigen,
  trim
};

const char* to_string(Guard g);

struct SmootherSpec
{
  std::size_t degree = 0;
  double regularity = 0.5;
  double plug_in_c = 1.0;
  Kernel kernel = Kernel::epanechnikov();
  //! Clamp outputs into [-tau^{5/12}(M), tau^{5/12}(M)].
  bool trim = true;
};

struct FitDiagnostics
{
  double bandwidth = 0.0;
  double lambda_min = 0.0;
  std::size_t n_in_window = 0;
  Guard guard_triggered = Guard::none;
};

struct FitResult
{
  double estimate = 0.0;
  FitDiagnostics diag;
};

//! C = sigma2 ||K||^2 floor(s)! / (s L int |K||v|^s), s the regularity.
//! Throws ZeroHolderConstant when l_hat is zero.
double plug_in_constant(double sigma2, double l_hat, double regularity,
                        const Kernel& kernel);

//! (c / m)^{1 / (2 regularity + 1)}.
double bandwidth(double c, std::size_t m, double regularity);

//! 1 / log(m): the smallest eigenvalue of the design matrix must exceed it.
double eigen_floor(std::size_t m);

//! tau(m)^{5/12} with tau(y) = log^{-2}(y) (y / log y)^{2s/(2s+1)}; +inf for
//! m < 3, where the bound is not used.
double trim_bound(std::size_t m, double regularity);

//! Weighted least-squares fit of a degree-`degree` polynomial in
//! u = (t - t0) / h with basis (1, u, ..., u^d / d!) and kernel weights.
inline constexpr std::size_t max_degree = 5;
using Coefficients = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, max_degree + 1, 1>;

struct LocalPolynomialFit
{
  Coefficients coefficients; //!< theta; empty when A is numerically singular
  double lambda_min = 0.0;
  std::size_t n_in_window = 0;
  bool accepted = false;        //!< lambda_min > eigen_floor(M)
};

inline constexpr std::size_t no_skip = std::numeric_limits<std::size_t>::max();

//! Solves the normal equations A theta = a built from sorted `times`. The
//! observation at index `skip` is left out (and M reduced by one), which is
//! what leave-one-out cross-validation needs.
LocalPolynomialFit local_polynomial(std::span<const double> times,
                                    std::span<const double> values, double t0,
                                    double h, std::size_t degree,
                                    const Kernel& kernel,
                                    std::size_t skip = no_skip);

//! Equivalent-kernel weights W_m such that the degree-d estimate at t0 is
//! sum_m W_m Y_m. Empty when A is numerically singular; the eigenvalue
//! guard is not applied here.
std::vector<double> lp_weights(std::span<const double> times, double t0,
                               double h, std::size_t degree,
                               const Kernel& kernel);

//! Safeguarded estimate of X(t0) from one curve.
FitResult fit_at(const Curve& curve, double t0, const SmootherSpec& spec,
                 double h);

//! Builds the shared smoother configuration from a regularity estimate.
SmootherSpec smoother_spec_from(const RegularityEstimate& reg,
                                const Kernel& kernel = Kernel::epanechnikov(),
                                bool trim = true);

struct SmoothedCell
{
  std::string curve_id;
  std::size_t curve_index = 0;
  double t0 = 0.0;
  double estimate = 0.0;
  FitDiagnostics diag;
  bool failed = false;
  std::string error;
};

struct SmoothingResult
{
  SmootherSpec spec;
  std::vector<SmoothedCell> cells; //!< curve-major order
};

//! Smooths every curve at every t0 with h = bandwidth(C, M_n, s). An empty
//! `t0s` means each curve's own observation times. Cell-level failures are
//! recorded, not thrown.
SmoothingResult smooth_online(std::span<const Curve> online,
                              const SmootherSpec& spec,
                              std::span<const double> t0s,
                              unsigned threads = 0);

SmoothingResult smooth_online(std::span<const Curve> online,
                              const RegularityEstimate& reg,
                              std::span<const double> t0s,
                              unsigned threads = 0);

//! CSV with header curve_id,t0,estimate,bandwidth,lambda_min,guard.
std::string to_csv(const SmoothingResult& result);
nlohmann::json to_json(const SmoothingResult& result);

} // namespace adasmooth
