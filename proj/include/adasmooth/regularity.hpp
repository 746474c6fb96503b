#pragma once

#include "adasmooth/curve.hpp"
#include "adasmooth/estimate.hpp"
#include "adasmooth/kernel.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace adasmooth {

//! Averaged squared differences of the k-th, (2k-1)-th, (4k-3)-th and
//! (8k-7)-th closest observations, and the matching spacing moments.
//! Curves outside the event contribute zero but are still counted in
//! n_curves.
struct ThetaStats
{
  double theta_k = 0.0;
  double theta_2k1 = 0.0;
  double theta_4k3 = 0.0;
  std::optional<double> eta_k;
  std::optional<double> eta_2k1;
  std::size_t n_effective = 0;
  std::size_t n_curves = 0;
  std::size_t k = 0;
};

//! Pools statistics computed on disjoint sets of curves with the same k
//! (and the same spacing exponent).
ThetaStats merge(const ThetaStats& a, const ThetaStats& b);

//! Values observed at a curve's selected neighbours, in time order.
struct LocalObservations
{
  std::vector<double> times;
  std::vector<double> values;
  bool in_b = false;
};

//! Core computation shared by raw and derivative curves. Each entry of
//! `curves` must hold at least 8k-7 observations when in_b is set.
ThetaStats theta_stats(std::span<const LocalObservations> curves,
                       std::size_t k, std::optional<double> h_exp = {});

//! Statistics read through a window. Throws LagTooLarge when 8k-7 exceeds
//! the window size and NoEffectiveCurves when no curve is in the event.
ThetaStats theta_stats(const Window& window, const FunctionalSample& sample,
                       std::size_t k, std::optional<double> h_exp = {});

struct HurstEstimate
{
  double h = 0.0;        //!< clamped into [0, 1]
  double raw = 0.0;      //!< unclamped log-ratio (0 when degenerate)
  bool degenerate = false;
};

//! log((t4 - t2)/(t2 - t1)) / (2 log 2) when t4 > t2 > t1, else 0 and
//! degenerate.
HurstEstimate estimate_h(const ThetaStats& stats);

//! log((t2 - 2s)/(t1 - 2s)) / (2 log 2) when min(t1, t2) > 2s.
HurstEstimate estimate_h_known_sigma(const ThetaStats& stats, double sigma2);

//! Half the mean squared successive difference. In local mode only the
//! indices whose time lies between the first and last selected time of the
//! window are used (window normally built with k0_hat points).
double estimate_sigma2(const FunctionalSample& sample, const Window& window,
                       bool local);

//! sqrt((t2 - t1) / (eta2 - eta1)) when both differences are positive.
double estimate_l(const ThetaStats& stats);

//! 1 - log^{-2}(mu): above it the trajectories are deemed differentiable.
double smoothness_threshold(double mu_hat);

//! True when h_hat > 1 - log^{-2}(mu_hat).
bool smoothness_test(double h_hat, double mu_hat);

//! How the base lag k (and the neighbourhood size 8k-7) is derived from
//! k0_hat.
enum class LagRule
{
  //! k = floor((k0_hat + 7) / 8); neighbourhood of k0_hat points.
  theorem,
  //! k = k0_hat; neighbourhood of 8 k0_hat - 7 points.
  k0_lag,
};

struct RegularityConfig
{
  std::size_t d_max = 2;
  std::optional<double> known_sigma2;
  bool sigma2_local = true;
  LagRule lag_rule = LagRule::k0_lag;
  Kernel kernel = Kernel::epanechnikov();
};

//! Base lag and neighbourhood size for a given k0_hat.
std::pair<std::size_t, std::size_t> lag_and_window(std::size_t k0_hat,
                                                   LagRule rule);

//! Derivative-order search: estimate H on the raw curves; while the
//! smoothness test rejects, estimate the next derivative of every learning
//! curve by local polynomials at its neighbourhood points and re-estimate H
//! on those pseudo-curves.
RegularityEstimate estimate_regularity(const FunctionalSample& sample,
                                       double t0,
                                       const RegularityConfig& config = {});

} // namespace adasmooth
