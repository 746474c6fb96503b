#pragma once

#include <json.hpp>

#include <cstddef>
#include <vector>

namespace adasmooth {

//! One stage of the derivative-order search: the order d of the curves the
//! exponent was computed on, the raw log-ratio and its clamped value.
struct RegularityStage
{
  std::size_t d = 0;
  double h_raw = 0.0;
  double h_clamped = 0.0;
  bool degenerate = false;
};

//! Local regularity at t0: derivative order, Hölder exponent of that
//! derivative, noise variance and local Hölder constant.
struct RegularityEstimate
{
  double t0 = 0.0;
  std::size_t d_hat = 0;
  double h_hat = 0.0;
  double sigma2_hat = 0.0;
  double l_hat = 0.0;
  std::size_t k0 = 0;
  std::size_t k = 0;
  bool degenerate = false;
  std::vector<RegularityStage> iterations;

  double regularity() const { return static_cast<double>(d_hat) + h_hat; }
};

void to_json(nlohmann::json& j, const RegularityEstimate& e);
void from_json(const nlohmann::json& j, RegularityEstimate& e);

} // namespace adasmooth
