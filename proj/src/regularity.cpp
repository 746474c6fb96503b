#include "adasmooth/regularity.hpp"

#include "adasmooth/errors.hpp"
#include "adasmooth/lp_smoother.hpp"

#include <algorithm>
#include <cmath>

namespace adasmooth {

namespace {

constexpr double two_log_two = 2.0 * 0.69314718055994530942;

HurstEstimate
from_log_ratio(double numerator, double denominator)
{
  HurstEstimate out;
  out.raw = (std::log(numerator) - std::log(denominator)) / two_log_two;
  out.h = std::clamp(out.raw, 0.0, 1.0);
  return out;
}

std::vector<LocalObservations>
observe(const Window& window, const FunctionalSample& sample)
{
  std::vector<LocalObservations> out(sample.size());
  for (std::size_t n = 0; n < sample.size(); ++n) {
    const auto& curve = sample.curves[n];
    auto& obs = out[n];
    obs.in_b = window.in_b[n] != 0;
    obs.times.reserve(window.selected[n].size());
    obs.values.reserve(window.selected[n].size());
    for (auto i : window.selected[n]) {
      obs.times.push_back(curve.times[i]);
      obs.values.push_back(curve.values[i]);
    }
  }
  return out;
}

} // namespace

ThetaStats
merge(const ThetaStats& a, const ThetaStats& b)
{
  if (a.k != b.k) {
    throw DataError("cannot merge statistics computed with different lags");
  }
  const double na = static_cast<double>(a.n_curves);
  const double nb = static_cast<double>(b.n_curves);
  const double n = na + nb;
  auto pool = [&](double x, double y) { return (na * x + nb * y) / n; };
  ThetaStats out;
  out.k = a.k;
  out.n_curves = a.n_curves + b.n_curves;
  out.n_effective = a.n_effective + b.n_effective;
  out.theta_k = pool(a.theta_k, b.theta_k);
  out.theta_2k1 = pool(a.theta_2k1, b.theta_2k1);
  out.theta_4k3 = pool(a.theta_4k3, b.theta_4k3);
  if (a.eta_k && b.eta_k) {
    out.eta_k = pool(*a.eta_k, *b.eta_k);
    out.eta_2k1 = pool(*a.eta_2k1, *b.eta_2k1);
  }
  return out;
}

ThetaStats
theta_stats(std::span<const LocalObservations> curves, std::size_t k,
            std::optional<double> h_exp)
{
  if (k == 0) {
    throw DataError("lag k must be positive");
  }
  if (h_exp && !(*h_exp > 0.0 && *h_exp <= 1.0)) {
    throw DataError("spacing exponent must lie in (0, 1]");
  }
  const std::size_t need = 8 * k - 7;
  // 1-based order statistics k, 2k-1, 4k-3, 8k-7
  const std::size_t i1 = k - 1, i2 = 2 * k - 2, i3 = 4 * k - 4, i4 = need - 1;
  ThetaStats s;
  s.k = k;
  s.n_curves = curves.size();
  double eta1 = 0.0, eta2 = 0.0;
  for (const auto& c : curves) {
    if (!c.in_b) {
      continue;
    }
    if (c.values.size() < need) {
      throw LagTooLarge("lag " + std::to_string(k) + " needs " +
                        std::to_string(need) + " neighbours, curve has " +
                        std::to_string(c.values.size()));
    }
    ++s.n_effective;
    const auto& y = c.values;
    const double d1 = y[i2] - y[i1];
    const double d2 = y[i3] - y[i2];
    const double d3 = y[i4] - y[i3];
    s.theta_k += d1 * d1;
    s.theta_2k1 += d2 * d2;
    s.theta_4k3 += d3 * d3;
    if (h_exp) {
      const auto& t = c.times;
      eta1 += std::pow(std::abs(t[i2] - t[i1]), 2.0 * *h_exp);
      eta2 += std::pow(std::abs(t[i3] - t[i2]), 2.0 * *h_exp);
    }
  }
  if (s.n_effective == 0) {
    throw NoEffectiveCurves("no curve has its neighbourhood inside J_mu(t0)");
  }
  const double n = static_cast<double>(s.n_curves);
  s.theta_k /= n;
  s.theta_2k1 /= n;
  s.theta_4k3 /= n;
  if (h_exp) {
    s.eta_k = eta1 / n;
    s.eta_2k1 = eta2 / n;
  }
  return s;
}

ThetaStats
theta_stats(const Window& window, const FunctionalSample& sample,
            std::size_t k, std::optional<double> h_exp)
{
  if (k == 0 || 8 * k - 7 > window.k0) {
    throw LagTooLarge("lag " + std::to_string(k) + " needs " +
                      std::to_string(8 * k - 7) + " neighbours, window has " +
                      std::to_string(window.k0));
  }
  const auto obs = observe(window, sample);
  return theta_stats(obs, k, h_exp);
}

HurstEstimate
estimate_h(const ThetaStats& s)
{
  if (s.theta_4k3 > s.theta_2k1 && s.theta_2k1 > s.theta_k) {
    return from_log_ratio(s.theta_4k3 - s.theta_2k1, s.theta_2k1 - s.theta_k);
  }
  return HurstEstimate{ 0.0, 0.0, true };
}

HurstEstimate
estimate_h_known_sigma(const ThetaStats& s, double sigma2)
{
  if (sigma2 < 0.0) {
    throw NegativeVariance("noise variance must be nonnegative");
  }
  if (std::min(s.theta_2k1, s.theta_k) > 2.0 * sigma2) {
    return from_log_ratio(s.theta_2k1 - 2.0 * sigma2, s.theta_k - 2.0 * sigma2);
  }
  return HurstEstimate{ 0.0, 0.0, true };
}

double
estimate_sigma2(const FunctionalSample& sample, const Window& window,
                bool local)
{
  double total = 0.0;
  for (std::size_t n = 0; n < sample.size(); ++n) {
    const auto& c = sample.curves[n];
    std::size_t first = 1, last = c.size(); // [first, last) in 0-based terms
    if (local) {
      const auto& sel = window.selected[n];
      if (sel.empty()) {
        throw EmptySn("curve '" + c.id + "' has no neighbourhood");
      }
      const double lo = c.times[sel.front()];
      const double hi = c.times[sel.back()];
      first = static_cast<std::size_t>(
        std::lower_bound(c.times.begin(), c.times.end(), lo) - c.times.begin());
      last = static_cast<std::size_t>(
        std::upper_bound(c.times.begin(), c.times.end(), hi) - c.times.begin());
      first = std::max<std::size_t>(first, 1);
    }
    if (last <= first) {
      throw EmptySn("curve '" + c.id + "' has no successive differences in " +
                    (local ? "its neighbourhood" : "the curve"));
    }
    double sum = 0.0;
    for (std::size_t m = first; m < last; ++m) {
      const double d = c.values[m] - c.values[m - 1];
      sum += d * d;
    }
    total += sum / (2.0 * static_cast<double>(last - first));
  }
  return total / static_cast<double>(sample.size());
}

double
estimate_l(const ThetaStats& s)
{
  if (!s.eta_k || !s.eta_2k1) {
    throw DataError("Hölder constant needs spacing moments");
  }
  const double deta = *s.eta_2k1 - *s.eta_k;
  const double dtheta = s.theta_2k1 - s.theta_k;
  if (deta > 0.0 && dtheta > 0.0) {
    return std::sqrt(dtheta / deta);
  }
  return 0.0;
}

double
smoothness_threshold(double mu_hat)
{
  const double l = std::log(mu_hat);
  return 1.0 - 1.0 / (l * l);
}

bool
smoothness_test(double h_hat, double mu_hat)
{
  return h_hat > smoothness_threshold(mu_hat);
}

std::pair<std::size_t, std::size_t>
lag_and_window(std::size_t k0_hat, LagRule rule)
{
  if (rule == LagRule::theorem) {
    return { choose_k(k0_hat), k0_hat };
  }
  return { k0_hat, 8 * k0_hat - 7 };
}

RegularityEstimate
estimate_regularity(const FunctionalSample& sample, double t0,
                    const RegularityConfig& config)
{
  const auto [k, wsize] = lag_and_window(sample.k0_hat, config.lag_rule);
  if (8 * k - 7 > wsize) {
    throw LagTooLarge("k0_hat = " + std::to_string(sample.k0_hat) +
                      " too small for a lag of " + std::to_string(k));
  }
  const Window window = window_at(sample, t0, wsize);
  auto current = observe(window, sample);

  RegularityEstimate est;
  est.t0 = t0;
  est.k0 = sample.k0_hat;
  est.k = k;

  if (config.known_sigma2) {
    if (*config.known_sigma2 < 0.0) {
      throw NegativeVariance("known noise variance must be nonnegative");
    }
    est.sigma2_hat = *config.known_sigma2;
  } else {
    const Window noise_window = window_at(sample, t0, sample.k0_hat);
    est.sigma2_hat = estimate_sigma2(sample, noise_window, config.sigma2_local);
  }

  auto stats = theta_stats(current, k);
  HurstEstimate h = config.known_sigma2
                      ? estimate_h_known_sigma(stats, est.sigma2_hat)
                      : estimate_h(stats);
  std::size_t d = 0;
  est.iterations.push_back({ d, h.raw, h.h, h.degenerate });

  while (smoothness_test(h.h, sample.mu_hat)) {
    if (d >= config.d_max) {
      throw MaxDerivativeExceeded(
        "trajectories still look differentiable after " + std::to_string(d) +
        " derivative(s) at t0=" + std::to_string(t0));
    }
    const double l_one = estimate_l(theta_stats(current, k, 1.0));
    const double s = static_cast<double>(d) + h.h;
    const double c = plug_in_constant(est.sigma2_hat, l_one, s, config.kernel);
    const std::size_t order = d + 1;

    std::vector<LocalObservations> next(sample.size());
    for (std::size_t n = 0; n < sample.size(); ++n) {
      const auto& curve = sample.curves[n];
      auto& obs = next[n];
      obs.in_b = current[n].in_b;
      if (!obs.in_b) {
        continue;
      }
      const double hn = bandwidth(c, curve.size(), s);
      const double scale = std::pow(hn, static_cast<double>(order));
      obs.times = current[n].times;
      obs.values.reserve(obs.times.size());
      for (double t : obs.times) {
        auto fit = local_polynomial(curve.times, curve.values, t, hn, order,
                                    config.kernel);
        if (!fit.accepted) {
          obs.in_b = false;
          break;
        }
        obs.values.push_back(
          fit.coefficients(static_cast<Eigen::Index>(order)) / scale);
      }
    }
    current = std::move(next);
    stats = theta_stats(current, k);
    h = estimate_h(stats);
    ++d;
    est.iterations.push_back({ d, h.raw, h.h, h.degenerate });
  }

  est.d_hat = d;
  est.h_hat = h.h;
  est.degenerate = std::any_of(est.iterations.begin(), est.iterations.end(),
                               [](const auto& s) { return s.degenerate; });
  const double h_exp = std::max(h.h, regularity_floor);
  est.l_hat = estimate_l(theta_stats(current, k, h_exp));
  return est;
}

// JSON ------------------------------------------------------------------

void
to_json(nlohmann::json& j, const RegularityEstimate& e)
{
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& s : e.iterations) {
    iterations.push_back(
      { { "d", s.d }, { "h_raw", s.h_raw }, { "h_clamped", s.h_clamped } });
  }
  j = nlohmann::json{ { "t0", e.t0 },
                      { "d_hat", e.d_hat },
                      { "h_hat", e.h_hat },
                      { "sigma2_hat", e.sigma2_hat },
                      { "l_hat", e.l_hat },
                      { "k0", e.k0 },
                      { "k", e.k },
                      { "degenerate", e.degenerate },
                      { "iterations", iterations } };
}

void
from_json(const nlohmann::json& j, RegularityEstimate& e)
{
  j.at("t0").get_to(e.t0);
  j.at("d_hat").get_to(e.d_hat);
  j.at("h_hat").get_to(e.h_hat);
  j.at("sigma2_hat").get_to(e.sigma2_hat);
  j.at("l_hat").get_to(e.l_hat);
  j.at("k0").get_to(e.k0);
  j.at("k").get_to(e.k);
  j.at("degenerate").get_to(e.degenerate);
  e.iterations.clear();
  if (j.contains("iterations")) {
    for (const auto& s : j.at("iterations")) {
      RegularityStage st;
      s.at("d").get_to(st.d);
      s.at("h_raw").get_to(st.h_raw);
      s.at("h_clamped").get_to(st.h_clamped);
      e.iterations.push_back(st);
    }
  }
}

} // namespace adasmooth
