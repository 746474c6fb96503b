#include "adasmooth/curve.hpp"

#include "adasmooth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adasmooth {

void
validate(const Curve& curve)
{
  if (curve.times.size() != curve.values.size()) {
    throw DataError("curve '" + curve.id + "': " +
                    std::to_string(curve.times.size()) + " times but " +
                    std::to_string(curve.values.size()) + " values");
  }
  if (curve.times.empty()) {
    throw DataError("curve '" + curve.id + "' has no observations");
  }
  for (std::size_t m = 0; m < curve.times.size(); ++m) {
    const double t = curve.times[m];
    if (!std::isfinite(t) || t < 0.0 || t > 1.0) {
      throw DataError("curve '" + curve.id + "': time " + std::to_string(t) +
                      " at position " + std::to_string(m) +
                      " outside [0, 1]");
    }
    if (m > 0 && t < curve.times[m - 1]) {
      throw DataError("curve '" + curve.id + "': times not sorted");
    }
  }
}

Curve
make_curve(std::string id, std::vector<double> times, std::vector<double> values)
{
  if (times.size() != values.size()) {
    throw DataError("curve '" + id + "': " + std::to_string(times.size()) +
                    " times but " + std::to_string(values.size()) + " values");
  }
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times[a] < times[b];
  });
  Curve curve{ std::move(id), {}, {} };
  curve.times.reserve(order.size());
  curve.values.reserve(order.size());
  for (auto i : order) {
    curve.times.push_back(times[i]);
    curve.values.push_back(values[i]);
  }
  validate(curve);
  return curve;
}

std::size_t
k0_from_mu(double mu)
{
  if (!(mu > std::exp(1.0))) {
    throw DegenerateMu("mean number of observations " + std::to_string(mu) +
                       " must exceed e");
  }
  const double ll = std::log(std::log(mu));
  const double k0 = std::floor(mu * std::exp(-ll * ll));
  return std::max<std::size_t>(1, static_cast<std::size_t>(k0));
}

FunctionalSample
summarize(std::vector<Curve> curves, double interval_length)
{
  if (curves.empty()) {
    throw EmptySample("functional sample contains no curves");
  }
  if (!(interval_length > 0.0)) {
    throw DataError("interval length must be positive");
  }
  double total = 0.0;
  for (const auto& c : curves) {
    if (c.size() == 0) {
      throw EmptySample("curve '" + c.id + "' has no observations");
    }
    total += static_cast<double>(c.size());
  }
  FunctionalSample sample;
  sample.mu_hat = total / static_cast<double>(curves.size());
  sample.k0_hat = k0_from_mu(sample.mu_hat);
  sample.interval_length = interval_length;
  sample.curves = std::move(curves);
  return sample;
}

std::size_t
choose_k(std::size_t k0)
{
  return (k0 + 7) / 8;
}

std::size_t
Window::n_in_b() const
{
  return static_cast<std::size_t>(std::count(in_b.begin(), in_b.end(), 1));
}

std::vector<std::size_t>
closest_indices(std::span<const double> times, double t0, std::size_t k)
{
  const std::size_t n = times.size();
  k = std::min(k, n);
  auto right = static_cast<std::size_t>(
    std::lower_bound(times.begin(), times.end(), t0) - times.begin());
  std::size_t left = right; // one past the next left candidate
  while (right - left < k) {
    const bool has_left = left > 0;
    const bool has_right = right < n;
    if (has_left && has_right) {
      if (t0 - times[left - 1] <= times[right] - t0) {
        --left;
      } else {
        ++right;
      }
    } else if (has_left) {
      --left;
    } else {
      ++right;
    }
  }
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), left);
  return idx;
}

Window
window_at(const FunctionalSample& sample, double t0, std::size_t k0)
{
  if (!(t0 >= 0.0 && t0 <= 1.0)) {
    throw DataError("t0 = " + std::to_string(t0) + " outside [0, 1]");
  }
  if (k0 == 0) {
    throw DataError("window size must be positive");
  }
  Window w;
  w.t0 = t0;
  w.k0 = k0;
  const double half = sample.interval_length / std::log(sample.mu_hat);
  w.j_mu_lo = std::max(0.0, t0 - half);
  w.j_mu_hi = std::min(1.0, t0 + half);
  w.selected.reserve(sample.size());
  w.in_b.reserve(sample.size());
  for (const auto& curve : sample.curves) {
    auto idx = closest_indices(curve.times, t0, k0);
    bool ok = idx.size() == k0;
    if (ok) {
      ok = curve.times[idx.front()] >= w.j_mu_lo &&
           curve.times[idx.back()] <= w.j_mu_hi;
    }
    w.selected.push_back(std::move(idx));
    w.in_b.push_back(ok ? 1 : 0);
  }
  return w;
}

} // namespace adasmooth
