#include "adasmooth/cv.hpp"

#include "adasmooth/errors.hpp"
#include "adasmooth/format.hpp"
#include "adasmooth/parallel.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace adasmooth {

std::vector<double>
default_cv_grid(std::size_t m, std::size_t size)
{
  if (m < 1 || size == 0) {
    throw DataError("bandwidth grid needs m >= 1 and a positive size");
  }
  double lo = std::min(2.0 / static_cast<double>(m), 0.5);
  double hi = 0.5;
  std::vector<double> grid(size);
  if (size == 1) {
    grid[0] = hi;
    return grid;
  }
  double a = std::log(lo);
  double b = std::log(hi);
  for (std::size_t i = 0; i < size; ++i) {
    grid[i] = std::exp(a + (b - a) * static_cast<double>(i) /
                             static_cast<double>(size - 1));
  }
  grid.back() = hi;
  return grid;
}

CvResult
cv_bandwidth(const Curve& curve, std::size_t degree, const Kernel& kernel,
             std::span<const double> grid)
{
  auto start = std::chrono::steady_clock::now();
  if (curve.size() < 3) {
    throw CurveTooShort("curve '" + curve.id + "' has fewer than 3 points");
  }
  if (grid.empty()) {
    throw DataError("empty bandwidth grid");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && grid[i] < grid[i - 1])) {
      throw DataError("bandwidth grid must be positive and sorted");
    }
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  CvResult r;
  r.curve_id = curve.id;
  r.bandwidth_grid.assign(grid.begin(), grid.end());
  r.cv_scores.assign(grid.size(), inf);
  const std::size_t m = curve.size();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i) {
      auto fit = local_polynomial(curve.times, curve.values, curve.times[i],
                                  grid[g], degree, kernel, i);
      if (!fit.accepted) {
        ok = false;
        break;
      }
      double e = curve.values[i] - fit.coefficients(0);
      sum += e * e;
    }
    if (ok) {
      r.cv_scores[g] = sum / static_cast<double>(m);
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (r.cv_scores[g] < r.cv_scores[best]) {
      best = g;
    }
  }
  if (std::isinf(r.cv_scores[best])) {
    best = grid.size() - 1;
  } else {
    for (std::size_t g = best + 1; g < grid.size(); ++g) {
      if (r.cv_scores[g] == r.cv_scores[best]) {
        r.ties_broken = true;
      }
    }
  }
  r.chosen = grid[best];
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                .count();
  return r;
}

CvSmoothing
cv_smooth(std::span<const Curve> online, std::span<const double> t0s,
          const CvOptions& options)
{
  for (double t0 : t0s) {
    if (!(t0 >= 0.0 && t0 <= 1.0)) {
      throw DataError("t0 = " + format_double(t0) + " outside [0, 1]");
    }
  }
  CvSmoothing out;
  out.per_curve.resize(online.size());
  out.fits.resize(online.size());
  SmootherSpec spec;
  spec.degree = options.degree;
  spec.kernel = options.kernel;
  spec.trim = false;
  parallel_for(online.size(), options.threads, [&](std::size_t n) {
    const Curve& c = online[n];
    std::vector<double> own;
    std::span<const double> grid = options.grid;
    if (grid.empty()) {
      own = default_cv_grid(c.size(), options.grid_size);
      grid = own;
    }
    out.per_curve[n] = cv_bandwidth(c, options.degree, options.kernel, grid);
    std::span<const double> points =
      t0s.empty() ? std::span<const double>(c.times) : t0s;
    auto& fits = out.fits[n];
    fits.reserve(points.size());
    for (double t0 : points) {
      fits.push_back(fit_at(c, t0, spec, out.per_curve[n].chosen));
    }
  });
  return out;
}

nlohmann::json
to_json(const CvResult& r)
{
  nlohmann::json scores = nlohmann::json::array();
  for (double s : r.cv_scores) {
    scores.push_back(std::isfinite(s) ? nlohmann::json(s) : nlohmann::json());
  }
  return { { "curve_id", r.curve_id },
           { "bandwidth_grid", r.bandwidth_grid },
           { "cv_scores", scores },
           { "chosen", r.chosen },
           { "ties_broken", r.ties_broken },
           { "seconds", r.seconds } };
}

std::string
to_csv(const CvSmoothing& s, std::span<const Curve> online,
       std::span<const double> t0s)
{
  std::ostringstream out;
  out << "curve_id,t0,estimate,bandwidth,lambda_min,guard\n";
  for (std::size_t n = 0; n < online.size(); ++n) {
    std::span<const double> points =
      t0s.empty() ? std::span<const double>(online[n].times) : t0s;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& f = s.fits[n][i];
      out << online[n].id << ',' << format_double(points[i]) << ','
          << format_double(f.estimate) << ',' << format_double(f.diag.bandwidth)
          << ',' << format_double(f.diag.lambda_min) << ','
          << to_string(f.diag.guard_triggered) << '\n';
    }
  }
  return out.str();
}

} // namespace adasmooth
