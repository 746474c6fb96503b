#include "adasmooth/lp_smoother.hpp"

#include "adasmooth/errors.hpp"
#include "adasmooth/format.hpp"
#include "adasmooth/log.hpp"
#include "adasmooth/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adasmooth {

namespace {

using SmallMatrix =
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, max_degree + 1,
                max_degree + 1>;

struct NormalEquations
{
  SmallMatrix A;
  Coefficients a;
  std::size_t m = 0; // effective sample size
  std::size_t n_in_window = 0;
};

// Fills basis[j] = u^j / j!.
inline void
fill_basis(double u, std::size_t degree, double* basis)
{
  basis[0] = 1.0;
  for (std::size_t j = 1; j <= degree; ++j) {
    basis[j] = basis[j - 1] * u / static_cast<double>(j);
  }
}

NormalEquations
assemble(std::span<const double> times, std::span<const double> values,
         double t0, double h, std::size_t degree, const Kernel& kernel,
         std::size_t skip)
{
  if (degree > max_degree) {
    throw DataError("local polynomial degree " + std::to_string(degree) +
                    " exceeds " + std::to_string(max_degree));
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DataError("bandwidth must be positive and finite");
  }
  const std::size_t p = degree + 1;
  NormalEquations eq;
  eq.A = SmallMatrix::Zero(static_cast<Eigen::Index>(p),
                           static_cast<Eigen::Index>(p));
  eq.a = Coefficients::Zero(static_cast<Eigen::Index>(p));
  eq.m = times.size() - (skip < times.size() ? 1 : 0);

  const auto lo = static_cast<std::size_t>(
    std::lower_bound(times.begin(), times.end(), t0 - h) - times.begin());
  const auto hi = static_cast<std::size_t>(
    std::upper_bound(times.begin(), times.end(), t0 + h) - times.begin());
  double basis[max_degree + 1];
  for (std::size_t m = lo; m < hi; ++m) {
    if (m == skip) {
      continue;
    }
    const double u = (times[m] - t0) / h;
    const double w = kernel(u);
    if (w <= 0.0) {
      continue;
    }
    const double y = values.empty() ? 0.0 : values[m];
    if (!std::isfinite(y)) {
      throw NonFiniteInput("non-finite value at time " +
                           std::to_string(times[m]));
    }
    ++eq.n_in_window;
    fill_basis(u, degree, basis);
    for (std::size_t i = 0; i < p; ++i) {
      const double wi = w * basis[i];
      eq.a(static_cast<Eigen::Index>(i)) += wi * y;
      for (std::size_t j = 0; j <= i; ++j) {
        eq.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
          wi * basis[j];
      }
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      eq.A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
        eq.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  if (eq.m > 0) {
    const double scale = 1.0 / (static_cast<double>(eq.m) * h);
    eq.A *= scale;
    eq.a *= scale;
  }
  return eq;
}

} // namespace

const char*
to_string(Guard g)
{
  switch (g) {
    case Guard::none:
      return "none";
    case Guard::eigen:
      return "eigen";
    case Guard::trim:
      return "trim";
  }
  return "?";
}

double
plug_in_constant(double sigma2, double l_hat, double regularity,
                 const Kernel& kernel)
{
  if (!(l_hat > 0.0)) {
    throw ZeroHolderConstant("local Hölder constant estimate is zero");
  }
  if (!(regularity > 0.0)) {
    throw DataError("regularity must be positive");
  }
  if (sigma2 < 0.0) {
    throw NegativeVariance("noise variance must be nonnegative");
  }
  const double fact = std::tgamma(std::floor(regularity) + 1.0);
  return sigma2 * kernel.l2_norm_sq() * fact /
         (regularity * l_hat * kernel.abs_moment(regularity));
}

double
bandwidth(double c, std::size_t m, double regularity)
{
  return std::pow(c / static_cast<double>(m), 1.0 / (2.0 * regularity + 1.0));
}

double
eigen_floor(std::size_t m)
{
  if (m < 2) {
    return std::numeric_limits<double>::infinity();
  }
  return 1.0 / std::log(static_cast<double>(m));
}

double
trim_bound(std::size_t m, double regularity)
{
  if (m < 3) {
    return std::numeric_limits<double>::infinity();
  }
  const double y = static_cast<double>(m);
  const double ly = std::log(y);
  const double tau =
    std::pow(y / ly, 2.0 * regularity / (2.0 * regularity + 1.0)) / (ly * ly);
  return std::pow(tau, trim_exponent);
}

namespace {

bool
solvable(const Coefficients& eigenvalues)
{
  const double top = eigenvalues(eigenvalues.size() - 1);
  return top > 0.0 && eigenvalues(0) > 1e-12 * top;
}

} // namespace

LocalPolynomialFit
local_polynomial(std::span<const double> times, std::span<const double> values,
                 double t0, double h, std::size_t degree, const Kernel& kernel,
                 std::size_t skip)
{
  auto eq = assemble(times, values, t0, h, degree, kernel, skip);
  LocalPolynomialFit fit;
  fit.n_in_window = eq.n_in_window;
  Eigen::SelfAdjointEigenSolver<SmallMatrix> solver(eq.A);
  fit.lambda_min = solver.eigenvalues()(0);
  fit.accepted = fit.lambda_min > eigen_floor(eq.m);
  if (solvable(solver.eigenvalues())) {
    const auto& V = solver.eigenvectors();
    Coefficients proj = V.transpose() * eq.a;
    proj = proj.cwiseQuotient(solver.eigenvalues());
    fit.coefficients = V * proj;
  }
  return fit;
}

std::vector<double>
lp_weights(std::span<const double> times, double t0, double h,
           std::size_t degree, const Kernel& kernel)
{
  auto eq = assemble(times, {}, t0, h, degree, kernel, no_skip);
  Eigen::SelfAdjointEigenSolver<SmallMatrix> solver(eq.A);
  if (!solvable(solver.eigenvalues())) {
    return {};
  }
  const auto& V = solver.eigenvectors();
  // first row of A^{-1}
  Coefficients row =
    V * V.row(0).transpose().cwiseQuotient(solver.eigenvalues());
  std::vector<double> w(times.size(), 0.0);
  double basis[max_degree + 1];
  const double scale = 1.0 / (static_cast<double>(eq.m) * h);
  for (std::size_t m = 0; m < times.size(); ++m) {
    const double u = (times[m] - t0) / h;
    const double k = kernel(u);
    if (k <= 0.0) {
      continue;
    }
    fill_basis(u, degree, basis);
    double dot = 0.0;
    for (std::size_t j = 0; j <= degree; ++j) {
      dot += row(static_cast<Eigen::Index>(j)) * basis[j];
    }
    w[m] = scale * dot * k;
  }
  return w;
}

FitResult
fit_at(const Curve& curve, double t0, const SmootherSpec& spec, double h)
{
  if (curve.size() == 0) {
    throw DataError("cannot smooth empty curve '" + curve.id + "'");
  }
  auto lp = local_polynomial(curve.times, curve.values, t0, h, spec.degree,
                             spec.kernel);
  FitResult out;
  out.diag.bandwidth = h;
  out.diag.lambda_min = lp.lambda_min;
  out.diag.n_in_window = lp.n_in_window;
  if (!lp.accepted) {
    out.estimate = 0.0;
    out.diag.guard_triggered = Guard::eigen;
    return out;
  }
  out.estimate = lp.coefficients(0);
  if (spec.trim) {
    const double bound = trim_bound(curve.size(), spec.regularity);
    if (std::abs(out.estimate) > bound) {
      out.estimate = std::copysign(bound, out.estimate);
      out.diag.guard_triggered = Guard::trim;
    }
  }
  return out;
}

SmootherSpec
smoother_spec_from(const RegularityEstimate& reg, const Kernel& kernel,
                   bool trim)
{
  SmootherSpec spec;
  spec.degree = reg.d_hat;
  spec.kernel = kernel;
  spec.trim = trim;
  spec.regularity = reg.regularity();
  if (spec.regularity < regularity_floor) {
    log_warn("regularity estimate " + format_double(spec.regularity) +
             " at t0=" + format_double(reg.t0) + " floored to " +
             format_double(regularity_floor));
    spec.regularity = regularity_floor;
  }
  spec.plug_in_c =
    plug_in_constant(reg.sigma2_hat, reg.l_hat, spec.regularity, kernel);
  return spec;
}

SmoothingResult
smooth_online(std::span<const Curve> online, const SmootherSpec& spec,
              std::span<const double> t0s, unsigned threads)
{
  for (double t0 : t0s) {
    if (!(t0 >= 0.0 && t0 <= 1.0)) {
      throw DataError("t0 = " + format_double(t0) + " outside [0, 1]");
    }
  }
  std::vector<std::vector<SmoothedCell>> per_curve(online.size());
  parallel_for(online.size(), threads, [&](std::size_t n) {
    const Curve& curve = online[n];
    std::span<const double> points = t0s.empty()
                                       ? std::span<const double>(curve.times)
                                       : t0s;
    auto& cells = per_curve[n];
    cells.reserve(points.size());
    double h = 0.0;
    std::string setup_error;
    try {
      if (curve.size() == 0) {
        throw DataError("curve '" + curve.id + "' is empty");
      }
      h = bandwidth(spec.plug_in_c, curve.size(), spec.regularity);
    } catch (const Error& e) {
      setup_error = e.what();
    }
    for (double t0 : points) {
      SmoothedCell cell;
      cell.curve_id = curve.id;
      cell.curve_index = n;
      cell.t0 = t0;
      if (!setup_error.empty()) {
        cell.failed = true;
        cell.error = setup_error;
      } else {
        try {
          auto fit = fit_at(curve, t0, spec, h);
          cell.estimate = fit.estimate;
          cell.diag = fit.diag;
        } catch (const Error& e) {
          cell.failed = true;
          cell.error = e.what();
          cell.diag.bandwidth = h;
        }
      }
      cells.push_back(std::move(cell));
    }
  });
  SmoothingResult result;
  result.spec = spec;
  for (auto& cells : per_curve) {
    for (auto& c : cells) {
      result.cells.push_back(std::move(c));
    }
  }
  return result;
}

SmoothingResult
smooth_online(std::span<const Curve> online, const RegularityEstimate& reg,
              std::span<const double> t0s, unsigned threads)
{
  return smooth_online(online, smoother_spec_from(reg), t0s, threads);
}

std::string
to_csv(const SmoothingResult& result)
{
  std::ostringstream out;
  out << "curve_id,t0,estimate,bandwidth,lambda_min,guard\n";
  for (const auto& c : result.cells) {
    out << c.curve_id << ',' << format_double(c.t0) << ','
        << (c.failed ? std::string("nan") : format_double(c.estimate)) << ','
        << format_double(c.diag.bandwidth) << ','
        << format_double(c.diag.lambda_min) << ','
        << (c.failed ? "failed" : to_string(c.diag.guard_triggered)) << '\n';
  }
  return out.str();
}

nlohmann::json
to_json(const SmoothingResult& result)
{
  nlohmann::json spec = { { "degree", result.spec.degree },
                          { "regularity", result.spec.regularity },
                          { "plug_in_c", result.spec.plug_in_c },
                          { "kernel", result.spec.kernel.name() },
                          { "trim", result.spec.trim } };
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) {
    nlohmann::json j = { { "curve_id", c.curve_id },
                         { "t0", c.t0 },
                         { "bandwidth", c.diag.bandwidth },
                         { "lambda_min", c.diag.lambda_min },
                         { "n_in_window", c.diag.n_in_window },
                         { "guard", c.failed
                                      ? "failed"
                                      : to_string(c.diag.guard_triggered) } };
    if (c.failed) {
      j["estimate"] = nullptr;
      j["error"] = c.error;
    } else {
      j["estimate"] = c.estimate;
    }
    cells.push_back(std::move(j));
  }
  return { { "spec", spec }, { "cells", cells } };
}

} // namespace adasmooth
