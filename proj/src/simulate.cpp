#include "adasmooth/simulate.hpp"

#include "adasmooth/errors.hpp"
#include "adasmooth/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace adasmooth {

// Spec ------------------------------------------------------------------

NoiseSpec
NoiseSpec::constant(double sigma2)
{
  NoiseSpec n;
  n.kind = Kind::constant;
  n.sigma2 = sigma2;
  return n;
}

double
NoiseSpec::variance(double x, double t) const
{
  switch (kind) {
    case Kind::constant:
      return sigma2;
    case Kind::piecewise_time:
      for (const auto& [until, s2] : segments) {
        if (t <= until) {
          return s2;
        }
      }
      return segments.empty() ? 0.0 : segments.back().second;
    case Kind::sign_dependent:
      return x < 0.0 ? sigma2_negative : sigma2_positive;
  }
  return sigma2;
}

const char*
to_string(ProcessKind kind)
{
  switch (kind) {
    case ProcessKind::fbm:
      return "fbm";
    case ProcessKind::piecewise_fbm:
      return "piecewise_fbm";
    case ProcessKind::integrated_fbm:
      return "integrated_fbm";
  }
  return "fbm";
}

const char*
to_string(Sampling sampling)
{
  return sampling == Sampling::unif ? "unif" : "equi";
}

ProcessKind
parse_process_kind(const std::string& s)
{
  if (s == "fbm" || s == "1") {
    return ProcessKind::fbm;
  }
  if (s == "piecewise_fbm" || s == "2") {
    return ProcessKind::piecewise_fbm;
  }
  if (s == "integrated_fbm" || s == "3") {
    return ProcessKind::integrated_fbm;
  }
  throw DataError("unknown setting '" + s + "'");
}

Sampling
parse_sampling(const std::string& s)
{
  if (s == "unif") {
    return Sampling::unif;
  }
  if (s == "equi") {
    return Sampling::equi;
  }
  throw DataError("unknown sampling '" + s + "' (expected unif or equi)");
}

namespace {

void
check_partition(const std::vector<double>& untils, const char* what)
{
  if (untils.empty()) {
    throw DataError(std::string(what) + ": no segments");
  }
  double prev = 0.0;
  for (double u : untils) {
    if (!(u > prev) || u > 1.0) {
      throw DataError(std::string(what) +
                      ": breakpoints must increase strictly within (0, 1]");
    }
    prev = u;
  }
  if (untils.back() != 1.0) {
    throw DataError(std::string(what) + ": last segment must end at 1");
  }
}

} // namespace

void
validate(const SimulationSpec& spec)
{
  if (!(spec.mu >= 9.0) || !std::isfinite(spec.mu)) {
    throw DataError("mu must be finite and at least 9");
  }
  std::vector<double> untils;
  for (const auto& seg : spec.hurst) {
    if (!(seg.hurst > 0.0 && seg.hurst < 1.0)) {
      throw DataError("Hurst exponents must lie in (0, 1)");
    }
    untils.push_back(seg.until);
  }
  check_partition(untils, "hurst");
  if (spec.setting != ProcessKind::piecewise_fbm && spec.hurst.size() != 1) {
    throw DataError("only piecewise_fbm accepts several Hurst segments");
  }
  const auto& n = spec.noise;
  switch (n.kind) {
    case NoiseSpec::Kind::constant:
      if (!(n.sigma2 >= 0.0)) {
        throw NegativeVariance("noise variance must be non-negative");
      }
      break;
    case NoiseSpec::Kind::piecewise_time: {
      untils.clear();
      for (const auto& [u, s2] : n.segments) {
        if (!(s2 >= 0.0)) {
          throw NegativeVariance("noise variance must be non-negative");
        }
        untils.push_back(u);
      }
      check_partition(untils, "sigma2");
      break;
    }
    case NoiseSpec::Kind::sign_dependent:
      if (!(n.sigma2_negative >= 0.0) || !(n.sigma2_positive >= 0.0)) {
        throw NegativeVariance("noise variance must be non-negative");
      }
      break;
  }
}

void
to_json(nlohmann::json& j, const SimulationSpec& spec)
{
  j = nlohmann::json::object();
  j["setting"] = to_string(spec.setting);
  j["n_learning"] = spec.n_learning;
  j["n_online"] = spec.n_online;
  j["mu"] = spec.mu;
  j["sampling"] = to_string(spec.sampling);
  if (spec.hurst.size() == 1) {
    j["hurst"] = spec.hurst.front().hurst;
  } else {
    auto arr = nlohmann::json::array();
    for (const auto& s : spec.hurst) {
      arr.push_back({ s.until, s.hurst });
    }
    j["hurst"] = arr;
  }
  switch (spec.noise.kind) {
    case NoiseSpec::Kind::constant:
      j["sigma2"] = spec.noise.sigma2;
      break;
    case NoiseSpec::Kind::piecewise_time: {
      auto arr = nlohmann::json::array();
      for (const auto& [u, s2] : spec.noise.segments) {
        arr.push_back({ u, s2 });
      }
      j["sigma2"] = arr;
      break;
    }
    case NoiseSpec::Kind::sign_dependent:
      j["sigma2"] = { { "negative", spec.noise.sigma2_negative },
                      { "positive", spec.noise.sigma2_positive } };
      break;
  }
  j["seed"] = spec.seed;
}

void
from_json(const nlohmann::json& j, SimulationSpec& spec)
{
  SimulationSpec out;
  try {
    if (j.contains("setting")) {
      const auto& s = j.at("setting");
      out.setting = parse_process_kind(
        s.is_number() ? std::to_string(s.get<int>()) : s.get<std::string>());
    }
    if (j.contains("n_learning")) {
      out.n_learning = j.at("n_learning").get<std::size_t>();
    }
    if (j.contains("n_online")) {
      out.n_online = j.at("n_online").get<std::size_t>();
    }
    if (j.contains("mu")) {
      out.mu = j.at("mu").get<double>();
    }
    if (j.contains("sampling")) {
      out.sampling = parse_sampling(j.at("sampling").get<std::string>());
    }
    if (j.contains("hurst")) {
      const auto& h = j.at("hurst");
      out.hurst.clear();
      if (h.is_number()) {
        out.hurst.push_back({ 1.0, h.get<double>() });
      } else {
        for (const auto& seg : h) {
          out.hurst.push_back({ seg.at(0).get<double>(), seg.at(1).get<double>() });
        }
      }
    }
    if (j.contains("sigma2")) {
      const auto& s = j.at("sigma2");
      if (s.is_number()) {
        out.noise = NoiseSpec::constant(s.get<double>());
      } else if (s.is_array()) {
        out.noise.kind = NoiseSpec::Kind::piecewise_time;
        out.noise.segments.clear();
        for (const auto& seg : s) {
          out.noise.segments.emplace_back(seg.at(0).get<double>(),
                                          seg.at(1).get<double>());
        }
      } else {
        out.noise.kind = NoiseSpec::Kind::sign_dependent;
        out.noise.sigma2_negative = s.at("negative").get<double>();
        out.noise.sigma2_positive = s.at("positive").get<double>();
      }
    }
    if (j.contains("seed")) {
      out.seed = j.at("seed").get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid simulation spec: ") + e.what());
  }
  spec = std::move(out);
}

// Primitives ------------------------------------------------------------

std::vector<double>
equispaced(std::size_t m)
{
  std::vector<double> t(m);
  if (m == 1) {
    t[0] = 0.0;
    return t;
  }
  for (std::size_t i = 0; i < m; ++i) {
    t[i] = static_cast<double>(i) / static_cast<double>(m - 1);
  }
  return t;
}

std::vector<double>
sample_times(double mu, Sampling sampling, RandomStream& rng)
{
  unsigned m = 0;
  do {
    m = rng.poisson(mu);
  } while (m < 9);
  if (sampling == Sampling::equi) {
    return equispaced(m);
  }
  std::vector<double> t(m);
  for (auto& x : t) {
    x = rng.uniform();
  }
  std::sort(t.begin(), t.end());
  return t;
}

double
interpolate(std::span<const double> times, std::span<const double> values,
            double t)
{
  if (times.empty()) {
    throw EmptySample("interpolation on an empty path");
  }
  if (t <= times.front()) {
    return values.front();
  }
  if (t >= times.back()) {
    return values.back();
  }
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  std::size_t lo = hi - 1;
  double w = (t - times[lo]) / (times[hi] - times[lo]);
  return values[lo] + w * (values[hi] - values[lo]);
}

namespace {

// Circulant embedding -----------------------------------------------------

struct FftwBuffer
{
  explicit FftwBuffer(std::size_t n)
    : data(fftw_alloc_complex(n))
  {
    if (data == nullptr) {
      throw std::bad_alloc();
    }
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

std::mutex& fftw_mutex()
{
  static std::mutex m;
  return m;
}

// Plans are created once per size and executed on fresh aligned buffers,
// which FFTW allows concurrently.
fftw_plan
forward_plan(std::size_t n)
{
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(fftw_mutex());
  auto it = plans.find(n);
  if (it != plans.end()) {
    return it->second;
  }
  FftwBuffer in(n), out(n);
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in.data, out.data,
                                 FFTW_FORWARD, FFTW_ESTIMATE);
  plans.emplace(n, p);
  return p;
}

double
fgn_autocov(std::size_t k, double hurst)
{
  double h2 = 2.0 * hurst;
  double kk = static_cast<double>(k);
  return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) +
                std::pow(std::abs(kk - 1.0), h2));
}

using Eigenvalues = std::shared_ptr<const std::vector<double>>;

Eigenvalues
circulant_eigenvalues(std::size_t n, double hurst)
{
  static std::map<std::pair<std::size_t, std::uint64_t>, Eigenvalues> cache;
  static std::mutex mutex;
  auto key = std::make_pair(n, std::bit_cast<std::uint64_t>(hurst));
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) {
      return it->second;
    }
  }
  std::size_t big = 2 * n;
  FftwBuffer in(big), out(big);
  for (std::size_t j = 0; j < big; ++j) {
    std::size_t k = j <= n ? j : big - j;
    in.data[j][0] = fgn_autocov(k, hurst);
    in.data[j][1] = 0.0;
  }
  fftw_execute_dft(forward_plan(big), in.data, out.data);
  auto lambda = std::make_shared<std::vector<double>>(big);
  for (std::size_t j = 0; j < big; ++j) {
    double v = out.data[j][0];
    if (v < -1e-8) {
      throw NumericalError("circulant embedding is not non-negative definite");
    }
    (*lambda)[j] = std::max(v, 0.0);
  }
  std::lock_guard lock(mutex);
  if (cache.size() > 4096) {
    cache.clear();
  }
  cache.emplace(key, lambda);
  return lambda;
}

// Unit-step fractional Gaussian noise of length n.
std::vector<double>
davies_harte_fgn(std::size_t n, double hurst, RandomStream& rng)
{
  auto lambda = circulant_eigenvalues(n, hurst);
  std::size_t big = 2 * n;
  FftwBuffer in(big), out(big);
  double scale = 1.0 / static_cast<double>(big);
  for (std::size_t j = 0; j < big; ++j) {
    double s = std::sqrt((*lambda)[j] * scale);
    in.data[j][0] = s * rng.normal();
    in.data[j][1] = s * rng.normal();
  }
  fftw_execute_dft(forward_plan(big), in.data, out.data);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = out.data[i][0];
  }
  return g;
}

double
fbm_cov(double s, double t, double hurst)
{
  double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) -
                std::pow(std::abs(t - s), h2));
}

std::vector<double>
fbm_cholesky(std::span<const double> u, double hurst, RandomStream& rng)
{
  std::size_t n = u.size();
  Eigen::MatrixXd cov(n, n);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double c = fbm_cov(u[i], u[j], hurst);
      cov(i, j) = c;
      cov(j, i) = c;
    }
    max_diag = std::max(max_diag, cov(i, i));
  }
  double jitter = 1e-12 * max_diag;
  for (int attempt = 0; attempt < 10; ++attempt) {
    Eigen::MatrixXd a = cov;
    if (attempt > 0) {
      a.diagonal().array() += jitter;
      jitter *= 10.0;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd z(n);
      for (std::size_t i = 0; i < n; ++i) {
        z(static_cast<Eigen::Index>(i)) = rng.normal();
      }
      Eigen::VectorXd x = llt.matrixL() * z;
      return std::vector<double>(x.data(), x.data() + n);
    }
  }
  throw CholeskyFailure("fBm covariance is not positive definite after jitter");
}

// Returns delta when u_i = i * delta for i = 1..n, else 0.
double
regular_step(std::span<const double> u)
{
  if (u.size() < 2) {
    return 0.0;
  }
  double delta = u.back() / static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (std::abs(u[i] / delta - static_cast<double>(i + 1)) > 1e-6) {
      return 0.0;
    }
  }
  return delta;
}

} // namespace

std::vector<double>
fbm_at(std::span<const double> times, double hurst, RandomStream& rng)
{
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw DataError("Hurst exponent must lie in (0, 1)");
  }
  std::vector<double> out(times.size(), 0.0);
  // Distinct positive times; t = 0 maps to 0.
  std::vector<double> u;
  std::vector<std::size_t> slot(times.size(), 0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    double t = times[i];
    if (i > 0 && t < times[i - 1]) {
      throw DataError("fbm_at expects sorted times");
    }
    if (t < 0.0) {
      throw DataError("fbm_at expects non-negative times");
    }
    if (t == 0.0) {
      continue;
    }
    if (u.empty() || t != u.back()) {
      u.push_back(t);
    }
    slot[i] = u.size();
  }
  if (u.empty()) {
    return out;
  }
  std::vector<double> x;
  double delta = regular_step(u);
  if (delta > 0.0) {
    auto g = davies_harte_fgn(u.size(), hurst, rng);
    double scale = std::pow(delta, hurst);
    x.resize(u.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      acc += g[i];
      x[i] = scale * acc;
    }
  } else {
    x = fbm_cholesky(u, hurst, rng);
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (slot[i] > 0) {
      out[i] = x[slot[i] - 1];
    }
  }
  return out;
}

std::vector<double>
piecewise_fbm_at(std::span<const double> times,
                 std::span<const HurstSegment> segments, RandomStream& rng)
{
  std::vector<double> out(times.size(), 0.0);
  double offset = 0.0;
  double a = 0.0;
  std::size_t i = 0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    double b = segments[s].until;
    bool last = s + 1 == segments.size();
    std::size_t begin = i;
    while (i < times.size() && (times[i] < b || (last && times[i] <= b))) {
      ++i;
    }
    std::vector<double> local;
    local.reserve(i - begin + 1);
    for (std::size_t j = begin; j < i; ++j) {
      local.push_back(times[j] - a);
    }
    bool terminal_appended = local.empty() || local.back() < b - a;
    if (terminal_appended) {
      local.push_back(b - a);
    }
    auto x = fbm_at(local, segments[s].hurst, rng);
    for (std::size_t j = begin; j < i; ++j) {
      out[j] = offset + x[j - begin];
    }
    offset += x.back();
    a = b;
  }
  return out;
}

std::vector<double>
integrate_path(std::span<const double> grid_values,
               std::span<const double> times)
{
  std::size_t n = grid_values.size() - 1;
  if (grid_values.size() < 2) {
    throw DataError("integration grid needs at least two nodes");
  }
  double step = 1.0 / static_cast<double>(n);
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    cum[j] = cum[j - 1] + 0.5 * step * (grid_values[j - 1] + grid_values[j]);
  }
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    double pos = std::clamp(times[i], 0.0, 1.0) * static_cast<double>(n);
    auto j = static_cast<std::size_t>(std::floor(pos));
    if (j >= n) {
      out[i] = cum[n];
      continue;
    }
    double w = pos - static_cast<double>(j);
    out[i] = cum[j] + w * (cum[j + 1] - cum[j]);
  }
  return out;
}

std::vector<double>
integrated_fbm_at(std::span<const double> times, double hurst,
                  RandomStream& rng, std::size_t grid_n)
{
  if (grid_n < 1000) {
    throw DataError("integration grid must have at least 1000 intervals");
  }
  auto grid = equispaced(grid_n + 1);
  auto w = fbm_at(grid, hurst, rng);
  return integrate_path(w, times);
}

std::vector<double>
add_noise(std::span<const double> x_true, std::span<const double> times,
          const NoiseSpec& noise, RandomStream& rng)
{
  if (x_true.size() != times.size()) {
    throw LengthMismatch("signal and times differ in length");
  }
  std::vector<double> y(x_true.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double v = noise.variance(x_true[i], times[i]);
    if (!(v >= 0.0)) {
      throw NegativeVariance("noise variance must be non-negative");
    }
    y[i] = x_true[i] + std::sqrt(v) * rng.normal();
  }
  return y;
}

// Datasets --------------------------------------------------------------

namespace {

// Breakpoints moved to the nearest node of a grid with n intervals, so that
// every segment is itself a regular grid.
std::vector<HurstSegment>
snap_segments(std::span<const HurstSegment> segments, std::size_t n)
{
  std::vector<HurstSegment> out;
  double nn = static_cast<double>(n);
  for (const auto& s : segments) {
    double k = std::round(s.until * nn);
    double prev = out.empty() ? 0.0 : out.back().until * nn;
    k = std::max(k, prev + 1.0);
    k = std::min(k, nn);
    if (!out.empty() && k <= prev) {
      out.back().hurst = s.hurst;
      continue;
    }
    out.push_back({ k / nn, s.hurst });
  }
  out.back().until = 1.0;
  return out;
}

std::vector<double>
process_at(const SimulationSpec& spec, std::span<const double> times,
           RandomStream& rng, std::size_t integration_grid,
           std::size_t regular_intervals)
{
  switch (spec.setting) {
    case ProcessKind::fbm:
      return fbm_at(times, spec.hurst.front().hurst, rng);
    case ProcessKind::piecewise_fbm: {
      if (regular_intervals > 0) {
        auto snapped = snap_segments(spec.hurst, regular_intervals);
        return piecewise_fbm_at(times, snapped, rng);
      }
      return piecewise_fbm_at(times, spec.hurst, rng);
    }
    case ProcessKind::integrated_fbm: {
      if (regular_intervals >= integration_grid) {
        auto grid = equispaced(regular_intervals + 1);
        auto w = fbm_at(grid, spec.hurst.front().hurst, rng);
        auto x = integrate_path(w, times);
        return x;
      }
      return integrated_fbm_at(times, spec.hurst.front().hurst, rng,
                               integration_grid);
    }
  }
  return {};
}

GroundTruthCurve
simulate_one(const SimulationSpec& spec, Role role, std::size_t index,
             const SimulationOptions& options, std::uint64_t replication,
             std::span<const double> grid_times)
{
  RandomStream rng(spec.seed, { replication, static_cast<std::uint64_t>(role),
                                static_cast<std::uint64_t>(index) });
  auto times = sample_times(spec.mu, spec.sampling, rng);
  GroundTruthCurve out;

  std::vector<double> path_times;
  std::vector<double> path;
  if (spec.sampling == Sampling::equi) {
    std::size_t intervals = times.size() - 1;
    std::size_t r = 1;
    bool need_fine = role == Role::online &&
                     (!options.eval_times.empty() || !grid_times.empty());
    if (need_fine || spec.setting == ProcessKind::integrated_fbm) {
      std::size_t target = need_fine ? options.fine_intervals : 0;
      if (spec.setting == ProcessKind::integrated_fbm) {
        target = std::max(target, options.integration_grid);
      }
      r = (target + intervals - 1) / intervals;
      r = std::max<std::size_t>(r, 1);
    }
    path_times = equispaced(intervals * r + 1);
    path = process_at(spec, path_times, rng, options.integration_grid,
                      intervals * r);
    out.x_true.resize(times.size());
    for (std::size_t m = 0; m < times.size(); ++m) {
      out.x_true[m] = path[m * r];
    }
    for (double t : options.eval_times) {
      out.eval_values.push_back(interpolate(path_times, path, t));
    }
  } else {
    path_times = times;
    path_times.insert(path_times.end(), options.eval_times.begin(),
                      options.eval_times.end());
    std::sort(path_times.begin(), path_times.end());
    path = process_at(spec, path_times, rng, options.integration_grid, 0);
    out.x_true.resize(times.size());
    for (std::size_t m = 0; m < times.size(); ++m) {
      auto it = std::lower_bound(path_times.begin(), path_times.end(), times[m]);
      out.x_true[m] = path[static_cast<std::size_t>(it - path_times.begin())];
    }
    for (double t : options.eval_times) {
      auto it = std::lower_bound(path_times.begin(), path_times.end(), t);
      out.eval_values.push_back(
        path[static_cast<std::size_t>(it - path_times.begin())]);
    }
  }
  out.grid_values.reserve(grid_times.size());
  for (double t : grid_times) {
    out.grid_values.push_back(interpolate(path_times, path, t));
  }
  auto y = add_noise(out.x_true, times, spec.noise, rng);
  out.curve = make_curve(std::to_string(index), std::move(times),
                         std::move(y));
  return out;
}

} // namespace

std::vector<GroundTruthCurve>
simulate_curves(const SimulationSpec& spec, Role role, std::size_t count,
                const SimulationOptions& options, std::uint64_t replication)
{
  validate(spec);
  for (double t : options.eval_times) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw DataError("evaluation times must lie in [0, 1]");
    }
  }
  auto grid = options.dense_grid_size > 1 ? equispaced(options.dense_grid_size)
                                          : std::vector<double>{};
  std::vector<GroundTruthCurve> out(count);
  parallel_for(count, options.threads, [&](std::size_t i) {
    out[i] = simulate_one(spec, role, i, options, replication, grid);
  });
  return out;
}

Dataset
simulate(const SimulationSpec& spec, const SimulationOptions& options,
         std::uint64_t replication)
{
  Dataset d;
  d.spec = spec;
  d.eval_times = options.eval_times;
  if (options.dense_grid_size > 1) {
    d.grid_times = equispaced(options.dense_grid_size);
  }
  d.learning =
    simulate_curves(spec, Role::learning, spec.n_learning, options, replication);
  d.online =
    simulate_curves(spec, Role::online, spec.n_online, options, replication);
  return d;
}

std::vector<Curve>
curves_of(std::span<const GroundTruthCurve> truth)
{
  std::vector<Curve> out;
  out.reserve(truth.size());
  for (const auto& t : truth) {
    out.push_back(t.curve);
  }
  return out;
}

} // namespace adasmooth
