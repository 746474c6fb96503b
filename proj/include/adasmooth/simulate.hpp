#pragma once

#include "adasmooth/curve.hpp"
#include "adasmooth/random.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace adasmooth {

enum class ProcessKind
{
  fbm,
  piecewise_fbm,
  integrated_fbm
};

enum class Sampling
{
  unif,
  equi
};

//! Hurst exponent on (previous breakpoint, until].
struct HurstSegment
{
  double until = 1.0;
  double hurst = 0.5;
};

//! Noise variance as a function of the signal value and time.
struct NoiseSpec
{
  enum class Kind
  {
    constant,
    piecewise_time, //!< variance per time segment (until, sigma2)
    sign_dependent  //!< one variance where X < 0, another where X >= 0
  };

  Kind kind = Kind::constant;
  double sigma2 = 0.0;
  std::vector<std::pair<double, double>> segments;
  double sigma2_negative = 0.0;
  double sigma2_positive = 0.0;

  static NoiseSpec constant(double sigma2);
  double variance(double x, double t) const;
};

struct SimulationSpec
{
  ProcessKind setting = ProcessKind::fbm;
  std::size_t n_learning = 1000;
  std::size_t n_online = 500;
  double mu = 300.0;
  Sampling sampling = Sampling::equi;
  std::vector<HurstSegment> hurst{ HurstSegment{ 1.0, 0.5 } };
  NoiseSpec noise = NoiseSpec::constant(0.05);
  std::uint64_t seed = 0;
};

//! Throws DataError when the spec breaks its invariants (mu >= 9, segments
//! partition [0, 1], exponents in (0, 1), ...).
void validate(const SimulationSpec& spec);

void to_json(nlohmann::json& j, const SimulationSpec& spec);
void from_json(const nlohmann::json& j, SimulationSpec& spec);

const char* to_string(ProcessKind kind);
const char* to_string(Sampling sampling);
ProcessKind parse_process_kind(const std::string& s);
Sampling parse_sampling(const std::string& s);

//! Noisy curve plus the noiseless signal at its observation times, at the
//! requested evaluation times and on the dense grid.
struct GroundTruthCurve
{
  Curve curve;
  std::vector<double> x_true;
  std::vector<double> eval_values;
  std::vector<double> grid_values;
};

struct SimulationOptions
{
  //! Points where the true signal is needed (e.g. the t0 of a risk study).
  std::vector<double> eval_times;
  //! Size of the equispaced ground-truth grid; 0 disables it.
  std::size_t dense_grid_size = 2001;
  //! Equispaced online curves are simulated on a refinement of their
  //! observation grid with at least this many intervals, so that truth at
  //! off-grid points is read from a fine path.
  std::size_t fine_intervals = 16384;
  //! Minimum quadrature grid for integrated fBm.
  std::size_t integration_grid = 4096;
  unsigned threads = 0;
};

struct Dataset
{
  SimulationSpec spec;
  std::vector<double> eval_times;
  std::vector<double> grid_times;
  std::vector<GroundTruthCurve> learning;
  std::vector<GroundTruthCurve> online;
};

enum class Role : std::uint64_t
{
  learning = 0,
  online = 1
};

//! Generates both sets. Every curve has its own random substream keyed by
//! (seed, replication, role, index).
Dataset simulate(const SimulationSpec& spec, const SimulationOptions& options = {},
                 std::uint64_t replication = 0);

std::vector<GroundTruthCurve> simulate_curves(const SimulationSpec& spec,
                                              Role role, std::size_t count,
                                              const SimulationOptions& options,
                                              std::uint64_t replication = 0);

std::vector<Curve> curves_of(std::span<const GroundTruthCurve> truth);

// Primitives ------------------------------------------------------------

std::vector<double> equispaced(std::size_t m);

//! M ~ Poisson(mu) conditioned on M >= 9; uniform sorted or equispaced.
std::vector<double> sample_times(double mu, Sampling sampling,
                                 RandomStream& rng);

//! Exact fractional Brownian motion at sorted times in [0, 1]. Times of the
//! form {i * delta} use circulant embedding; other designs use a Cholesky
//! factor of the covariance.
std::vector<double> fbm_at(std::span<const double> times, double hurst,
                           RandomStream& rng);

//! Independent fBm pieces, each started at the terminal value of the
//! previous piece, on (segment-local) time t - a for segment [a, b].
std::vector<double> piecewise_fbm_at(std::span<const double> times,
                                     std::span<const HurstSegment> segments,
                                     RandomStream& rng);

//! Integral of an fBm simulated on grid_n + 1 equispaced nodes, cumulative
//! trapezoid rule, linearly interpolated at `times`.
std::vector<double> integrated_fbm_at(std::span<const double> times,
                                      double hurst, RandomStream& rng,
                                      std::size_t grid_n);

//! Cumulative trapezoid integral of a path given on an equispaced grid of
//! [0, 1], evaluated at `times` by linear interpolation.
std::vector<double> integrate_path(std::span<const double> grid_values,
                                   std::span<const double> times);

std::vector<double> add_noise(std::span<const double> x_true,
                              std::span<const double> times,
                              const NoiseSpec& noise, RandomStream& rng);

//! Linear interpolation of (times, values) at t; times sorted.
double interpolate(std::span<const double> times,
                   std::span<const double> values, double t);

} // namespace adasmooth
