#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace adasmooth {

//! One trajectory: observation times in [0, 1] (nondecreasing) and the noisy
//! values measured at those times.
struct Curve
{
  std::string id;
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
};

//! Builds a curve from possibly unsorted observations. Pairs are stably
//! sorted by time; throws DataError on length mismatch, empty input,
//! non-finite times or times outside [0, 1].
Curve make_curve(std::string id, std::vector<double> times,
                 std::vector<double> values);

//! Checks the Curve invariants, throwing DataError on violation.
void validate(const Curve& curve);

//! A learning (or online) set of curves with its sample-level summaries.
struct FunctionalSample
{
  std::vector<Curve> curves;
  double mu_hat = 0.0;        //!< mean number of observations per curve
  std::size_t k0_hat = 1;     //!< floor(mu exp(-(log log mu)^2)), at least 1
  double interval_length = 1.0;

  std::size_t size() const { return curves.size(); }
};

//! Data-driven number of neighbours: floor(mu exp(-(log log mu)^2)), at
//! least 1. Throws DegenerateMu when mu <= e.
std::size_t k0_from_mu(double mu);

FunctionalSample summarize(std::vector<Curve> curves,
                           double interval_length = 1.0);

//! floor((k0 + 7) / 8).
std::size_t choose_k(std::size_t k0);

//! Per-t0 neighbourhoods: for every curve, the indices of the k0 observation
//! times closest to t0 (sorted by time) and whether the event "at least k0
//! points, all inside J_mu(t0)" holds.
struct Window
{
  double t0 = 0.0;
  double j_mu_lo = 0.0;
  double j_mu_hi = 1.0;
  std::size_t k0 = 0;
  std::vector<std::vector<std::size_t>> selected;
  std::vector<char> in_b;

  std::size_t n_in_b() const;
};

//! Indices of the k closest times to t0 in a sorted time vector, returned in
//! increasing order. Distance ties go to the smaller time.
std::vector<std::size_t> closest_indices(std::span<const double> times,
                                         double t0, std::size_t k);

Window window_at(const FunctionalSample& sample, double t0, std::size_t k0);

} // namespace adasmooth
