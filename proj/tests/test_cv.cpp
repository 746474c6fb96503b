#include "adasmooth/cv.hpp"
#include "adasmooth/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace adasmooth;

namespace {

Curve
noisy_sine(std::uint64_t seed, std::size_t m, double sigma)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  std::normal_distribution<double> z;
  std::vector<double> t(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    t[i] = u(rng);
    y[i] = std::sin(5 * t[i]) + sigma * z(rng);
  }
  return make_curve("s" + std::to_string(seed), t, y);
}

// Leave-one-out score by refitting on the reduced curve.
double
naive_score(const Curve& c, std::size_t degree, double h)
{
  SmootherSpec spec;
  spec.degree = degree;
  spec.trim = false;
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    Curve r = c;
    r.times.erase(r.times.begin() + static_cast<long>(i));
    r.values.erase(r.values.begin() + static_cast<long>(i));
    auto fit = fit_at(r, c.times[i], spec, h);
    if (fit.diag.guard_triggered == Guard::eigen) {
      return std::numeric_limits<double>::infinity();
    }
    sum += std::pow(c.values[i] - fit.estimate, 2);
  }
  return sum / static_cast<double>(c.size());
}

} // namespace

TEST_CASE("default grid")
{
  auto g = default_cv_grid(100);
  CHECK(g.size() == 20);
  CHECK(g.front() == doctest::Approx(0.02));
  CHECK(g.back() == 0.5);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(g[1] / g[0] == doctest::Approx(g[2] / g[1]));
  CHECK(default_cv_grid(3).front() == 0.5);
  CHECK(default_cv_grid(50, 1) == std::vector<double>{ 0.5 });
  CHECK_THROWS_AS(default_cv_grid(0), DataError);
}

TEST_CASE("scores match a refitting oracle")
{
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto c = noisy_sine(seed, 12 + 3 * seed, 0.2);
    for (std::size_t d = 0; d <= 1; ++d) {
      auto grid = default_cv_grid(c.size(), 8);
      auto r = cv_bandwidth(c, d, Kernel::epanechnikov(), grid);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        double want = naive_score(c, d, grid[g]);
        if (std::isinf(want)) {
          CHECK(std::isinf(r.cv_scores[g]));
        } else {
          CHECK(r.cv_scores[g] == doctest::Approx(want).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("noiseless polynomials score zero wherever the guard passes")
{
  std::vector<double> t, line, flat;
  for (int i = 0; i < 200; ++i) {
    t.push_back(i / 199.0);
    line.push_back(1.0 + 2.0 * t.back());
    flat.push_back(3.0);
  }
  std::vector<double> grid{ 0.005, 0.02, 0.05, 0.1, 0.2, 0.5 };
  auto r = cv_bandwidth(make_curve("l", t, line), 1, Kernel::epanechnikov(), grid);
  std::size_t first_finite = grid.size();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (std::isfinite(r.cv_scores[g])) {
      CHECK(r.cv_scores[g] < 1e-20);
      first_finite = std::min(first_finite, g);
    }
  }
  CHECK(r.chosen == grid[first_finite < grid.size() ? first_finite : grid.size() - 1]);

  auto f = cv_bandwidth(make_curve("f", t, flat), 0, Kernel::epanechnikov(), grid);
  CHECK(std::isinf(f.cv_scores[0]));
  CHECK(f.cv_scores[1] < 1e-20);
  CHECK(f.chosen == 0.02);
}

TEST_CASE("pure noise favours wide bandwidths")
{
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z;
  std::vector<double> t, y;
  for (int i = 0; i < 300; ++i) {
    t.push_back((i + 0.5) / 300.0);
    y.push_back(z(rng));
  }
  auto c = make_curve("n", t, y);
  auto grid = default_cv_grid(c.size());
  auto r = cv_bandwidth(c, 0, Kernel::epanechnikov(), grid);
  CHECK(r.chosen >= 0.25);
}

TEST_CASE("edge cases")
{
  auto c = noisy_sine(3, 40, 0.1);
  std::vector<double> one{ 0.3 };
  auto r = cv_bandwidth(c, 0, Kernel::epanechnikov(), one);
  CHECK(r.chosen == 0.3);
  CHECK(r.cv_scores.size() == 1);

  std::vector<double> tiny{ 1e-6, 2e-6 };
  r = cv_bandwidth(c, 0, Kernel::epanechnikov(), tiny);
  CHECK(std::isinf(r.cv_scores[0]));
  CHECK(r.chosen == 2e-6);
  auto j = to_json(r);
  CHECK(j["cv_scores"][0].is_null());

  auto short_curve = make_curve("x", { 0.1, 0.2 }, { 1.0, 2.0 });
  CHECK_THROWS_AS(cv_bandwidth(short_curve, 0, Kernel::epanechnikov(), one),
                  CurveTooShort);
  std::vector<double> unsorted{ 0.3, 0.1 };
  CHECK_THROWS_AS(cv_bandwidth(c, 0, Kernel::epanechnikov(), unsorted), DataError);
  CHECK_THROWS_AS(cv_bandwidth(c, 0, Kernel::epanechnikov(), std::vector<double>{}),
                  DataError);
}

TEST_CASE("permutation invariance")
{
  auto c = noisy_sine(8, 60, 0.3);
  std::vector<std::size_t> order(c.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::shuffle(order.begin(), order.end(), std::mt19937_64(2));
  std::vector<double> t, y;
  for (auto i : order) {
    t.push_back(c.times[i]);
    y.push_back(c.values[i]);
  }
  auto shuffled = make_curve(c.id, t, y);
  auto grid = default_cv_grid(c.size());
  auto a = cv_bandwidth(c, 0, Kernel::epanechnikov(), grid);
  auto b = cv_bandwidth(shuffled, 0, Kernel::epanechnikov(), grid);
  CHECK(a.cv_scores == b.cv_scores);
  CHECK(a.chosen == b.chosen);
}

TEST_CASE("cv smoothing of an online set")
{
  std::vector<Curve> online;
  for (std::uint64_t s = 0; s < 6; ++s) {
    online.push_back(noisy_sine(s, 80, 0.2));
  }
  std::vector<double> t0s{ 0.2, 0.6 };
  CvOptions opts;
  opts.threads = 1;
  auto r = cv_smooth(online, t0s, opts);
  REQUIRE(r.per_curve.size() == 6);
  SmootherSpec spec;
  spec.trim = false;
  for (std::size_t n = 0; n < online.size(); ++n) {
    REQUIRE(r.fits[n].size() == 2);
    auto direct = fit_at(online[n], 0.6, spec, r.per_curve[n].chosen);
    CHECK(r.fits[n][1].estimate == direct.estimate);
  }
  opts.threads = 3;
  auto again = cv_smooth(online, t0s, opts);
  CHECK(to_csv(again, online, t0s) == to_csv(r, online, t0s));
  CHECK(to_csv(r, online, t0s).rfind("curve_id,t0,estimate,bandwidth,lambda_min,guard\n", 0) == 0);

  auto own = cv_smooth(online, {}, opts);
  CHECK(own.fits[2].size() == online[2].size());
  opts.grid = { 0.1, 0.2 };
  auto shared = cv_smooth(online, t0s, opts);
  CHECK(shared.per_curve[0].bandwidth_grid == opts.grid);

  std::vector<double> bad{ -0.1 };
  CHECK_THROWS_AS(cv_smooth(online, bad, opts), DataError);
}
