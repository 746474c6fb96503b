#include "adasmooth/errors.hpp"
#include "adasmooth/regularity.hpp"
#include "adasmooth/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace adasmooth;

namespace {

struct BrownianOptions
{
  std::size_t n = 1000;
  double mu = 300.0;
  double sigma2 = 0.0;
  double scale = 1.0;
  bool equi = false;
};

// Standard Brownian motion by independent Gaussian increments.
FunctionalSample
brownian_sample(std::uint64_t seed, const BrownianOptions& o)
{
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> pois(o.mu);
  std::uniform_real_distribution<double> u;
  std::normal_distribution<double> z;
  std::vector<Curve> curves;
  for (std::size_t n = 0; n < o.n; ++n) {
    int m = 0;
    do {
      m = pois(rng);
    } while (m < 9);
    std::vector<double> t(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      t[i] = o.equi ? (i + 1.0) / (m + 1.0) : u(rng);
    }
    std::sort(t.begin(), t.end());
    std::vector<double> y(t.size());
    double w = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      w += std::sqrt(t[i] - prev) * z(rng);
      prev = t[i];
      y[i] = o.scale * w + std::sqrt(o.sigma2) * z(rng);
    }
    curves.push_back(Curve{ std::to_string(n), std::move(t), std::move(y) });
  }
  return summarize(std::move(curves));
}

FunctionalSample
transformed(const FunctionalSample& s, double a, double b)
{
  auto curves = s.curves;
  for (auto& c : curves) {
    for (auto& y : c.values) {
      y = a * y + b;
    }
  }
  return summarize(std::move(curves));
}

ThetaStats
triplet(double t1, double t2, double t4)
{
  ThetaStats s;
  s.theta_k = t1;
  s.theta_2k1 = t2;
  s.theta_4k3 = t4;
  s.k = 2;
  s.n_curves = s.n_effective = 1;
  return s;
}

double
median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

} // namespace

TEST_CASE("theta statistics on a line")
{
  LocalObservations obs;
  for (int i = 1; i <= 9; ++i) {
    obs.times.push_back(i / 10.0);
    obs.values.push_back(i / 10.0);
  }
  obs.in_b = true;
  std::vector<LocalObservations> curves{ obs };
  auto s = theta_stats(curves, 2);
  CHECK(s.theta_k == doctest::Approx(0.01));
  CHECK(s.theta_2k1 == doctest::Approx(0.04));
  CHECK(s.theta_4k3 == doctest::Approx(0.16));
  CHECK(s.n_effective == 1);
  CHECK_FALSE(s.eta_k);
  auto h = estimate_h(s);
  CHECK(h.h == doctest::Approx(1.0));

  obs.in_b = false;
  curves.push_back(obs);
  s = theta_stats(curves, 2, 0.5);
  CHECK(s.n_curves == 2);
  CHECK(s.n_effective == 1);
  CHECK(s.theta_k == doctest::Approx(0.005));
  CHECK(*s.eta_k == doctest::Approx(0.05));
  CHECK(*s.eta_2k1 == doctest::Approx(0.1));

  std::vector<LocalObservations> constant(3, obs);
  for (auto& c : constant) {
    c.in_b = true;
    std::fill(c.values.begin(), c.values.end(), 4.2);
  }
  s = theta_stats(constant, 2);
  CHECK(s.theta_k == 0.0);
  CHECK(s.theta_2k1 == 0.0);
  CHECK(s.theta_4k3 == 0.0);

  CHECK_THROWS_AS(theta_stats(curves, 2, 1.5), DataError);
  curves[0].values.pop_back();
  CHECK_THROWS_AS(theta_stats(curves, 2), LagTooLarge);
  curves[0].in_b = false;
  CHECK_THROWS_AS(theta_stats(curves, 2), NoEffectiveCurves);
}

TEST_CASE("Hurst estimators")
{
  auto h = estimate_h(triplet(1, 2, 4));
  CHECK(h.h == doctest::Approx(0.5));
  CHECK_FALSE(h.degenerate);
  h = estimate_h(triplet(1, 2, 2));
  CHECK(h.h == 0.0);
  CHECK(h.degenerate);
  h = estimate_h(triplet(1, 2, 20));
  CHECK(h.h == 1.0);
  CHECK(h.raw > 1.0);
  h = estimate_h(triplet(1, 1.9, 2.5));
  CHECK(h.h == 0.0);
  CHECK(h.raw < 0.0);
  CHECK_FALSE(h.degenerate);

  CHECK(estimate_h_known_sigma(triplet(1, 2, 0), 0.0).h == doctest::Approx(0.5));
  auto k = estimate_h_known_sigma(triplet(1, 2, 0), 0.6);
  CHECK(k.h == 0.0);
  CHECK(k.degenerate);
  CHECK(estimate_h_known_sigma(triplet(1.2, 2.2, 0), 0.1).h == doctest::Approx(0.5));
  CHECK_THROWS_AS(estimate_h_known_sigma(triplet(1, 2, 0), -0.1), NegativeVariance);
}

TEST_CASE("Hölder constant formula")
{
  auto s = triplet(1, 2, 4);
  CHECK_THROWS_AS(estimate_l(s), DataError);
  s.eta_k = 0.25;
  s.eta_2k1 = 0.5;
  CHECK(estimate_l(s) == doctest::Approx(2.0));
  s.eta_2k1 = 0.25;
  CHECK(estimate_l(s) == 0.0);
  s.eta_2k1 = 0.5;
  s.theta_2k1 = 0.5;
  CHECK(estimate_l(s) == 0.0);

  auto sample = brownian_sample(5, { .n = 200 });
  auto doubled = transformed(sample, 2.0, 0.0);
  auto w = window_at(sample, 0.5, 14);
  double l1 = estimate_l(theta_stats(w, sample, 2, 0.5));
  double l2 = estimate_l(theta_stats(w, doubled, 2, 0.5));
  CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-12));
}

TEST_CASE("smoothness test threshold")
{
  CHECK(smoothness_threshold(300.0) == doctest::Approx(0.9692).epsilon(1e-4));
  CHECK(smoothness_test(0.99, 300.0));
  CHECK_FALSE(smoothness_test(0.5, 300.0));
  CHECK_FALSE(smoothness_test(smoothness_threshold(300.0), 300.0));
}

TEST_CASE("lag rules")
{
  CHECK(lag_and_window(17, LagRule::theorem) == std::pair<std::size_t, std::size_t>{ 3, 17 });
  CHECK(lag_and_window(14, LagRule::k0_lag) == std::pair<std::size_t, std::size_t>{ 14, 105 });
}

TEST_CASE("merging statistics of disjoint samples")
{
  auto sample = brownian_sample(11, { .n = 300 });
  auto w = window_at(sample, 0.4, 14);
  FunctionalSample a, b;
  a.curves.assign(sample.curves.begin(), sample.curves.begin() + 100);
  b.curves.assign(sample.curves.begin() + 100, sample.curves.end());
  Window wa = w, wb = w;
  wa.selected.assign(w.selected.begin(), w.selected.begin() + 100);
  wa.in_b.assign(w.in_b.begin(), w.in_b.begin() + 100);
  wb.selected.assign(w.selected.begin() + 100, w.selected.end());
  wb.in_b.assign(w.in_b.begin() + 100, w.in_b.end());
  auto all = theta_stats(w, sample, 2, 0.5);
  auto m = merge(theta_stats(wa, a, 2, 0.5), theta_stats(wb, b, 2, 0.5));
  CHECK(m.n_curves == all.n_curves);
  CHECK(m.n_effective == all.n_effective);
  CHECK(m.theta_k == doctest::Approx(all.theta_k).epsilon(1e-12));
  CHECK(m.theta_2k1 == doctest::Approx(all.theta_2k1).epsilon(1e-12));
  CHECK(m.theta_4k3 == doctest::Approx(all.theta_4k3).epsilon(1e-12));
  CHECK(*m.eta_2k1 == doctest::Approx(*all.eta_2k1).epsilon(1e-12));
  CHECK_THROWS_AS(merge(all, theta_stats(w, sample, 1)), DataError);
}

TEST_CASE("noise variance estimator")
{
  SUBCASE("pure noise")
  {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0.0, std::sqrt(0.05));
    std::vector<Curve> curves;
    for (int n = 0; n < 1000; ++n) {
      std::vector<double> t, y;
      for (int i = 0; i < 300; ++i) {
        t.push_back((i + 0.5) / 300.0);
        y.push_back(z(rng));
      }
      curves.push_back(Curve{ std::to_string(n), t, y });
    }
    auto s = summarize(std::move(curves));
    auto w = window_at(s, 0.5, s.k0_hat);
    CHECK(estimate_sigma2(s, w, false) == doctest::Approx(0.05).epsilon(0.1));
    CHECK(estimate_sigma2(s, w, true) == doctest::Approx(0.05).epsilon(0.1));
  }
  SUBCASE("definition plug-in")
  {
    auto s = summarize({ Curve{ "a", { 0.1, 0.2, 0.3, 0.4 }, { 1.0, 2.0, 0.0, 0.0 } },
                         Curve{ "b", { 0.1, 0.2, 0.3, 0.4 }, { 0.0, 0.0, 0.0, 3.0 } } });
    Window w;
    w.selected = { { 1, 2 }, { 2, 3 } };
    w.in_b = { 1, 1 };
    // global: a -> (1 + 4 + 0) / 6, b -> 9 / 6
    CHECK(estimate_sigma2(s, w, false) == doctest::Approx((5.0 / 6 + 9.0 / 6) / 2));
    // local: differences ending at times inside [T(1), T(K0)] of each window,
    // a -> (1 + 4) / 4, b -> (0 + 9) / 4
    CHECK(estimate_sigma2(s, w, true) == doctest::Approx((5.0 / 4 + 9.0 / 4) / 2));
    w.selected[1].clear();
    CHECK_THROWS_AS(estimate_sigma2(s, w, true), EmptySn);
  }
  SUBCASE("noiseless curves")
  {
    auto sparse = brownian_sample(4, { .n = 50, .mu = 100, .equi = true });
    auto dense = brownian_sample(4, { .n = 50, .mu = 1000, .equi = true });
    double a = estimate_sigma2(sparse, window_at(sparse, 0.5, sparse.k0_hat), false);
    double b = estimate_sigma2(dense, window_at(dense, 0.5, dense.k0_hat), false);
    CHECK(b < a);
    CHECK(b == doctest::Approx(0.5 / 1001).epsilon(0.1));
  }
}

TEST_CASE("Brownian theta differences match the spacing oracle")
{
  auto s = brownian_sample(21, {});
  auto w = window_at(s, 0.5, 14);
  const std::size_t k = 2;
  auto st = theta_stats(w, s, k);
  // per-curve summands for the standard error
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    double v = 0.0;
    if (w.in_b[n]) {
      const auto& c = s.curves[n];
      const auto& sel = w.selected[n];
      double d1 = c.values[sel[2]] - c.values[sel[1]];
      double d2 = c.values[sel[4]] - c.values[sel[2]];
      v = d2 * d2 - d1 * d1;
    }
    sum += v;
    sum2 += v * v;
  }
  double n = static_cast<double>(s.size());
  double mean = sum / n;
  double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(mean == doctest::Approx(st.theta_2k1 - st.theta_k).epsilon(1e-12));
  CHECK(std::abs(mean - (k - 1) / 301.0) < 3.0 * se);
  CHECK(st.n_effective == s.size());
}

TEST_CASE("Hölder constant of Brownian motion")
{
  std::vector<double> ls;
  for (std::uint64_t rep = 0; rep < 5; ++rep) {
    auto s = brownian_sample(100 + rep, {});
    ls.push_back(estimate_l(theta_stats(window_at(s, 0.5, 14), s, 2, 0.5)));
  }
  CHECK(median(ls) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("regularity of noiseless Brownian curves")
{
  auto s = brownian_sample(7, {});
  auto est = estimate_regularity(s, 0.5);
  CHECK(est.d_hat == 0);
  CHECK(est.h_hat == doctest::Approx(0.5).epsilon(0.2));
  CHECK(est.k0 == s.k0_hat);
  CHECK(est.k == s.k0_hat);
  CHECK(est.iterations.size() == 1);
  CHECK(est.sigma2_hat < 0.01);
  CHECK(est.l_hat > 0.0);

  RegularityConfig theorem;
  theorem.lag_rule = LagRule::theorem;
  auto t = estimate_regularity(s, 0.5, theorem);
  CHECK(t.k == choose_k(s.k0_hat));
}

TEST_CASE("known and unknown noise variance agree on Brownian data")
{
  std::vector<double> known, unknown;
  RegularityConfig with;
  with.known_sigma2 = 0.05;
  for (std::uint64_t rep = 0; rep < 25; ++rep) {
    auto s = brownian_sample(200 + rep, { .mu = 1000, .sigma2 = 0.05 });
    known.push_back(estimate_regularity(s, 0.5, with).h_hat);
    unknown.push_back(estimate_regularity(s, 0.5).h_hat);
  }
  CHECK(median(known) == doctest::Approx(0.5).epsilon(0.2));
  // standard error of a median from the interquartile range
  auto se = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double iqr = v[3 * v.size() / 4] - v[v.size() / 4];
    return 1.2533 * (iqr / 1.349) / std::sqrt(static_cast<double>(v.size()));
  };
  double tol = 3.0 * std::hypot(se(known), se(unknown));
  CHECK(std::abs(median(known) - median(unknown)) < tol);
}

TEST_CASE("affine invariance")
{
  auto s = brownian_sample(8, { .n = 300, .sigma2 = 0.01 });
  auto base = estimate_regularity(s, 0.3);
  for (auto [a, b] : { std::pair{ 1.0, 5.0 }, std::pair{ -3.0, 0.0 }, std::pair{ 0.2, -1.0 } }) {
    auto e = estimate_regularity(transformed(s, a, b), 0.3);
    CHECK(e.h_hat == doctest::Approx(base.h_hat).epsilon(1e-9));
    CHECK(e.d_hat == base.d_hat);
    CHECK(e.sigma2_hat == doctest::Approx(a * a * base.sigma2_hat).epsilon(1e-9));
    CHECK(e.l_hat == doctest::Approx(std::abs(a) * base.l_hat).epsilon(1e-9));
  }
}

TEST_CASE("derivative search on smooth curves")
{
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  std::vector<Curve> lines;
  for (int n = 0; n < 200; ++n) {
    double a = z(rng), b = z(rng);
    std::vector<double> t, y;
    for (int i = 0; i < 1000; ++i) {
      t.push_back(i / 999.0);
      y.push_back(a + b * t.back());
    }
    lines.push_back(Curve{ std::to_string(n), t, y });
  }
  auto s = summarize(std::move(lines));
  RegularityConfig none;
  none.d_max = 0;
  CHECK_THROWS_AS(estimate_regularity(s, 0.5, none), MaxDerivativeExceeded);
  none.known_sigma2 = 0.0;
  CHECK_THROWS_AS(estimate_regularity(s, 0.5, none), MaxDerivativeExceeded);
  none.d_max = 2;
  auto h = estimate_h(theta_stats(window_at(s, 0.5, 177), s, 23));
  CHECK(h.h == doctest::Approx(1.0));
}

TEST_CASE("derivative search on integrated Brownian motion")
{
  SimulationSpec spec;
  spec.setting = ProcessKind::integrated_fbm;
  spec.n_learning = 300;
  spec.n_online = 0;
  spec.mu = 1000;
  spec.hurst = { { 1.0, 0.5 } };
  spec.noise = NoiseSpec::constant(1e-6);
  spec.seed = 17;
  SimulationOptions opts;
  opts.dense_grid_size = 0;
  auto data = simulate(spec, opts);
  auto s = summarize(curves_of(data.learning));
  auto est = estimate_regularity(s, 0.5);
  CHECK(est.d_hat == 1);
  REQUIRE(est.iterations.size() == 2);
  CHECK(est.iterations[0].h_clamped > smoothness_threshold(s.mu_hat));
  CHECK(est.iterations[1].d == 1);
  CHECK(est.h_hat == est.iterations[1].h_clamped);
  CHECK(est.degenerate == est.iterations[1].degenerate);
}

TEST_CASE("errors")
{
  auto s = brownian_sample(2, { .n = 50 });
  CHECK_THROWS_AS(theta_stats(window_at(s, 0.5, 8), s, 2), LagTooLarge);
  CHECK_THROWS_AS(estimate_regularity(s, 1.5), DataError);

  std::vector<Curve> far;
  for (int n = 0; n < 20; ++n) {
    std::vector<double> t, y;
    for (int i = 0; i < 20; ++i) {
      t.push_back(0.8 + i * 0.01);
      y.push_back(n + i);
    }
    far.push_back(Curve{ std::to_string(n), t, y });
  }
  auto fs = summarize(std::move(far));
  RegularityConfig theorem;
  theorem.lag_rule = LagRule::theorem;
  CHECK_THROWS_AS(estimate_regularity(fs, 0.1, theorem), NoEffectiveCurves);
}

TEST_CASE("estimate json round trip")
{
  auto s = brownian_sample(9, { .n = 200, .sigma2 = 0.05 });
  auto est = estimate_regularity(s, 0.25);
  nlohmann::json j = est;
  auto back = j.get<RegularityEstimate>();
  CHECK(back.t0 == est.t0);
  CHECK(back.h_hat == est.h_hat);
  CHECK(back.sigma2_hat == est.sigma2_hat);
  CHECK(back.l_hat == est.l_hat);
  CHECK(back.k == est.k);
  CHECK(back.iterations.size() == est.iterations.size());
  CHECK(nlohmann::json(back) == j);
}
