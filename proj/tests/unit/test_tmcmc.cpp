#include <doctest.h>

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "ditto/errors.hpp"
#include "ditto/stats.hpp"
#include "ditto/tmcmc.hpp"
#include "oracles.hpp"

using namespace ditto;

namespace {

double std_normal(const Vector& t) { return -0.5 * t.squaredNorm(); }
double flat(const Vector&) { return 0.0; }

Vector column(const Matrix& m, int j) { return m.col(j); }

std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

TmcmcConfig plain(double scale, std::int64_t keep, std::int64_t thin_a = 1, std::int64_t thin_b = 1) {
  TmcmcConfig c;
  c.scales = Vector::Constant(1, scale);
  c.burn_in = 2000;
  c.keep = keep;
  c.thin_a = thin_a;
  c.thin_b = thin_b;
  return c;
}

}  // namespace

TEST_SUITE("tmcmc") {

TEST_CASE("additive acceptance probability at a fixed step") {
  Rng rng(1, 0);
  const int trials = 1'000'000;
  int accepted = 0;
  for (int k = 0; k < trials; ++k) {
    ChainState s{Vector::Zero(1), 0.0};
    accepted += additive_step(s, Vector::Constant(1, 0.05), std_normal, rng, 1.0) ? 1 : 0;
  }
  const double p = std::exp(-0.00125);
  CHECK(std::abs(static_cast<double>(accepted) / trials - p) <= 4.0 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("flat targets always accept") {
  Rng rng(2, 0);
  ChainState s{Vector::Constant(3, 0.5), 0.0};
  for (int k = 0; k < 1000; ++k) CHECK(additive_step(s, Vector::Constant(1, 0.3), flat, rng));
  ChainState m{Vector::Constant(2, 0.5), 0.0};
  const std::vector<int> balanced{+1, -1};
  CHECK(multiplicative_log_jacobian(0.37, balanced) == 0.0);
  const Vector before = m.theta;
  CHECK(deterministic_step(m, Vector::Constant(1, 0.05), flat, TmcmcMode::additive, 0, rng));
  CHECK((m.theta - before).cwiseAbs().isApprox(Vector::Constant(2, 0.05)));
}

TEST_CASE("proposal maps are inverted by flipping signs") {
  // Dyadic inputs keep the arithmetic exact, so the round trip is bit exact.
  const Vector theta{{0.375, -1.25, 3.0}};
  const std::vector<int> b{+1, -1, -1}, nb{-1, +1, +1};
  const Vector a = Vector::Constant(3, 0.0625);
  CHECK(additive_map(additive_map(theta, a, 1.0, b), a, 1.0, nb) == theta);
  CHECK(multiplicative_map(multiplicative_map(theta, 0.5, b), 0.5, nb) == theta);

  Rng rng(3, 0);
  for (int k = 0; k < 10'000; ++k) {
    const int d = 1 + static_cast<int>(rng.index(6));
    Vector t(d), sc(d);
    std::vector<int> s(d), ns(d);
    for (int j = 0; j < d; ++j) {
      t[j] = rng.uniform(-5, 5);
      sc[j] = rng.uniform(0.01, 1.0);
      s[j] = rng.sign();
      ns[j] = -s[j];
    }
    const double e = std::abs(rng.normal());
    const double eps = rng.uniform(0.01, 1.0);
    const Vector back = additive_map(additive_map(t, sc, e, s), sc, e, ns);
    const Vector mback = multiplicative_map(multiplicative_map(t, eps, s), eps, ns);
    for (int j = 0; j < d; ++j) {
      const double ulp = std::numeric_limits<double>::epsilon();
      REQUIRE(std::abs(back[j] - t[j]) <= 4 * ulp * (std::abs(t[j]) + sc[j] * e));
      REQUIRE(std::abs(mback[j] - t[j]) <= 4 * ulp * std::abs(t[j]));
    }
    // Forward and backward additive acceptance ratios multiply to one.
    const Vector fwd = additive_map(t, sc, e, s);
    const double r1 = std::exp(std_normal(fwd) - std_normal(t));
    const double r2 = std::exp(std_normal(back) - std_normal(fwd));
    REQUIRE(r1 * r2 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("multiplicative Jacobian") {
  const std::vector<int> up{+1, +1};
  CHECK(std::exp(multiplicative_log_jacobian(0.5, up)) == doctest::Approx(0.25).epsilon(1e-15));
  Rng rng(4, 0);
  for (int k = 0; k < 200; ++k) {
    const int d = 1 + static_cast<int>(rng.index(5));
    Vector t(d);
    std::vector<int> s(d);
    for (int j = 0; j < d; ++j) {
      t[j] = rng.uniform(-3, 3);
      s[j] = rng.sign();
    }
    const double eps = rng.uniform(0.05, 1.0);
    Matrix jac(d, d);
    for (int j = 0; j < d; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(t[j]));
      Vector tp = t, tm = t;
      tp[j] += h;
      tm[j] -= h;
      jac.col(j) = (multiplicative_map(tp, eps, s) - multiplicative_map(tm, eps, s)) / (2 * h);
    }
    const double fd = std::abs(jac.determinant());
    const double exact = std::exp(multiplicative_log_jacobian(eps, s));
    CHECK(std::abs(fd - exact) <= 1e-8 * exact);
  }
}

TEST_CASE("mixture chain on a standard normal") {
  Rng rng(5, 0);
  TmcmcConfig c = plain(1.0, 100'000);
  c.mode = TmcmcMode::mixture;
  c.burn_in = 1000;
  const Chain chain = run_chain(std_normal, c, Vector::Constant(1, 0.3), rng);
  oracle::Welford w;
  for (Eigen::Index r = 0; r < chain.draws.rows(); ++r) w.add(chain.draws(r, 0));
  CHECK(std::abs(w.variance() - 1.0) <= 0.05);
  CHECK(chain.acceptance.multiplicative > 0.0);
  CHECK(chain.acceptance.multiplicative <= 1.0);
}

TEST_CASE("deterministic step keeps the target stationary") {
  TmcmcConfig on = plain(1.0, 100'000, 10);
  TmcmcConfig off = on;
  off.deterministic_step = false;
  Rng r1(6, 0), r2(6, 1);
  const Chain a = run_chain(std_normal, on, Vector::Zero(2), r1);
  const Chain b = run_chain(std_normal, off, Vector::Zero(2), r2);
  for (int j = 0; j < 2; ++j) {
    CHECK(ks_two_sample(to_vec(column(a.draws, j)), to_vec(column(b.draws, j))).statistic <= 0.02);
  }
}

TEST_CASE("deterministic-step parity does not change acceptance") {
  // States are drawn exactly from the target so every trial is independent.
  Rng rng(7, 0);
  const int n = 100'000;
  int acc[2] = {0, 0};
  for (int parity = 0; parity < 2; ++parity) {
    for (int k = 0; k < n; ++k) {
      Vector t{{rng.normal(), rng.normal()}};
      ChainState s{t, std_normal(t)};
      acc[parity] += deterministic_step(s, Vector::Constant(1, 0.5), std_normal, TmcmcMode::mixture, parity, rng);
    }
  }
  const double p0 = static_cast<double>(acc[0]) / n, p1 = static_cast<double>(acc[1]) / n;
  const double pooled = 0.5 * (p0 + p1);
  CHECK(std::abs(p0 - p1) <= 2.0 * std::sqrt(pooled * (1 - pooled) * 2.0 / n));
}

TEST_CASE("preset thinning schedule") {
  std::int64_t calls = 0;
  const LogDensity counting = [&](const Vector& t) {
    ++calls;
    return std_normal(t);
  };
  TmcmcConfig c;
  c.scales = Vector::Constant(1, 0.05);
  Rng rng(8, 0);
  const Chain chain = run_chain(counting, c, Vector::Zero(2), rng);
  CHECK(chain.draws.rows() == 10'000);
  // One stochastic and one deterministic evaluation per iteration.
  CHECK(calls == 1 + 2 * (100'000 + 500'000));
}

TEST_CASE("known Gaussian target") {
  Rng rng(9, 0);
  TmcmcConfig c = plain(1.0, 10'000, 10, 5);
  const Chain chain = run_chain(std_normal, c, Vector::Zero(2), rng);
  for (int j = 0; j < 2; ++j) {
    const auto x = to_vec(column(chain.draws, j));
    oracle::Welford w;
    for (double v : x) w.add(v);
    CHECK(std::abs(w.mean()) <= 3.0 * std::sqrt(w.variance() / static_cast<double>(x.size())));
    CHECK(ks_one_sample(x, standard_normal_cdf).p_value > 0.01);
  }
}

TEST_CASE("known-target moments across dimensions") {
  for (int d : {1, 2, 10}) {
    Rng rng(10, static_cast<std::uint64_t>(d));
    TmcmcConfig c = plain(2.4 / std::sqrt(static_cast<double>(d)), 200'000);
    const Chain chain = run_chain(std_normal, c, Vector::Zero(d), rng);
    for (int j = 0; j < d; ++j) {
      oracle::Welford w;
      for (Eigen::Index r = 0; r < chain.draws.rows(); ++r) w.add(chain.draws(r, j));
      CHECK(std::abs(w.mean()) <= 0.03);
      CHECK(w.variance() >= 0.9);
      CHECK(w.variance() <= 1.1);
    }
  }
}

TEST_CASE("degenerate runs") {
  Rng rng(11, 0);
  TmcmcConfig c = plain(0.1, 0);
  CHECK(run_chain(std_normal, c, Vector::Zero(3), rng).draws.rows() == 0);
  const LogDensity walled = [](const Vector& t) {
    return t[0] > 1.0 ? -std::numeric_limits<double>::infinity() : 0.0;
  };
  CHECK_THROWS_AS(run_chain(walled, plain(0.1, 5), Vector::Constant(1, 2.0), rng), BadInit);
  CHECK_THROWS_AS(run_chain(std_normal, plain(0.1, 5), Vector::Constant(1, std::nan("")), rng), BadInit);
  TmcmcConfig bad = plain(0.1, 5);
  bad.multiplicative_floor = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = plain(-1.0, 5);
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

}  // TEST_SUITE
