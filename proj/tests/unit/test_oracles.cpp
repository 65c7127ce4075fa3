#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ditto/rng.hpp"
#include "oracles.hpp"

// The oracles are checked against closed forms before anything relies on them.

TEST_SUITE("oracles") {

TEST_CASE("Gray-code enumeration") {
  // Free spins: every configuration has weight one.
  CHECK(oracle::gray_code_log_sum(10, [](const std::vector<int>&) { return 0.0; }) ==
        doctest::Approx(10 * std::log(2.0)).epsilon(1e-14));
  // Independent fields: product of 2 cosh(h_i).
  const std::vector<double> h{0.3, -1.2, 0.05, 2.0};
  double want = 0.0;
  for (double v : h) want += std::log(2 * std::cosh(v));
  const double got = oracle::gray_code_log_sum(4, [&](const std::vector<int>& x) {
    double e = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) e += h[i] * x[i];
    return e;
  });
  CHECK(got == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("Ising normalizer closed forms") {
  // No coupling: (2 cosh t0)^N.
  CHECK(oracle::ising_log_c(3, 3, 0.4, 0.0) == doctest::Approx(9 * std::log(2 * std::cosh(0.4))).epsilon(1e-13));
  // A 1 x n free chain: 2^n cosh(t1)^(n-1) with no field.
  CHECK(oracle::ising_log_c(1, 6, 0.0, 0.7) ==
        doctest::Approx(6 * std::log(2.0) + 5 * std::log(std::cosh(0.7))).epsilon(1e-13));
}

TEST_CASE("autologistic normalizer closed form") {
  // Field only: independent spins. Couplings only: a free chain.
  std::vector<double> field(8, 0.0);
  field[0] = 0.6;
  CHECK(oracle::autologistic_log_c(field) == doctest::Approx(8 * std::log(2 * std::cosh(0.6))).epsilon(1e-13));
  const std::vector<double> chain{0.0, 0.2, -0.5, 0.9, 0.1};
  double want = 5 * std::log(2.0);
  for (std::size_t i = 1; i < chain.size(); ++i) want += std::log(std::cosh(chain[i]));
  CHECK(oracle::autologistic_log_c(chain) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("quadrature") {
  CHECK(oracle::integrate([](double x) { return std::exp(-x * x); }, -INFINITY, INFINITY) ==
        doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
  CHECK(oracle::integrate_exp([](double x) { return -0.5 * (x - 40) * (x - 40) / 1e-4; }, 40.0, 1e-2) ==
        doctest::Approx(std::sqrt(2 * std::numbers::pi) * 1e-2).epsilon(1e-10));
  double t_mass = oracle::integrate([](double x) { return std::exp(oracle::student_t_log_pdf(x, 3.0, 1.0, 2.0)); },
                                    -INFINITY, INFINITY);
  CHECK(t_mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("streaming moments") {
  oracle::Welford w;
  for (double x : {1.0, 2.0, 3.0, 4.0}) w.add(x);
  CHECK(w.mean() == 2.5);
  CHECK(w.variance() == doctest::Approx(5.0 / 3.0));
  oracle::WelfordCov c(2);
  c.add(ditto::Vector{{0.0, 0.0}});
  c.add(ditto::Vector{{1.0, 2.0}});
  c.add(ditto::Vector{{2.0, 4.0}});
  CHECK(c.covariance()(0, 1) == doctest::Approx(2.0));
  CHECK(c.covariance()(1, 1) == doctest::Approx(4.0));
}

TEST_CASE("rejection shell sampler") {
  ditto::Rng rng(1, 0);
  for (int k = 0; k < 1000; ++k) {
    const auto x = oracle::rejection_gaussian_shell(ditto::Vector::Zero(2), ditto::Matrix::Identity(2, 2), 1.0, 4.0, rng);
    REQUIRE(x.squaredNorm() > 1.0);
    REQUIRE(x.squaredNorm() <= 4.0);
  }
}

}  // TEST_SUITE
