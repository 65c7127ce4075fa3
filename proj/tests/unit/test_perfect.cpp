#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "ditto/errors.hpp"
#include "ditto/numeric.hpp"
#include "ditto/perfect.hpp"
#include "ditto/stats.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace ditto;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

EllipsoidalPartition unit_partition(int d, double sqrt_c1, double step, std::size_t m) {
  return EllipsoidalPartition(Vector::Zero(d), Matrix::Identity(d, d), {sqrt_c1, step, m});
}

RegionEstimate weighted(std::size_t i, double log_weight) {
  RegionEstimate e;
  e.index = i;
  e.log_weight = log_weight;
  e.empty = !std::isfinite(log_weight);
  return e;
}

}  // namespace

TEST_SUITE("perfect") {

TEST_CASE("region estimate of a constant density") {
  const auto part = unit_partition(3, 1.0, 0.5, 4);
  Rng rng(1, 0);
  const LogDensity flat = [](const Vector&) { return -1.7; };
  const RegionEstimate e = estimate_region(part, 3, flat, 100, 0.05, rng);
  CHECK(e.index == 3);
  CHECK(e.log_weight == doctest::Approx(annulus_log_volume(part, 3) - 1.7).epsilon(1e-14));
  CHECK(e.log_s == e.log_S);
  CHECK(e.p_hat == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(e.n_draws == 100);
  CHECK_THROWS_AS(estimate_region(part, 3, flat, 1, 0.05, rng), InvalidArgument);
  CHECK_THROWS_AS(estimate_region(part, 3, flat, 10, 1.0, rng), InvalidArgument);
}

TEST_CASE("region weight of a standard normal interval") {
  const auto part = unit_partition(1, 2.3, 0.1, 1);
  Rng rng = rng_stream(11, "region", 1);
  const LogDensity logpi = [](const Vector& t) { return -0.5 * t[0] * t[0]; };
  const RegionEstimate e = estimate_region(part, 1, logpi, 5000, 0.05, rng);
  const double mass = std::exp(e.log_weight) / std::sqrt(2 * std::numbers::pi);
  const double exact = standard_normal_cdf(2.3) - standard_normal_cdf(-2.3);
  CHECK(std::abs(mass - exact) <= 0.01 * exact);
  CHECK(e.log_s <= e.log_S);
  CHECK(e.p_hat > 0.0);
  CHECK(e.p_hat < 1.0);
  CHECK(e.p_hat == doctest::Approx(0.95 * std::exp(e.log_s - e.log_S)));
}

TEST_CASE("log weights are linear in a constant factor") {
  const auto part = unit_partition(2, 1.0, 0.5, 3);
  const LogDensity base = [](const Vector& t) { return -0.5 * t.squaredNorm(); };
  const LogDensity scaled = [&](const Vector& t) { return base(t) + 1.0; };
  Rng r1(2, 0), r2(2, 0);
  const auto a = estimate_region(part, 2, base, 500, 0.05, r1);
  const auto b = estimate_region(part, 2, scaled, 500, 0.05, r2);
  CHECK(b.log_weight - a.log_weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.p_hat == doctest::Approx(a.p_hat).epsilon(1e-12));
}

TEST_CASE("regions without mass are flagged, not selected") {
  const auto part = unit_partition(2, 1.0, 0.5, 3);
  const LogDensity inner = [](const Vector& t) { return t.squaredNorm() <= 1.0 ? 0.0 : -kInf; };
  Rng rng(3, 0);
  std::vector<RegionEstimate> est;
  for (std::size_t i = 1; i <= 3; ++i) est.push_back(estimate_region(part, i, inner, 200, 0.05, rng));
  CHECK_FALSE(est[0].empty);
  CHECK(est[1].empty);
  CHECK(est[1].log_weight == -kInf);
  for (int k = 0; k < 1000; ++k) CHECK(select_region(est, rng) == 1);
  CHECK_THROWS_AS(perfect_draw(est[2], part, inner, rng), EmptyRegion);
  std::vector<RegionEstimate> none{weighted(1, -kInf), weighted(2, -kInf)};
  CHECK_THROWS_AS(select_region(none, rng), NoMass);
}

TEST_CASE("region selection") {
  std::vector<RegionEstimate> two{weighted(1, std::log(0.3)), weighted(2, std::log(0.7))};
  CHECK(select_region(two, 0.5) == 2);
  CHECK(select_region(two, 0.29) == 1);
  std::vector<RegionEstimate> single{weighted(1, -kInf), weighted(2, 4.0), weighted(3, -kInf)};
  Rng rng(4, 0);
  for (int k = 0; k < 1000; ++k) CHECK(select_region(single, rng) == 2);
  CHECK(select_region(single, 0.0) == 2);
  CHECK(select_region(single, std::nextafter(1.0, 0.0)) == 2);

  // Frequencies over many draws; weights spread over several decades.
  std::vector<RegionEstimate> many;
  const std::vector<double> lw{-3.0, 0.5, 1.0, -0.2, 2.0, -7.0};
  for (std::size_t i = 0; i < lw.size(); ++i) many.push_back(weighted(i + 1, lw[i] + 700.0));
  const double total = log_sum_exp(lw);
  std::vector<int> counts(lw.size(), 0);
  const int n = 1'000'000;
  for (int k = 0; k < n; ++k) ++counts[select_region(many, rng) - 1];
  for (std::size_t i = 0; i < lw.size(); ++i) {
    const double p = std::exp(lw[i] - total);
    CHECK(std::abs(counts[i] / static_cast<double>(n) - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("backward times") {
  Rng rng(5, 0);
  for (int k = 0; k < 1000; ++k) CHECK(draw_backward_time(1.0, rng) == 1);
  CHECK(draw_backward_time(0.5, 0.75) == 1);
  CHECK(draw_backward_time(0.5, 0.25) == 2);
  CHECK(draw_backward_time(0.5, 1.0) == 1);
  CHECK_THROWS_AS(draw_backward_time(0.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(draw_backward_time(1.5, 0.5), InvalidArgument);

  const int n = 1'000'000;
  int ones = 0;
  oracle::Welford w;
  for (int k = 0; k < n; ++k) {
    ones += draw_backward_time(0.5, rng) == 1;
    w.add(static_cast<double>(draw_backward_time(0.2, rng)));
  }
  CHECK(std::abs(ones / static_cast<double>(n) - 0.5) <= 3.0 * std::sqrt(0.25 / n));
  const double se = std::sqrt(0.8) / 0.2 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(w.mean() - 5.0) <= 3.0 * se);
}

TEST_CASE("residual step on a constant density always moves") {
  const auto part = unit_partition(2, 1.0, 1.0, 2);
  const LogDensity flat = [](const Vector&) { return 0.0; };
  Rng rng(6, 0);
  RegionEstimate r = estimate_region(part, 2, flat, 50, 0.05, rng);
  std::vector<double> r2;
  for (int k = 0; k < 20'000; ++k) {
    ChainState s{Vector{{1.5, 0.0}}, 0.0};
    REQUIRE(residual_step(s, r, part, flat, rng));
    r2.push_back(s.theta.squaredNorm());
  }
  // Uniform on the planar annulus 1 < |x| <= 2 means |x|^2 ~ U(1, 4).
  CHECK(ks_one_sample(r2, [](double v) { return std::clamp((v - 1.0) / 3.0, 0.0, 1.0); }).p_value > 0.01);
}

TEST_CASE("residual step detects a violated bracket") {
  const auto part = unit_partition(1, 1.0, 1.0, 1);
  const LogDensity logpi = [](const Vector& t) { return t[0] > 0 ? 0.0 : std::log(0.2); };
  RegionEstimate r;
  r.index = 1;
  r.p_hat = 0.5;
  Rng rng(7, 0);
  bool thrown = false;
  for (int k = 0; k < 100 && !thrown; ++k) {
    ChainState s{Vector::Constant(1, 0.5), 0.0};
    try {
      residual_step(s, r, part, logpi, rng);
    } catch (const MinorizationViolation& v) {
      thrown = true;
      CHECK(v.region() == 1);
    }
  }
  CHECK(thrown);
}

TEST_CASE("residual step with p_hat near zero is an independence sampler step") {
  const auto part = unit_partition(1, 1.0, 1.0, 1);
  const LogDensity logpi = [](const Vector& t) { return t[0]; };
  RegionEstimate r;
  r.index = 1;
  r.p_hat = 1e-300;
  Rng rng(8, 0);
  const int n = 200'000;
  int moves = 0;
  for (int k = 0; k < n; ++k) {
    ChainState s{Vector::Constant(1, 0.0), 0.0};
    moves += residual_step(s, r, part, logpi, rng);
  }
  // Acceptance from 0 with uniform proposals on [-1, 1]: 1/2 + (1 - e^{-1}) / 2.
  const double p = 0.5 + 0.5 * (1.0 - std::exp(-1.0));
  CHECK(std::abs(moves / static_cast<double>(n) - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("kernel identity") {
  for (double p : {0.1, 0.5, 0.9}) {
    CAPTURE(p);
    CHECK(scenario::kernel_identity(p, 31).p_value > 0.01);
  }
}

TEST_CASE("perfect draws on a constant density are uniform") {
  const auto part = unit_partition(2, 1.0, 0.5, 3);
  const LogDensity flat = [](const Vector&) { return 0.0; };
  Rng rng(9, 0);
  RegionEstimate r = estimate_region(part, 2, flat, 50, 1e-9, rng);
  std::vector<double> r2;
  for (int k = 0; k < 20'000; ++k) {
    const auto d = perfect_draw(r, part, flat, rng);
    REQUIRE(d.region == 2);
    REQUIRE(d.backward_time >= 1);
    REQUIRE(mahalanobis_index(part, d.theta).index == 2);
    r2.push_back(d.theta.squaredNorm());
  }
  CHECK(ks_one_sample(r2, [](double v) { return std::clamp((v - 1.0) / 1.25, 0.0, 1.0); }).p_value > 0.01);
}

TEST_CASE("perfect draws from a truncated normal") {
  const auto part = unit_partition(1, 2.3, 0.1, 1);
  const LogDensity logpi = [](const Vector& t) { return -0.5 * t[0] * t[0]; };
  Rng est_rng = rng_stream(12, "region", 1);
  const RegionEstimate r = estimate_region(part, 1, logpi, 5000, 0.05, est_rng);
  Rng rng = rng_stream(12, "draw", 0);
  Rng ref = rng_stream(12, "reference", 0);
  std::vector<double> got, want;
  std::vector<std::size_t> t_counts(31, 0);
  for (int k = 0; k < 10'000; ++k) {
    const auto d = perfect_draw(r, part, logpi, rng);
    got.push_back(d.theta[0]);
    ++t_counts[static_cast<std::size_t>(std::min<std::int64_t>(d.backward_time, 31) - 1)];
    double x;
    do x = ref.normal(); while (std::abs(x) > 2.3);
    want.push_back(x);
  }
  CHECK(ks_two_sample(got, want).p_value > 0.01);
  std::vector<double> expected(31);
  for (std::size_t t = 0; t < 30; ++t) expected[t] = r.p_hat * std::pow(1 - r.p_hat, static_cast<double>(t));
  expected[30] = std::pow(1 - r.p_hat, 30.0);
  CHECK(chi_square_gof(t_counts, expected).p_value > 0.01);
}

TEST_CASE("perfect draws from a Gaussian shell") {
  // d = 3, annulus 2 of a standard normal, against plain rejection.
  const auto part = unit_partition(3, 1.0, 0.75, 3);
  const LogDensity logpi = [](const Vector& t) { return -0.5 * t.squaredNorm(); };
  Rng est_rng(13, 0);
  const RegionEstimate r = estimate_region(part, 2, logpi, 5000, 0.05, est_rng);
  Rng rng(13, 1), ref(13, 2);
  std::vector<double> got, want;
  for (int k = 0; k < 5000; ++k) {
    got.push_back(perfect_draw(r, part, logpi, rng).theta.squaredNorm());
    want.push_back(oracle::rejection_gaussian_shell(Vector::Zero(3), Matrix::Identity(3, 3), 1.0, 1.75 * 1.75, ref)
                       .squaredNorm());
  }
  CHECK(ks_two_sample(got, want).p_value > 0.01);
}

TEST_CASE("perfect sampler on a correlated Gaussian") {
  const auto rep = scenario::gaussian_perfect(14, 10'000);
  CHECK(rep.ks_p[0] > 0.01);
  CHECK(rep.ks_p[1] > 0.01);
  CHECK(rep.cov_error <= 0.05);
  CHECK(rep.backward_time_p > 0.01);
  CHECK(rep.violations <= rep.draws / 100);
}

TEST_CASE("region weight noise follows the square-root law") {
  // Four times the draws halves the spread of the log weight.
  const auto part = unit_partition(2, 1.0, 0.5, 3);
  const LogDensity logpi = [](const Vector& t) { return -0.5 * t.squaredNorm(); };
  oracle::Welford small, large;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng a = rng_stream(15, "small", s), b = rng_stream(15, "large", s);
    small.add(estimate_region(part, 2, logpi, 1000, 0.05, a).log_weight);
    large.add(estimate_region(part, 2, logpi, 4000, 0.05, b).log_weight);
  }
  const double ratio = std::sqrt(large.variance() / small.variance());
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("widening a region") {
  const auto part = unit_partition(2, 1.0, 0.5, 3);
  const LogDensity logpi = [](const Vector& t) { return -0.5 * t.squaredNorm(); };
  Rng rng(16, 0);
  const RegionEstimate before = estimate_region(part, 2, logpi, 100, 0.05, rng);
  const RegionEstimate after = widen_region(part, before, logpi, rng);
  CHECK(after.n_draws == 400);
  CHECK(after.slack == doctest::Approx(0.1));
  CHECK(after.log_weight == before.log_weight);
  CHECK(after.log_s <= before.log_s);
  CHECK(after.log_S >= before.log_S);
  CHECK(after.p_hat <= before.p_hat);
  RegionEstimate wide = after;
  for (int k = 0; k < 5; ++k) wide = widen_region(part, wide, logpi, rng, 2);
  CHECK(wide.slack == 0.5);
}

TEST_CASE("partition doubling") {
  const auto part = unit_partition(2, 2.5, 0.02, 100);
  const auto ext = extend_partition(part);
  CHECK(ext.partition.size() == 200);
  CHECK(ext.first_new == 101);
  CHECK(ext.last_new == 200);
  CHECK(ext.partition.ladder().sqrt_c(101) - ext.partition.ladder().sqrt_c(100) ==
        doctest::Approx(0.02).epsilon(1e-12));
  for (std::size_t i = 1; i <= 100; ++i) REQUIRE(ext.partition.ladder().sqrt_c(i) == part.ladder().sqrt_c(i));
  const auto again = extend_partition(ext.partition);
  CHECK(again.partition.size() == 400);
  CHECK(again.first_new == 201);
  CHECK_THROWS_AS(extend_partition(part, 1), InvalidArgument);
}

}  // TEST_SUITE
