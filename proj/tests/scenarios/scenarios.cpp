#include "scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "ditto/errors.hpp"
#include "ditto/geometry.hpp"
#include "ditto/perfect.hpp"
#include "ditto/rng.hpp"
#include "ditto/tmcmc.hpp"

namespace scenario {

using ditto::Matrix;
using ditto::Vector;

ditto::TestResult kernel_identity(double p_hat, std::uint64_t seed, std::int64_t steps) {
  constexpr int kBins = 50;
  const ditto::EllipsoidalPartition part(Vector::Zero(1), Matrix::Identity(1, 1), {1.0, 1.0, 1});
  std::vector<double> level(kBins);
  for (int b = 0; b < kBins; ++b) {
    // A fixed pseudo-random permutation of evenly spaced levels.
    level[static_cast<std::size_t>(b)] = p_hat + (1.0 - p_hat) * ((b * 17 + 5) % kBins) / (kBins - 1.0);
  }
  const auto bin_of = [](double x) { return std::clamp(static_cast<int>((x + 1.0) * 0.5 * kBins), 0, kBins - 1); };
  const ditto::LogDensity logpi = [&](const Vector& t) {
    return std::log(level[static_cast<std::size_t>(bin_of(t[0]))]);
  };

  ditto::RegionEstimate region;
  region.index = 1;
  region.p_hat = p_hat;

  const double start = 0.31;
  const double w0 = level[static_cast<std::size_t>(bin_of(start))];
  std::vector<double> expected(kBins + 1, 0.0);
  double moved = 0.0;
  for (int b = 0; b < kBins; ++b) {
    const double prob = std::min(1.0, level[static_cast<std::size_t>(b)] / w0) / kBins;
    expected[static_cast<std::size_t>(b)] = prob;
    moved += prob;
  }
  expected[kBins] = 1.0 - moved;

  std::vector<std::size_t> counts(kBins + 1, 0);
  ditto::Rng rng = ditto::rng_stream(seed, "kernel-identity", static_cast<std::uint64_t>(std::lround(p_hat * 1000)));
  for (std::int64_t s = 0; s < steps; ++s) {
    if (rng.uniform() < p_hat) {
      ++counts[static_cast<std::size_t>(bin_of(ditto::sample_uniform_annulus(part, 1, rng)[0]))];
      continue;
    }
    ditto::ChainState st{Vector::Constant(1, start), std::log(w0)};
    if (ditto::residual_step(st, region, part, logpi, rng)) {
      ++counts[static_cast<std::size_t>(bin_of(st.theta[0]))];
    } else {
      ++counts[kBins];
    }
  }
  return ditto::chi_square_gof(counts, expected);
}

GaussianPerfectReport gaussian_perfect(std::uint64_t seed, std::int64_t n) {
  const Vector mean{{0.5, -1.0}};
  Matrix cov(2, 2);
  cov << 1.0, 0.6, 0.6, 2.0;
  const Matrix prec = cov.inverse();
  const ditto::LogDensity logpi = [&](const Vector& t) {
    const Vector z = t - mean;
    return -0.5 * z.dot(prec * z);
  };
  ditto::EllipsoidalPartition part(mean, cov, {1.0, 0.25, 20});
  std::vector<ditto::RegionEstimate> regions;
  for (std::size_t i = 1; i <= part.size(); ++i) {
    ditto::Rng rng = ditto::rng_stream(seed, "region", i);
    regions.push_back(ditto::estimate_region(part, i, logpi, 5000, 0.05, rng));
  }

  GaussianPerfectReport rep;
  rep.draws = n;
  std::vector<double> perfect[2], direct[2];
  std::vector<double> tail_prob(22, 0.0);  // T = 1..21, then T > 21
  std::vector<std::size_t> t_counts(22, 0);
  Matrix s = Matrix::Zero(2, 2);
  Vector m = Vector::Zero(2);
  std::vector<Vector> kept;
  std::uint64_t widen_gen = 0;
  for (std::int64_t t = 0; t < n; ++t) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      ditto::Rng rng = ditto::rng_stream(seed, "draw", static_cast<std::uint64_t>(t) * 64 + attempt);
      const std::size_t i = ditto::select_region(regions, rng);
      try {
        const auto d = ditto::perfect_draw(regions[i - 1], part, logpi, rng);
        const double p = regions[i - 1].p_hat;
        double cdf = 0.0;
        for (std::size_t k = 0; k < 21; ++k) {
          const double pk = p * std::pow(1.0 - p, static_cast<double>(k));
          tail_prob[k] += pk;
          cdf += pk;
        }
        tail_prob[21] += 1.0 - cdf;
        ++t_counts[static_cast<std::size_t>(std::min<std::int64_t>(d.backward_time, 22) - 1)];
        kept.push_back(d.theta);
        break;
      } catch (const ditto::MinorizationViolation& v) {
        ++rep.violations;
        ditto::Rng wr = ditto::rng_stream(seed, "widen", widen_gen++);
        regions[v.region() - 1] = ditto::widen_region(part, regions[v.region() - 1], logpi, wr);
      }
    }
  }
  for (const auto& x : kept) m += x;
  m /= static_cast<double>(n);
  for (const auto& x : kept) s += (x - m) * (x - m).transpose();
  s /= static_cast<double>(n - 1);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      rep.cov_error = std::max(rep.cov_error, std::abs(s(a, b) - cov(a, b)) / std::sqrt(cov(a, a) * cov(b, b)));
    }
  }

  const Eigen::LLT<Matrix> llt(cov);
  ditto::Rng direct_rng = ditto::rng_stream(seed, "direct", 0);
  for (std::int64_t t = 0; t < n; ++t) {
    const Vector z{{direct_rng.normal(), direct_rng.normal()}};
    const Vector x = mean + llt.matrixL() * z;
    for (int j = 0; j < 2; ++j) {
      direct[j].push_back(x[j]);
      perfect[j].push_back(kept[static_cast<std::size_t>(t)][j]);
    }
  }
  for (int j = 0; j < 2; ++j) rep.ks_p[static_cast<std::size_t>(j)] = ditto::ks_two_sample(perfect[j], direct[j]).p_value;

  for (double& p : tail_prob) p /= static_cast<double>(n);
  rep.backward_time_p = ditto::chi_square_gof(t_counts, tail_prob).p_value;
  return rep;
}

}  // namespace scenario
