#include "ditto/validate.hpp"

#include <cmath>
#include <sstream>

#include "ditto/config.hpp"
#include "ditto/engine.hpp"
#include "ditto/errors.hpp"
#include "ditto/normconst.hpp"
#include "ditto/perfect.hpp"
#include "ditto/rng.hpp"
#include "ditto/stats.hpp"

namespace ditto {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

SuiteReport normal_gamma_suite(std::uint64_t seed, int workers) {
  SuiteReport r{"normal-gamma", {}};
  RunConfig config = preset_config("normal_gamma");
  config.seed = seed;
  config.workers = workers;
  const auto res = run_pipeline(config);
  const auto& y = std::get<RealSample>(res.dataset.data);
  const auto m = normal_gamma_analytic_marginals(y, config.model.priors);
  std::vector<double> psi, tau;
  for (Eigen::Index i = 0; i < res.samples.values.rows(); ++i) {
    psi.push_back(res.samples.values(i, 0));
    tau.push_back(res.samples.values(i, 1));
  }
  const auto ks_psi =
      ks_one_sample(psi, [&](double x) { return student_t_cdf(x, m.dof, m.psi_n, m.lambda_n); });
  const auto ks_tau = ks_one_sample(tau, [&](double x) { return gamma_cdf(x, m.shape, m.rate); });
  r.checks.push_back({"psi KS <= 0.02", ks_psi.statistic <= 0.02, "D = " + fmt(ks_psi.statistic)});
  r.checks.push_back({"tau KS <= 0.02", ks_tau.statistic <= 0.02, "D = " + fmt(ks_tau.statistic)});
  return r;
}

void lattice_checks(SuiteReport& r, const Model& model, const Dataset& data, const std::string& label,
                    std::uint64_t seed) {
  Rng pick = rng_stream(seed, "validate-theta", 0);
  const PriorBox box = model.prior_box();
  int ok = 0;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    Vector natural(model.dim());
    for (int j = 0; j < model.dim(); ++j) {
      const auto i = static_cast<std::size_t>(j);
      natural[j] = pick.uniform(box.lower[i], box.upper[i]);
    }
    Rng rng = rng_stream(seed, "validate-is", static_cast<std::uint64_t>(k));
    const double est = is_log_normconst(model, data, natural, 10'000, rng).value;
    const double err = std::abs(est - model.oracle_log_normconst(natural));
    worst = std::max(worst, err);
    ok += err <= 0.05 ? 1 : 0;
  }
  r.checks.push_back({label + " IS within 0.05 for >= 19/20", ok >= 19,
                      std::to_string(ok) + "/20, worst " + fmt(worst)});
}

SuiteReport small_lattice_suite(std::uint64_t seed) {
  SuiteReport r{"small-lattice", {}};
  DataGenConfig gen;
  gen.gibbs_sweeps = 10'000;
  {
    IsingModel model(3, 3);
    Rng rng = rng_stream(seed, "validate-data", 0);
    const Dataset data = model.generate_data(Vector{{0.05, 0.38}}, gen, rng);
    lattice_checks(r, model, data, "ising 3x3", seed);
  }
  {
    AutologisticModel model(10);
    Rng truth = rng_stream(seed, "validate-truth", 0);
    Vector xi(10);
    xi[0] = truth.uniform(-1.0, 1.0);
    for (int j = 1; j < 10; ++j) xi[j] = truth.uniform();
    Rng rng = rng_stream(seed, "validate-data", 1);
    const Dataset data = model.generate_data(xi, gen, rng);
    lattice_checks(r, model, data, "autologistic n=10", seed + 1);
  }
  return r;
}

SuiteReport strauss_suite(std::uint64_t seed) {
  SuiteReport r{"strauss", {}};
  StraussModel model;
  DataGenConfig gen;
  for (double beta : {50.0, 100.0, 150.0}) {
    // Observed pattern drawn at the evaluation point so the envelope
    // intensity matches the process.
    Rng data_rng = rng_stream(seed, "validate-data", static_cast<std::uint64_t>(beta));
    const Dataset data = model.generate_data(Vector{{beta, 1.0}}, gen, data_rng);
    Rng rng = rng_stream(seed, "validate-is", static_cast<std::uint64_t>(beta));
    const double est = is_log_normconst(model, data, Vector{{beta, 1.0}}, 10'000, rng).value;
    const double err = std::abs(est - (beta - 1.0));
    r.checks.push_back({"beta=" + fmt(beta) + " within 5% of beta-1", err <= 0.05 * (beta - 1.0),
                        "error " + fmt(err) + ", n = " +
                            std::to_string(std::get<PointPattern>(data).points.size())});
  }
  return r;
}

SuiteReport kernel_identity_suite(std::uint64_t seed) {
  SuiteReport r{"kernel-identity", {}};
  // Region A_1 = [-1, 1]; step density on 50 bins with levels in [p, 1].
  constexpr int kBins = 50;
  const EllipsoidalPartition part(Vector::Zero(1), Matrix::Identity(1, 1), {1.0, 1.0, 1});
  for (double p : {0.1, 0.5, 0.9}) {
    std::vector<double> level(kBins);
    for (int b = 0; b < kBins; ++b) level[static_cast<std::size_t>(b)] = p + (1.0 - p) * ((b * 37) % kBins) / (kBins - 1.0);
    const auto bin_of = [](double x) { return std::clamp(static_cast<int>((x + 1.0) / 2.0 * kBins), 0, kBins - 1); };
    const LogDensity logpi = [&](const Vector& t) { return std::log(level[static_cast<std::size_t>(bin_of(t[0]))]); };
    RegionEstimate region;
    region.index = 1;
    region.log_s = std::log(p);
    region.log_S = 0.0;
    region.p_hat = p;
    const double start = -0.99;
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
    Rng rng = rng_stream(seed, "validate-kernel", static_cast<std::uint64_t>(p * 100));
    for (int s = 0; s < 1'000'000; ++s) {
      if (rng.uniform() < p) {
        ++counts[static_cast<std::size_t>(bin_of(sample_uniform_annulus(part, 1, rng)[0]))];
        continue;
      }
      ChainState st{Vector::Constant(1, start), std::log(w0)};
      if (residual_step(st, region, part, logpi, rng)) {
        ++counts[static_cast<std::size_t>(bin_of(st.theta[0]))];
      } else {
        ++counts[kBins];
      }
    }
    const auto test = chi_square_gof(counts, expected);
    r.checks.push_back({"p_hat=" + fmt(p) + " chi-square p > 0.01", test.p_value > 0.01,
                        "X2 = " + fmt(test.statistic) + ", p = " + fmt(test.p_value)});
  }
  return r;
}

}  // namespace

bool SuiteReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

std::vector<std::string> validation_suites() {
  return {"normal-gamma", "small-lattice", "strauss", "kernel-identity"};
}

SuiteReport run_validation_suite(std::string_view suite, std::uint64_t seed, int workers) {
  if (suite == "normal-gamma") return normal_gamma_suite(seed, workers);
  if (suite == "small-lattice") return small_lattice_suite(seed);
  if (suite == "strauss") return strauss_suite(seed);
  if (suite == "kernel-identity") return kernel_identity_suite(seed);
  throw InvalidArgument("unknown validation suite '" + std::string(suite) + "'");
}

}  // namespace ditto
