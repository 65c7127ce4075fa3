#include "ditto/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ditto/errors.hpp"
#include "ditto/numeric.hpp"

namespace ditto {
namespace {

constexpr double kHuge = std::numeric_limits<double>::max();

/// Symmetric-interval map onto (-1, 1): -1 + 2 logistic(t) == tanh(t / 2).
double to_symmetric(double t) { return std::tanh(0.5 * t); }
double from_symmetric(double x) { return 2.0 * std::atanh(x); }

template <class T>
const T& expect(const Dataset& data, std::string_view model) {
  const T* p = std::get_if<T>(&data);
  if (p == nullptr) throw InvalidArgument(std::string(model) + ": dataset has the wrong payload type");
  return *p;
}

void check_dim(const Vector& v, int d, std::string_view what) {
  if (v.size() != d) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(d) + " parameters, got " +
                          std::to_string(v.size()));
  }
}

/// Product-of-Bernoulli envelope over +/-1 sites. Site k is +1 with
/// probability p_k; the unnormalized log density is supplied by the model.
template <class LogF>
class SpinEnvelope final : public Envelope {
 public:
  SpinEnvelope(std::vector<double> probs, LogF log_f) : probs_(std::move(probs)), log_f_(std::move(log_f)) {
    log_p_.reserve(probs_.size());
    log_q_.reserve(probs_.size());
    for (double p : probs_) {
      log_p_.push_back(std::log(p));
      log_q_.push_back(std::log1p(-p));
    }
  }

  double draw_log_ratio(Rng& rng) const override {
    thread_local std::vector<std::int8_t> x;
    x.resize(probs_.size());
    double log_g = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
      if (rng.uniform() < probs_[k]) {
        x[k] = 1;
        log_g += log_p_[k];
      } else {
        x[k] = -1;
        log_g += log_q_[k];
      }
    }
    return log_f_(x) - log_g;
  }

 private:
  std::vector<double> probs_;
  std::vector<double> log_p_;
  std::vector<double> log_q_;
  LogF log_f_;
};

/// Sum over all +/-1 configurations of `sites` spins of exp(log_f(x)).
template <class LogF>
double enumerate_log_sum(int sites, LogF log_f) {
  std::vector<std::int8_t> x(static_cast<std::size_t>(sites));
  const std::uint64_t total = std::uint64_t{1} << sites;
  std::vector<double> terms;
  terms.reserve(total);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (int k = 0; k < sites; ++k) x[static_cast<std::size_t>(k)] = ((mask >> k) & 1u) ? 1 : -1;
    terms.push_back(log_f(x));
  }
  return log_sum_exp(terms);
}

IsingStats lattice_stats(const std::vector<std::int8_t>& s, int rows, int cols) {
  IsingStats st;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int v = s[static_cast<std::size_t>(i * cols + j)];
      st.v0 += v;
      if (i + 1 < rows) st.v1 += v * s[static_cast<std::size_t>((i + 1) * cols + j)];
      if (j + 1 < cols) st.v1 += v * s[static_cast<std::size_t>(i * cols + j + 1)];
    }
  }
  return st;
}

double lattice_neighbour_sum(const std::vector<std::int8_t>& s, int rows, int cols, int i, int j) {
  double a = 0.0;
  if (i + 1 < rows) a += s[static_cast<std::size_t>((i + 1) * cols + j)];
  if (j + 1 < cols) a += s[static_cast<std::size_t>(i * cols + j + 1)];
  if (i - 1 >= 0) a += s[static_cast<std::size_t>((i - 1) * cols + j)];
  if (j - 1 >= 0) a += s[static_cast<std::size_t>(i * cols + j - 1)];
  return a;
}

double chain_log_f(const std::vector<std::int8_t>& y, const Vector& xi) {
  double field = 0.0, pair = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    field += y[i];
    if (i >= 1) pair += xi[static_cast<Eigen::Index>(i)] * y[i - 1] * y[i];
  }
  return xi[0] * field + pair;
}

double chain_predictor(const std::vector<std::int8_t>& y, const Vector& xi, std::size_t i) {
  double eta = xi[0];
  if (i >= 1) eta += xi[static_cast<Eigen::Index>(i)] * y[i - 1];
  if (i + 1 < y.size()) eta += xi[static_cast<Eigen::Index>(i + 1)] * y[i + 1];
  return eta;
}

/// Count of points in `pts` (excluding index `skip`) within `radius` of u.
int neighbours_within(const std::vector<std::array<double, 2>>& pts, const std::array<double, 2>& u, double radius,
                      std::size_t skip) {
  const double r2 = radius * radius;
  int count = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k == skip) continue;
    const double dx = pts[k][0] - u[0];
    const double dy = pts[k][1] - u[1];
    if (dx * dx + dy * dy <= r2) ++count;
  }
  return count;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::normal_gamma: return "normal_gamma";
    case ModelKind::ising: return "ising";
    case ModelKind::strauss: return "strauss";
    case ModelKind::autologistic: return "autologistic";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "normal_gamma") return ModelKind::normal_gamma;
  if (name == "ising") return ModelKind::ising;
  if (name == "strauss") return ModelKind::strauss;
  if (name == "autologistic") return ModelKind::autologistic;
  throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

bool PriorBox::contains(const Vector& natural) const {
  if (static_cast<std::size_t>(natural.size()) != lower.size()) return false;
  for (std::size_t k = 0; k < lower.size(); ++k) {
    const double v = natural[static_cast<Eigen::Index>(k)];
    if (!(v > lower[k] && v < upper[k])) return false;
  }
  return true;
}

IsingStats ising_stats(const SpinLattice& lattice) {
  return lattice_stats(lattice.spins, lattice.rows, lattice.cols);
}

std::int64_t close_pairs(const std::vector<std::array<double, 2>>& points, double radius) {
  const std::size_t n = points.size();
  if (n < 2) return 0;
  const double r2 = radius * radius;
  if (n <= 128) {
    std::int64_t count = 0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double dx = points[a][0] - points[b][0];
        const double dy = points[a][1] - points[b][1];
        if (dx * dx + dy * dy <= r2) ++count;
      }
    }
    return count;
  }
  // Uniform cell grid over the unit square; points are bucketed by cell and
  // only the 3x3 neighbourhood of each cell is scanned.
  const int cells = std::clamp(static_cast<int>(1.0 / radius), 1, 512);
  const auto cell_of = [cells](double v) { return std::clamp(static_cast<int>(v * cells), 0, cells - 1); };
  std::vector<std::vector<std::size_t>> grid(static_cast<std::size_t>(cells * cells));
  for (std::size_t k = 0; k < n; ++k) {
    grid[static_cast<std::size_t>(cell_of(points[k][0]) * cells + cell_of(points[k][1]))].push_back(k);
  }
  std::int64_t count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const int cx = cell_of(points[k][0]);
    const int cy = cell_of(points[k][1]);
    for (int gx = std::max(0, cx - 1); gx <= std::min(cells - 1, cx + 1); ++gx) {
      for (int gy = std::max(0, cy - 1); gy <= std::min(cells - 1, cy + 1); ++gy) {
        for (std::size_t other : grid[static_cast<std::size_t>(gx * cells + gy)]) {
          if (other <= k) continue;
          const double dx = points[k][0] - points[other][0];
          const double dy = points[k][1] - points[other][1];
          if (dx * dx + dy * dy <= r2) ++count;
        }
      }
    }
  }
  return count;
}

double ising_conditional_prob(double theta0, double theta1, double neighbour_sum) {
  return logistic(2.0 * (theta0 + theta1 * neighbour_sum));
}

double autologistic_conditional_prob(double linear_predictor) {
  return logistic(2.0 * linear_predictor);
}

std::function<double(const Vector&)> Model::bind_log_lik(const Dataset& data) const {
  validate(data);
  auto owned = std::make_shared<const Dataset>(data);
  return [this, owned](const Vector& natural) { return log_unnorm_lik(*owned, natural); };
}

std::unique_ptr<Envelope> Model::make_envelope(const Dataset&, const Vector&) const {
  throw InvalidArgument(std::string(name()) + ": model has no importance envelope");
}

double Model::envelope_draw_log_ratio(const Dataset& data, const Vector& natural, Rng& rng) const {
  return make_envelope(data, natural)->draw_log_ratio(rng);
}

// Normal-gamma ----------------------------------------------------------------

NormalGammaModel::NormalGammaModel(int n, NormalGammaPriors priors) : n_(n), priors_(priors) {
  if (n < 1) throw InvalidArgument("normal_gamma: sample size must be positive");
  if (priors.alpha0 <= 0 || priors.beta0 <= 0) throw InvalidArgument("normal_gamma: alpha0, beta0 must be positive");
}

PriorBox NormalGammaModel::prior_box() const { return {{-kHuge, 0.0}, {kHuge, kHuge}}; }

Vector NormalGammaModel::to_natural(const Vector& theta) const {
  check_dim(theta, 2, "normal_gamma");
  return Vector{{theta[0], std::exp(2.0 * theta[1])}};
}

Vector NormalGammaModel::to_unconstrained(const Vector& natural) const {
  check_dim(natural, 2, "normal_gamma");
  return Vector{{natural[0], 0.5 * std::log(natural[1])}};
}

double NormalGammaModel::log_prior_unconstrained(const Vector& theta) const {
  check_dim(theta, 2, "normal_gamma");
  const double psi = theta[0];
  const double phi = theta[1];
  const double tau = std::exp(2.0 * phi);
  const double d = psi - priors_.psi0;
  // psi | tau ~ N(psi0, 1 / tau)
  const double log_normal = 0.5 * std::log(tau) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * tau * d * d;
  // tau ~ Gamma(alpha0, rate beta0), log tau = 2 phi
  const double log_gamma = priors_.alpha0 * std::log(priors_.beta0) - std::lgamma(priors_.alpha0) +
                           (priors_.alpha0 - 1.0) * 2.0 * phi - priors_.beta0 * tau;
  const double log_jacobian = std::log(2.0) + 2.0 * phi;
  return log_normal + log_gamma + log_jacobian;
}

double NormalGammaModel::log_unnorm_lik(const Dataset& data, const Vector& natural) const {
  const auto& y = expect<RealSample>(data, "normal_gamma").values;
  const double psi = natural[0];
  const double tau = natural[1];
  double ss = 0.0;
  for (double v : y) ss += (v - psi) * (v - psi);
  return -0.5 * tau * ss;
}

Dataset NormalGammaModel::generate_data(const Vector& natural, const DataGenConfig&, Rng& rng) const {
  check_dim(natural, 2, "normal_gamma");
  if (!(natural[1] > 0)) throw InvalidArgument("normal_gamma: tau must be positive");
  RealSample out;
  out.values.reserve(static_cast<std::size_t>(n_));
  const double sd = 1.0 / std::sqrt(natural[1]);
  for (int k = 0; k < n_; ++k) out.values.push_back(natural[0] + sd * rng.normal());
  return out;
}

double NormalGammaModel::oracle_log_normconst(const Vector& natural) const {
  return 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(natural[1]);
}

void NormalGammaModel::validate(const Dataset& data) const {
  const auto& y = expect<RealSample>(data, "normal_gamma").values;
  if (static_cast<int>(y.size()) != n_) throw InvalidArgument("normal_gamma: dataset size does not match model");
  for (double v : y) {
    if (!std::isfinite(v)) throw InvalidArgument("normal_gamma: non-finite observation");
  }
}

NormalGammaMarginals normal_gamma_analytic_marginals(const RealSample& data, const NormalGammaPriors& priors) {
  const auto& y = data.values;
  if (y.empty()) throw InvalidArgument("normal_gamma_analytic_marginals: empty data");
  const double n = static_cast<double>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  double s2 = 0.0;
  for (double v : y) s2 += (v - mean) * (v - mean);
  s2 /= n;

  NormalGammaMarginals m;
  m.psi_n = (n * mean + priors.psi0) / (n + 1.0);
  m.dof = 2.0 * priors.alpha0 + n;
  m.shape = priors.alpha0 + n / 2.0;
  m.rate = priors.beta0 + n * s2 / 2.0 + n * (priors.psi0 - mean) * (priors.psi0 - mean) / (2.0 * (n + 1.0));
  // Marginal precision of psi: (n + 1) * E-shape / rate.
  m.lambda_n = (n + 1.0) * m.shape / m.rate;
  return m;
}

// Ising -------------------------------------------------------------------------

IsingModel::IsingModel(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw InvalidArgument("ising: lattice dimensions must be positive");
}

PriorBox IsingModel::prior_box() const { return {{-1.0, 0.0}, {1.0, 1.0}}; }

Vector IsingModel::to_natural(const Vector& theta) const {
  check_dim(theta, 2, "ising");
  return Vector{{to_symmetric(theta[0]), logistic(theta[1])}};
}

Vector IsingModel::to_unconstrained(const Vector& natural) const {
  check_dim(natural, 2, "ising");
  return Vector{{from_symmetric(natural[0]), logit(natural[1])}};
}

double IsingModel::log_prior_unconstrained(const Vector& theta) const {
  check_dim(theta, 2, "ising");
  // U(-1,1) density 1/2 times Jacobian 2 sigma', U(0,1) density times sigma'.
  return log_logistic_deriv(theta[0]) + log_logistic_deriv(theta[1]);
}

double IsingModel::log_unnorm_lik(const Dataset& data, const Vector& natural) const {
  const auto st = ising_stats(expect<SpinLattice>(data, "ising"));
  return natural[0] * st.v0 + natural[1] * st.v1;
}

std::function<double(const Vector&)> IsingModel::bind_log_lik(const Dataset& data) const {
  validate(data);
  const auto st = ising_stats(std::get<SpinLattice>(data));
  return [st](const Vector& natural) { return natural[0] * st.v0 + natural[1] * st.v1; };
}

std::unique_ptr<Envelope> IsingModel::make_envelope(const Dataset& data, const Vector& natural) const {
  const auto& y = expect<SpinLattice>(data, "ising");
  const double t0 = natural[0];
  const double t1 = natural[1];
  std::vector<double> probs;
  probs.reserve(y.spins.size());
  for (int i = 0; i < y.rows; ++i) {
    for (int j = 0; j < y.cols; ++j) {
      probs.push_back(ising_conditional_prob(t0, t1, lattice_neighbour_sum(y.spins, y.rows, y.cols, i, j)));
    }
  }
  const int rows = y.rows, cols = y.cols;
  auto log_f = [t0, t1, rows, cols](const std::vector<std::int8_t>& x) {
    const auto st = lattice_stats(x, rows, cols);
    return t0 * st.v0 + t1 * st.v1;
  };
  return std::make_unique<SpinEnvelope<decltype(log_f)>>(std::move(probs), log_f);
}

Dataset IsingModel::generate_data(const Vector& natural, const DataGenConfig& config, Rng& rng) const {
  if (config.gibbs_sweeps < 1) throw InvalidArgument("ising: gibbs_sweeps must be positive");
  if (!prior_box().contains(natural)) throw InvalidArgument("ising: true parameters outside the prior box");
  SpinLattice y{rows_, cols_, std::vector<std::int8_t>(static_cast<std::size_t>(rows_ * cols_))};
  for (auto& s : y.spins) s = rng.bernoulli(0.5) ? 1 : -1;
  for (std::int64_t sweep = 0; sweep < config.gibbs_sweeps; ++sweep) {
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) {
        const double p = ising_conditional_prob(natural[0], natural[1], lattice_neighbour_sum(y.spins, rows_, cols_, i, j));
        y.spins[static_cast<std::size_t>(i * cols_ + j)] = rng.uniform() < p ? 1 : -1;
      }
    }
  }
  return y;
}

double IsingModel::oracle_log_normconst(const Vector& natural) const {
  if (rows_ * cols_ > 16) throw UnsupportedOracle("ising: exact normalizer limited to 16 sites");
  const double t0 = natural[0], t1 = natural[1];
  const int rows = rows_, cols = cols_;
  return enumerate_log_sum(rows * cols, [&](const std::vector<std::int8_t>& x) {
    const auto st = lattice_stats(x, rows, cols);
    return t0 * st.v0 + t1 * st.v1;
  });
}

void IsingModel::validate(const Dataset& data) const {
  const auto& y = expect<SpinLattice>(data, "ising");
  if (y.rows != rows_ || y.cols != cols_ || y.spins.size() != static_cast<std::size_t>(rows_ * cols_)) {
    throw InvalidArgument("ising: lattice shape does not match model");
  }
  for (auto s : y.spins) {
    if (s != 1 && s != -1) throw InvalidArgument("ising: spins must be -1 or +1");
  }
}

// Strauss -----------------------------------------------------------------------

namespace {

class PoissonEnvelope final : public Envelope {
 public:
  PoissonEnvelope(double rho, double log_beta, double log_gamma, double radius)
      : rho_(rho), log_rho_(std::log(rho)), log_beta_(log_beta), log_gamma_(log_gamma), radius_(radius) {}

  double draw_log_ratio(Rng& rng) const override {
    const std::int64_t count = rng.poisson(rho_);
    double log_f = static_cast<double>(count) * log_beta_;
    if (log_gamma_ != 0.0 && count > 1) {
      thread_local std::vector<std::array<double, 2>> pts;
      pts.resize(static_cast<std::size_t>(count));
      for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
      log_f += static_cast<double>(close_pairs(pts, radius_)) * log_gamma_;
    }
    // g(X) = exp(1 - rho) rho^N against the unit-rate Poisson process
    const double log_g = (1.0 - rho_) + static_cast<double>(count) * log_rho_;
    return log_f - log_g;
  }

 private:
  double rho_;
  double log_rho_;
  double log_beta_;
  double log_gamma_;
  double radius_;
};

}  // namespace

StraussModel::StraussModel(double radius, double beta_max) : radius_(radius), beta_max_(beta_max) {
  if (!(radius > 0)) throw InvalidArgument("strauss: interaction radius must be positive");
  if (!(beta_max > 0)) throw InvalidArgument("strauss: beta upper bound must be positive");
}

PriorBox StraussModel::prior_box() const { return {{0.0, 0.0}, {beta_max_, 1.0}}; }

Vector StraussModel::to_natural(const Vector& theta) const {
  check_dim(theta, 2, "strauss");
  return Vector{{beta_max_ * logistic(theta[0]), logistic(theta[1])}};
}

Vector StraussModel::to_unconstrained(const Vector& natural) const {
  check_dim(natural, 2, "strauss");
  return Vector{{logit(natural[0] / beta_max_), logit(natural[1])}};
}

double StraussModel::log_prior_unconstrained(const Vector& theta) const {
  check_dim(theta, 2, "strauss");
  return log_logistic_deriv(theta[0]) + log_logistic_deriv(theta[1]);
}

double StraussModel::log_unnorm_lik(const Dataset& data, const Vector& natural) const {
  const auto& y = expect<PointPattern>(data, "strauss");
  const double n = static_cast<double>(y.points.size());
  const double s = static_cast<double>(close_pairs(y.points, y.radius));
  return n * std::log(natural[0]) + (s > 0 ? s * std::log(natural[1]) : 0.0);
}

std::function<double(const Vector&)> StraussModel::bind_log_lik(const Dataset& data) const {
  validate(data);
  const auto& y = std::get<PointPattern>(data);
  const double n = static_cast<double>(y.points.size());
  const double s = static_cast<double>(close_pairs(y.points, y.radius));
  return [n, s](const Vector& natural) {
    return n * std::log(natural[0]) + (s > 0 ? s * std::log(natural[1]) : 0.0);
  };
}

std::unique_ptr<Envelope> StraussModel::make_envelope(const Dataset& data, const Vector& natural) const {
  const auto& y = expect<PointPattern>(data, "strauss");
  // Intensity matches the observed count so f and g agree on average size.
  const double rho = std::max<double>(1.0, static_cast<double>(y.points.size()));
  return std::make_unique<PoissonEnvelope>(rho, std::log(natural[0]), std::log(natural[1]), y.radius);
}

Dataset StraussModel::generate_data(const Vector& natural, const DataGenConfig& config, Rng& rng) const {
  if (config.point_process_iterations < 1) throw InvalidArgument("strauss: iterations must be positive");
  if (!prior_box().contains(natural) && !(natural[1] == 1.0 && natural[0] > 0)) {
    throw InvalidArgument("strauss: true parameters outside the prior box");
  }
  const double beta = natural[0];
  const double log_gamma = std::log(natural[1]);
  PointPattern y;
  y.radius = radius_;
  auto& pts = y.points;
  const auto log_papangelou = [&](const std::array<double, 2>& u, std::size_t skip) {
    const int t = neighbours_within(pts, u, radius_, skip);
    return std::log(beta) + (t > 0 ? t * log_gamma : 0.0);
  };
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  for (std::int64_t it = 0; it < config.point_process_iterations; ++it) {
    const double move = rng.uniform();
    const double n = static_cast<double>(pts.size());
    if (move < 1.0 / 3.0) {
      // birth: window area is 1
      const std::array<double, 2> u{rng.uniform(), rng.uniform()};
      const double log_ratio = log_papangelou(u, kNone) - std::log(n + 1.0);
      if (std::log(rng.uniform_pos()) <= log_ratio) pts.push_back(u);
    } else if (move < 2.0 / 3.0) {
      if (pts.empty()) continue;
      const std::size_t k = rng.index(pts.size());
      const double log_ratio = std::log(n) - log_papangelou(pts[k], k);
      if (std::log(rng.uniform_pos()) <= log_ratio) {
        pts[k] = pts.back();
        pts.pop_back();
      }
    } else {
      if (pts.empty()) continue;
      const std::size_t k = rng.index(pts.size());
      const std::array<double, 2> u{rng.uniform(), rng.uniform()};
      const double log_ratio = log_papangelou(u, k) - log_papangelou(pts[k], k);
      if (std::log(rng.uniform_pos()) <= log_ratio) pts[k] = u;
    }
  }
  return y;
}

double StraussModel::oracle_log_normconst(const Vector& natural) const {
  if (natural[1] != 1.0) throw UnsupportedOracle("strauss: exact normalizer only available at gamma = 1");
  // integral of beta^n(x) against the unit-rate Poisson process on a unit window
  return natural[0] - 1.0;
}

void StraussModel::validate(const Dataset& data) const {
  const auto& y = expect<PointPattern>(data, "strauss");
  if (!(y.radius > 0)) throw InvalidArgument("strauss: interaction radius must be positive");
  for (const auto& p : y.points) {
    if (!(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0)) {
      throw InvalidArgument("strauss: points must lie in the unit square");
    }
  }
}

// Autologistic ------------------------------------------------------------------

AutologisticModel::AutologisticModel(int n) : n_(n) {
  if (n < 2) throw InvalidArgument("autologistic: chain length must be at least 2");
}

PriorBox AutologisticModel::prior_box() const {
  PriorBox box{std::vector<double>(static_cast<std::size_t>(n_), 0.0), std::vector<double>(static_cast<std::size_t>(n_), 1.0)};
  box.lower[0] = -1.0;
  return box;
}

std::vector<std::string> AutologisticModel::parameter_names() const {
  std::vector<std::string> names;
  for (int k = 1; k <= n_; ++k) names.push_back("xi" + std::to_string(k));
  return names;
}

Vector AutologisticModel::to_natural(const Vector& theta) const {
  check_dim(theta, n_, "autologistic");
  Vector xi(n_);
  xi[0] = to_symmetric(theta[0]);
  for (int k = 1; k < n_; ++k) xi[k] = logistic(theta[k]);
  return xi;
}

Vector AutologisticModel::to_unconstrained(const Vector& natural) const {
  check_dim(natural, n_, "autologistic");
  Vector theta(n_);
  theta[0] = from_symmetric(natural[0]);
  for (int k = 1; k < n_; ++k) theta[k] = logit(natural[k]);
  return theta;
}

double AutologisticModel::log_prior_unconstrained(const Vector& theta) const {
  check_dim(theta, n_, "autologistic");
  double lp = 0.0;
  for (int k = 0; k < n_; ++k) lp += log_logistic_deriv(theta[k]);
  return lp;
}

double AutologisticModel::log_unnorm_lik(const Dataset& data, const Vector& natural) const {
  return chain_log_f(expect<SpinChain>(data, "autologistic").spins, natural);
}

std::unique_ptr<Envelope> AutologisticModel::make_envelope(const Dataset& data, const Vector& natural) const {
  const auto& y = expect<SpinChain>(data, "autologistic").spins;
  std::vector<double> probs;
  probs.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    probs.push_back(autologistic_conditional_prob(chain_predictor(y, natural, i)));
  }
  Vector xi = natural;
  auto log_f = [xi](const std::vector<std::int8_t>& x) { return chain_log_f(x, xi); };
  return std::make_unique<SpinEnvelope<decltype(log_f)>>(std::move(probs), std::move(log_f));
}

Dataset AutologisticModel::generate_data(const Vector& natural, const DataGenConfig& config, Rng& rng) const {
  check_dim(natural, n_, "autologistic");
  if (config.gibbs_sweeps < 1) throw InvalidArgument("autologistic: gibbs_sweeps must be positive");
  if (!prior_box().contains(natural)) throw InvalidArgument("autologistic: true parameters outside the prior box");
  SpinChain y{std::vector<std::int8_t>(static_cast<std::size_t>(n_))};
  for (auto& s : y.spins) s = rng.bernoulli(0.5) ? 1 : -1;
  for (std::int64_t sweep = 0; sweep < config.gibbs_sweeps; ++sweep) {
    for (std::size_t i = 0; i < y.spins.size(); ++i) {
      const double p = autologistic_conditional_prob(chain_predictor(y.spins, natural, i));
      y.spins[i] = rng.uniform() < p ? 1 : -1;
    }
  }
  return y;
}

double AutologisticModel::oracle_log_normconst(const Vector& natural) const {
  if (n_ > 16) throw UnsupportedOracle("autologistic: exact normalizer limited to 16 sites");
  return enumerate_log_sum(n_, [&](const std::vector<std::int8_t>& x) { return chain_log_f(x, natural); });
}

void AutologisticModel::validate(const Dataset& data) const {
  const auto& y = expect<SpinChain>(data, "autologistic").spins;
  if (static_cast<int>(y.size()) != n_) throw InvalidArgument("autologistic: chain length does not match model");
  for (auto s : y) {
    if (s != 1 && s != -1) throw InvalidArgument("autologistic: spins must be -1 or +1");
  }
}

}  // namespace ditto
