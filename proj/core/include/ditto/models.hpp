#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ditto/rng.hpp"

namespace ditto {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ModelKind { normal_gamma, ising, strauss, autologistic };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// Per-coordinate prior bounds in the natural parameterization.
struct PriorBox {
  std::vector<double> lower;
  std::vector<double> upper;

  bool contains(const Vector& natural) const;
};

// Observation containers -----------------------------------------------------

struct RealSample {
  std::vector<double> values;
};

/// m1 x m2 lattice of +/-1 spins, row-major.
struct SpinLattice {
  int rows = 0;
  int cols = 0;
  std::vector<std::int8_t> spins;

  std::int8_t at(int i, int j) const { return spins[static_cast<std::size_t>(i) * cols + j]; }
};

/// Planar point configuration on the unit square with interaction radius.
struct PointPattern {
  std::vector<std::array<double, 2>> points;
  double radius = 0.05;
};

/// Linear chain of +/-1 spins.
struct SpinChain {
  std::vector<std::int8_t> spins;
};

using Dataset = std::variant<RealSample, SpinLattice, PointPattern, SpinChain>;

/// Knobs for synthetic data generation.
struct DataGenConfig {
  std::int64_t gibbs_sweeps = 1'000'000;
  std::int64_t point_process_iterations = 100'000;
};

/// One pseudo-observation drawn from an importance envelope, reduced to its
/// log importance ratio log f(x) - log g(x).
class Envelope {
 public:
  virtual ~Envelope() = default;
  virtual double draw_log_ratio(Rng& rng) const = 0;
};

struct IsingStats {
  double v0 = 0.0;  // sum of spins
  double v1 = 0.0;  // sum of nearest-neighbour products
};

IsingStats ising_stats(const SpinLattice& lattice);

/// Number of unordered pairs closer than `radius` (inclusive).
std::int64_t close_pairs(const std::vector<std::array<double, 2>>& points, double radius);

/// Target-model abstraction. Parameters are sampled in an unconstrained
/// space; to_natural() is the fixed bijection onto the prior box.
class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;
  std::string_view name() const { return to_string(kind()); }
  virtual int dim() const = 0;
  /// Exponent on the per-unit normalizer C(theta) in the likelihood.
  virtual int normalizer_multiplicity() const { return 1; }
  virtual PriorBox prior_box() const = 0;
  virtual std::vector<std::string> parameter_names() const = 0;

  virtual Vector to_natural(const Vector& theta) const = 0;
  virtual Vector to_unconstrained(const Vector& natural) const = 0;

  /// log prior density of theta including the Jacobian of to_natural.
  virtual double log_prior_unconstrained(const Vector& theta) const = 0;

  /// log f(y | natural) without the normalizing constant.
  virtual double log_unnorm_lik(const Dataset& data, const Vector& natural) const = 0;

  /// log_unnorm_lik with the data bound in; models may precompute their
  /// sufficient statistics. The returned callable owns what it needs.
  virtual std::function<double(const Vector&)> bind_log_lik(const Dataset& data) const;

  virtual bool has_envelope() const { return true; }
  /// Importance envelope g(. | natural) built from the observed data.
  virtual std::unique_ptr<Envelope> make_envelope(const Dataset& data, const Vector& natural) const;

  double envelope_draw_log_ratio(const Dataset& data, const Vector& natural, Rng& rng) const;

  virtual Dataset generate_data(const Vector& natural, const DataGenConfig& config, Rng& rng) const = 0;

  /// Exact log C(natural) where tractable; throws UnsupportedOracle otherwise.
  virtual double oracle_log_normconst(const Vector& natural) const = 0;

  /// Throws InvalidArgument when the dataset does not match this model.
  virtual void validate(const Dataset& data) const = 0;
};

struct NormalGammaPriors {
  double psi0 = 0.0;
  double alpha0 = 1.0;
  double beta0 = 1.0;
};

/// Normal observations with unknown mean psi and precision tau = exp(2 phi).
/// C(theta) = sqrt(2 pi / tau) normalizes one observation, hence the
/// multiplicity equals the sample size.
class NormalGammaModel final : public Model {
 public:
  explicit NormalGammaModel(int n, NormalGammaPriors priors = {});

  ModelKind kind() const override { return ModelKind::normal_gamma; }
  int dim() const override { return 2; }
  int normalizer_multiplicity() const override { return n_; }
  PriorBox prior_box() const override;
  std::vector<std::string> parameter_names() const override { return {"psi", "tau"}; }
  Vector to_natural(const Vector& theta) const override;
  Vector to_unconstrained(const Vector& natural) const override;
  double log_prior_unconstrained(const Vector& theta) const override;
  double log_unnorm_lik(const Dataset& data, const Vector& natural) const override;
  bool has_envelope() const override { return false; }
  Dataset generate_data(const Vector& natural, const DataGenConfig& config, Rng& rng) const override;
  double oracle_log_normconst(const Vector& natural) const override;
  void validate(const Dataset& data) const override;

  const NormalGammaPriors& priors() const { return priors_; }
  int sample_size() const { return n_; }

 private:
  int n_;
  NormalGammaPriors priors_;
};

/// Ising lattice with field theta0 ~ U(-1, 1) and interaction theta1 ~ U(0, 1).
class IsingModel final : public Model {
 public:
  IsingModel(int rows, int cols);

  ModelKind kind() const override { return ModelKind::ising; }
  int dim() const override { return 2; }
  PriorBox prior_box() const override;
  std::vector<std::string> parameter_names() const override { return {"theta0", "theta1"}; }
  Vector to_natural(const Vector& theta) const override;
  Vector to_unconstrained(const Vector& natural) const override;
  double log_prior_unconstrained(const Vector& theta) const override;
  double log_unnorm_lik(const Dataset& data, const Vector& natural) const override;
  std::function<double(const Vector&)> bind_log_lik(const Dataset& data) const override;
  std::unique_ptr<Envelope> make_envelope(const Dataset& data, const Vector& natural) const override;
  Dataset generate_data(const Vector& natural, const DataGenConfig& config, Rng& rng) const override;
  double oracle_log_normconst(const Vector& natural) const override;
  void validate(const Dataset& data) const override;

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  int rows_;
  int cols_;
};

/// Strauss process on [0,1]^2 with beta ~ U(0, 150), gamma ~ U(0, 1).
class StraussModel final : public Model {
 public:
  explicit StraussModel(double radius = 0.05, double beta_max = 150.0);

  ModelKind kind() const override { return ModelKind::strauss; }
  int dim() const override { return 2; }
  PriorBox prior_box() const override;
  std::vector<std::string> parameter_names() const override { return {"beta", "gamma"}; }
  Vector to_natural(const Vector& theta) const override;
  Vector to_unconstrained(const Vector& natural) const override;
  double log_prior_unconstrained(const Vector& theta) const override;
  double log_unnorm_lik(const Dataset& data, const Vector& natural) const override;
  std::function<double(const Vector&)> bind_log_lik(const Dataset& data) const override;
  std::unique_ptr<Envelope> make_envelope(const Dataset& data, const Vector& natural) const override;
  Dataset generate_data(const Vector& natural, const DataGenConfig& config, Rng& rng) const override;
  double oracle_log_normconst(const Vector& natural) const override;
  void validate(const Dataset& data) const override;

  double radius() const { return radius_; }

 private:
  double radius_;
  double beta_max_;
};

/// Autologistic chain with field xi1 ~ U(-1, 1) and nearest-neighbour
/// interactions xi_i ~ U(0, 1), i >= 2. Dimension equals the chain length.
class AutologisticModel final : public Model {
 public:
  explicit AutologisticModel(int n);

  ModelKind kind() const override { return ModelKind::autologistic; }
  int dim() const override { return n_; }
  PriorBox prior_box() const override;
  std::vector<std::string> parameter_names() const override;
  Vector to_natural(const Vector& theta) const override;
  Vector to_unconstrained(const Vector& natural) const override;
  double log_prior_unconstrained(const Vector& theta) const override;
  double log_unnorm_lik(const Dataset& data, const Vector& natural) const override;
  std::unique_ptr<Envelope> make_envelope(const Dataset& data, const Vector& natural) const override;
  Dataset generate_data(const Vector& natural, const DataGenConfig& config, Rng& rng) const override;
  double oracle_log_normconst(const Vector& natural) const override;
  void validate(const Dataset& data) const override;

 private:
  int n_;
};

/// Full-conditional success probability P(y_ij = +1 | rest) of the Ising field.
double ising_conditional_prob(double theta0, double theta1, double neighbour_sum);

/// Full-conditional success probability of an autologistic site given its
/// field-plus-neighbour linear predictor.
double autologistic_conditional_prob(double linear_predictor);

/// Posterior of (psi, tau) under the conjugate normal-gamma prior.
struct NormalGammaMarginals {
  // psi | y ~ Student-t(dof, psi_n, precision lambda_n)
  double psi_n = 0.0;
  double dof = 0.0;
  double lambda_n = 0.0;
  // tau | y ~ Gamma(shape, rate)
  double shape = 0.0;
  double rate = 0.0;
};

NormalGammaMarginals normal_gamma_analytic_marginals(const RealSample& data, const NormalGammaPriors& priors);

}  // namespace ditto
