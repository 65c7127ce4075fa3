#include "ditto/posterior.hpp"

namespace ditto {

LogDensity make_log_posterior(std::shared_ptr<const Model> model, const Dataset& data,
                              std::function<double(const Vector&)> log_normconst) {
  auto log_lik = model->bind_log_lik(data);
  const double multiplicity = model->normalizer_multiplicity();
  return [model = std::move(model), log_lik = std::move(log_lik), log_normconst = std::move(log_normconst),
          multiplicity](const Vector& theta) {
    return model->log_prior_unconstrained(theta) + log_lik(model->to_natural(theta)) -
           multiplicity * log_normconst(theta);
  };
}

LogDensity make_surrogate_posterior(std::shared_ptr<const Model> model, const Dataset& data,
                                    std::shared_ptr<const GpSurrogate> surrogate) {
  return make_log_posterior(std::move(model), data,
                            [surrogate = std::move(surrogate)](const Vector& theta) { return surrogate->predict(theta); });
}

LogDensity make_oracle_posterior(std::shared_ptr<const Model> model, const Dataset& data) {
  const Model* raw = model.get();
  return make_log_posterior(std::move(model), data,
                            [raw](const Vector& theta) { return raw->oracle_log_normconst(raw->to_natural(theta)); });
}

}  // namespace ditto
