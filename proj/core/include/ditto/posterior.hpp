#pragma once

#include <functional>
#include <memory>

#include "ditto/models.hpp"
#include "ditto/normconst.hpp"
#include "ditto/tmcmc.hpp"

namespace ditto {

/// log prior + log likelihood - multiplicity * log C, all in the
/// unconstrained parameterization. `log_normconst` receives theta.
LogDensity make_log_posterior(std::shared_ptr<const Model> model, const Dataset& data,
                              std::function<double(const Vector&)> log_normconst);

/// Uses the surrogate's predictive mean for log C.
LogDensity make_surrogate_posterior(std::shared_ptr<const Model> model, const Dataset& data,
                                    std::shared_ptr<const GpSurrogate> surrogate);

/// Uses the model's exact oracle for log C (validation only).
LogDensity make_oracle_posterior(std::shared_ptr<const Model> model, const Dataset& data);

}  // namespace ditto
