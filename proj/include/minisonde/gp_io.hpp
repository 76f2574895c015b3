#pragma once

#include <json.hpp>

#include "minisonde/gp.hpp"

namespace minisonde::gp {

/// Hyperparameters, normalization constants and standardized training data.
/// The Cholesky factor and alpha are recomputed on load.
nlohmann::json to_json(const GpModel<double>& model);
GpModel<double> model_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const RbfParams<double>& params);
RbfParams<double> params_from_json(const nlohmann::json& j);

}  // namespace minisonde::gp
