#include "minisonde/gp_io.hpp"

#include <string>
#include <vector>

namespace minisonde::gp {

namespace {

nlohmann::json vec_json(const Vector<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector<double> json_vec(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector<double>>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::json params_to_json(const RbfParams<double>& params) {
  return {{"signal_variance", params.signal_variance},
          {"length_scales", vec_json(params.length_scales)},
          {"noise_variance", params.noise_variance}};
}

RbfParams<double> params_from_json(const nlohmann::json& j) {
  try {
    RbfParams<double> p;
    p.signal_variance = j.at("signal_variance").get<double>();
    p.length_scales = json_vec(j.at("length_scales"));
    p.noise_variance = j.at("noise_variance").get<double>();
    validate(p);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad RBF parameters: ") + e.what());
  }
}

nlohmann::json to_json(const GpModel<double>& model) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.train_x().rows(); ++i) {
    rows.push_back(vec_json(model.train_x().row(i).transpose()));
  }
  return {{"kind", "rbf_gp"},
          {"params", params_to_json(model.params())},
          {"x_mean", vec_json(model.x_norm().mean)},
          {"x_std", vec_json(model.x_norm().std)},
          {"y_mean", model.y_mean()},
          {"y_std", model.y_std()},
          {"train_x", rows},
          {"train_y", vec_json(model.train_y())}};
}

GpModel<double> model_from_json(const nlohmann::json& j) {
  try {
    RbfParams<double> params = params_from_json(j.at("params"));
    Standardizer<double> norm{json_vec(j.at("x_mean")), json_vec(j.at("x_std"))};
    const auto& rows = j.at("train_x");
    Vector<double> y = json_vec(j.at("train_y"));
    Matrix<double> x(static_cast<Eigen::Index>(rows.size()), params.dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Vector<double> r = json_vec(rows[i]);
      if (r.size() != params.dim()) throw DimensionError("training row " + std::to_string(i) + " has wrong width");
      x.row(static_cast<Eigen::Index>(i)) = r.transpose();
    }
    return GpModel<double>::from_standardized(std::move(x), std::move(y), std::move(params), std::move(norm),
                                              j.at("y_mean").get<double>(), j.at("y_std").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad GP model document: ") + e.what());
  }
}

}  // namespace minisonde::gp
