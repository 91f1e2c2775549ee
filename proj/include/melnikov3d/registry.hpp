#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "melnikov3d/chart.hpp"
#include "melnikov3d/field_models.hpp"
#include "melnikov3d/melnikov.hpp"

namespace melnikov3d {

struct ParamInfo {
  std::string name;
  double default_value = 0.0;
  std::string description;
};

struct RegistryEntry {
  std::string name;
  std::string description;
  std::vector<ParamInfo> params;
};

const std::vector<RegistryEntry>& model_registry();
const std::vector<RegistryEntry>& perturbation_registry();

/// Fills defaults and rejects unknown names, unknown parameters and
/// out-of-range values with ConfigError.
ModelParams resolve_model_params(const std::string& model, const ModelParams& given);
ModelParams resolve_perturbation_params(const std::string& perturbation, const ModelParams& given);

std::shared_ptr<const FieldModel> make_field(const std::string& model, const ModelParams& params = {});
std::shared_ptr<const PerturbationModel> make_perturbation(const std::string& name, const ModelParams& params = {});

/// "analytic" (Hill models only) or "generic" (shooting from the model's saddle).
/// Hill charts are heteroclinic from the north pole to the south pole with
/// p = 0 on the equator; the linear saddle chart is the unstable plane with
/// p = 0 on the unit circle.
ChartPtr make_chart(const std::shared_ptr<const FieldModel>& field, const std::string& chart = "analytic");
std::string default_chart_name(const std::string& model);

using ClosedForm = std::function<double(double p, double alpha, double t)>;

/// Registered analytic Melnikov function for a model/perturbation pair on
/// the named chart, if any.
std::optional<ClosedForm> closed_form(const std::string& model, const ModelParams& model_params,
                                      const std::string& perturbation, const ModelParams& perturbation_params,
                                      MelnikovKind kind, const std::string& chart = "");

}  // namespace melnikov3d
