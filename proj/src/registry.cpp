#include "melnikov3d/registry.hpp"

#include <cmath>

#include "melnikov3d/errors.hpp"
#include "melnikov3d/hill_closed_form.hpp"

namespace melnikov3d {

const std::vector<RegistryEntry>& model_registry() {
  static const std::vector<RegistryEntry> models = {
      {"hill-classical", "Hill's spherical vortex; heteroclinic unit sphere between the poles", {}},
      {"hill-swirl",
       "Hill's spherical vortex with swirl",
       {{"R0", 0.1, "Rossby number; trajectories on the sphere turn at rate -1/(2 R0) in phi"}}},
      {"linear-saddle",
       "x' = [[l, -omega, 0], [omega, l, 0], [0, 0, s]] x; unstable plane z = 0",
       {{"l", 1.0, "in-plane growth rate (> 0)"},
        {"omega", 0.0, "in-plane rotation rate"},
        {"s", -1.0, "normal rate (< 0)"}}},
  };
  return models;
}

const std::vector<RegistryEntry>& perturbation_registry() {
  static const std::vector<RegistryEntry> perts = {
      {"none", "g = 0", {}},
      {"gr", "g = r^2 sin(theta) sin(3 phi) cos(4 t) r_hat", {}},
      {"gtheta", "g = r^2 sin(theta) sin(3 phi) cos(4 t) theta_hat (tangent to spheres)", {}},
      {"gr-positive", "g = r^2 sin(theta) (2 + sin(3 phi)) r_hat (steady, outward)", {}},
      {"uniform-z", "g = cos(kappa t) z_hat", {{"kappa", 1.0, "forcing frequency"}}},
  };
  return perts;
}

namespace {

const RegistryEntry& find_entry(const std::vector<RegistryEntry>& reg, const std::string& name, const char* what) {
  for (const auto& e : reg)
    if (e.name == name) return e;
  std::string known;
  for (const auto& e : reg) known += (known.empty() ? "" : ", ") + e.name;
  throw ConfigError(std::string("unknown ") + what + " '" + name + "' (known: " + known + ")");
}

ModelParams resolve(const RegistryEntry& e, const ModelParams& given) {
  ModelParams out;
  for (const auto& p : e.params) out[p.name] = p.default_value;
  for (const auto& [k, v] : given) {
    if (!out.count(k)) throw ConfigError("'" + e.name + "' has no parameter '" + k + "'");
    if (!std::isfinite(v)) throw ConfigError("parameter '" + k + "' must be finite");
    out[k] = v;
  }
  return out;
}

}  // namespace

ModelParams resolve_model_params(const std::string& model, const ModelParams& given) {
  ModelParams p = resolve(find_entry(model_registry(), model, "model"), given);
  if (model == "hill-swirl" && !(p.at("R0") > 0.0)) throw ConfigError("hill-swirl needs R0 > 0");
  if (model == "linear-saddle" && !(p.at("l") > 0.0 && p.at("s") < 0.0))
    throw ConfigError("linear-saddle needs l > 0 and s < 0");
  return p;
}

ModelParams resolve_perturbation_params(const std::string& perturbation, const ModelParams& given) {
  return resolve(find_entry(perturbation_registry(), perturbation, "perturbation"), given);
}

std::shared_ptr<const FieldModel> make_field(const std::string& model, const ModelParams& params) {
  const ModelParams p = resolve_model_params(model, params);
  if (model == "hill-classical") return std::make_shared<HillClassicalField>();
  if (model == "hill-swirl") return std::make_shared<HillSwirlField>(p.at("R0"));
  return std::make_shared<LinearSaddleField>(p.at("l"), p.at("omega"), p.at("s"));
}

std::shared_ptr<const PerturbationModel> make_perturbation(const std::string& name, const ModelParams& params) {
  const ModelParams p = resolve_perturbation_params(name, params);
  if (name == "none") return std::make_shared<ZeroPerturbation>();
  if (name == "gr") return std::make_shared<RadialGrPerturbation>();
  if (name == "gtheta") return std::make_shared<ThetaGrPerturbation>();
  if (name == "gr-positive") return std::make_shared<RadialPositivePerturbation>();
  return std::make_shared<UniformZPerturbation>(p.at("kappa"));
}

std::string default_chart_name(const std::string& model) {
  return model == "linear-saddle" ? "generic" : "analytic";
}

ChartPtr make_chart(const std::shared_ptr<const FieldModel>& field, const std::string& chart) {
  if (!field) throw ConfigError("make_chart: null field");
  const std::string model = field->name();
  if (chart != "analytic" && chart != "generic") throw ConfigError("unknown chart '" + chart + "'");

  if (model == "hill-classical" || model == "hill-swirl") {
    if (chart == "analytic") {
      const auto params = field->parameters();
      const double rate = model == "hill-swirl" ? 0.5 / params.at("R0") : 0.0;
      return std::make_shared<HillSphereChart>(field, rate);
    }
    GenericChartOptions opt;
    opt.kind = ChartKind::Heteroclinic;
    opt.section = [](const Vec3& x) { return x.z(); };
    opt.alpha_reference = Vec3(1.0, 0.0, 0.0);
    opt.orientation_reference = Vec3(0.0, 0.0, 1.0);
    opt.far_saddle = classify_saddle(*field, Vec3(0.0, 0.0, -1.0));
    return generic_chart_from_saddle(field, classify_saddle(*field, Vec3(0.0, 0.0, 1.0)), opt);
  }

  if (model == "linear-saddle") {
    if (chart == "analytic") throw ConfigError("linear-saddle has no analytic chart; use 'generic'");
    GenericChartOptions opt;
    opt.kind = ChartKind::Unstable;
    opt.section = [](const Vec3& x) { return x.x() * x.x() + x.y() * x.y() - 1.0; };
    opt.alpha_reference = Vec3(1.0, 0.0, 0.0);
    opt.orientation_reference = Vec3(0.0, 0.0, 1.0);
    return generic_chart_from_saddle(field, classify_saddle(*field, Vec3::Zero()), opt);
  }
  throw ConfigError("no chart recipe for model '" + model + "'");
}

std::optional<ClosedForm> closed_form(const std::string& model, const ModelParams& model_params,
                                      const std::string& perturbation, const ModelParams& perturbation_params,
                                      MelnikovKind kind, const std::string& chart) {
  const ModelParams mp = resolve_model_params(model, model_params);
  const ModelParams gp = resolve_perturbation_params(perturbation, perturbation_params);
  const std::string chart_name = chart.empty() ? default_chart_name(model) : chart;
  // The shooting chart fixes α by the direction of x at the equator, which
  // matches the analytic convention only without swirl.
  if (model == "hill-swirl" && chart_name != "analytic") return std::nullopt;

  if (perturbation == "none") return ClosedForm([](double, double, double) { return 0.0; });

  if (perturbation == "gr" && kind == MelnikovKind::Heteroclinic) {
    if (model == "hill-classical") return ClosedForm(hill_classical_melnikov);
    if (model == "hill-swirl") {
      const SwirlCoefficients c = hill_swirl_coefficients(mp.at("R0"));
      return ClosedForm([c](double p, double a, double t) { return hill_swirl_melnikov(c, p, a, t); });
    }
  }

  // Tangential forcing never moves the sphere at leading order.
  if (perturbation == "gtheta" && (model == "hill-classical" || model == "hill-swirl"))
    return ClosedForm([](double, double, double) { return 0.0; });

  if (model == "linear-saddle" && perturbation == "uniform-z" && kind == MelnikovKind::Unstable) {
    // Unit-circle section: x̄ = e^{lp}(cos, sin, 0), f ∧ x̄_α = 2πl e^{2lp} ẑ.
    const double l = mp.at("l"), a = -mp.at("s"), k = gp.at("kappa");
    return ClosedForm([l, a, k](double p, double, double t) {
      return 2.0 * kPi * l * std::exp(2.0 * l * p) * (a * std::cos(k * t) + k * std::sin(k * t)) / (a * a + k * k);
    });
  }
  return std::nullopt;
}

}  // namespace melnikov3d
