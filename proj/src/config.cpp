#include "adapttikh/config.hpp"

#include <stdexcept>

#include "json.hpp"

namespace adapttikh {

namespace {

using nlohmann::json;

// Applies `fields` to every present key of `obj` and rejects the rest.
class StrictObject {
public:
  StrictObject(const json& obj, std::string scope)
      : obj_(obj), scope_(std::move(scope)) {
    if (!obj.is_object())
      throw std::invalid_argument("config: '" + scope_ + "' must be an object");
    for (const auto& [key, value] : obj.items()) seen_[key] = false;
  }

  template <typename T>
  void get(const char* key, T& out) {
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    seen_[key] = true;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: bad value for key '" + scope_ + key + "'");
    }
  }

  const json* child(const char* key) {
    auto it = obj_.find(key);
    if (it == obj_.end()) return nullptr;
    seen_[key] = true;
    return &*it;
  }

  void finish() const {
    for (const auto& [key, used] : seen_)
      if (!used)
        throw std::invalid_argument("config: unknown key '" + scope_ + key + "'");
  }

private:
  const json& obj_;
  std::string scope_;
  std::map<std::string, bool> seen_;
};

}  // namespace

void RunConfig::validate() const {
  if (n_boundary < 3)
    throw std::invalid_argument("config: mesh.n_boundary must be >= 3");
  if (!(radius > 0.0))
    throw std::invalid_argument("config: mesh.radius must be > 0");
  if (mesh_levels < 0)
    throw std::invalid_argument("config: mesh.levels must be >= 0");
  benchmark.validate();
  adaptive.validate();
  constants.validate();
}

std::string RunConfig::to_json() const {
  json j;
  j["mesh"] = {{"n_boundary", n_boundary},
               {"radius", radius},
               {"levels", mesh_levels}};
  j["benchmark"] = {{"rho", benchmark.rho},
                    {"alpha", benchmark.alpha},
                    {"delta", benchmark.delta},
                    {"seed", benchmark.seed}};
  j["adaptive"] = {{"tau_lower", adaptive.tau_lower},
                   {"tau_upper", adaptive.tau_upper},
                   {"c1", adaptive.c1},
                   {"c2", adaptive.c2},
                   {"alpha0", adaptive.alpha0},
                   {"theta", adaptive.theta},
                   {"theta_mark", adaptive.theta_mark},
                   {"max_outer", adaptive.max_outer},
                   {"max_inner", adaptive.max_inner},
                   {"delta", adaptive.delta}};
  j["estimator_constants"] = {{"c_interp", constants.c_interp},
                              {"c_stab", constants.c_stab},
                              {"c_dirac", constants.c_dirac},
                              {"c_inf", constants.c_inf},
                              {"sigma", constants.sigma},
                              {"gamma", constants.gamma}};
  j["out"] = out_path;
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: parse error: ") + e.what());
  }
  RunConfig cfg;
  StrictObject root(j, "");
  if (const json* mesh = root.child("mesh")) {
    StrictObject o(*mesh, "mesh.");
    o.get("n_boundary", cfg.n_boundary);
    o.get("radius", cfg.radius);
    o.get("levels", cfg.mesh_levels);
    o.finish();
  }
  if (const json* bench = root.child("benchmark")) {
    StrictObject o(*bench, "benchmark.");
    o.get("rho", cfg.benchmark.rho);
    o.get("alpha", cfg.benchmark.alpha);
    o.get("delta", cfg.benchmark.delta);
    o.get("seed", cfg.benchmark.seed);
    o.finish();
  }
  if (const json* adapt = root.child("adaptive")) {
    StrictObject o(*adapt, "adaptive.");
    o.get("tau_lower", cfg.adaptive.tau_lower);
    o.get("tau_upper", cfg.adaptive.tau_upper);
    o.get("c1", cfg.adaptive.c1);
    o.get("c2", cfg.adaptive.c2);
    o.get("alpha0", cfg.adaptive.alpha0);
    o.get("theta", cfg.adaptive.theta);
    o.get("theta_mark", cfg.adaptive.theta_mark);
    o.get("max_outer", cfg.adaptive.max_outer);
    o.get("max_inner", cfg.adaptive.max_inner);
    o.get("delta", cfg.adaptive.delta);
    o.finish();
  }
  if (const json* est = root.child("estimator_constants")) {
    StrictObject o(*est, "estimator_constants.");
    o.get("c_interp", cfg.constants.c_interp);
    o.get("c_stab", cfg.constants.c_stab);
    o.get("c_dirac", cfg.constants.c_dirac);
    o.get("c_inf", cfg.constants.c_inf);
    o.get("sigma", cfg.constants.sigma);
    o.get("gamma", cfg.constants.gamma);
    o.finish();
  }
  root.get("out", cfg.out_path);
  root.finish();
  cfg.validate();
  return cfg;
}

}  // namespace adapttikh
