#include "projdyn/scenario_loader.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "projdyn/catalog.hpp"
#include "projdyn/errors.hpp"

namespace projdyn {
namespace {

using nlohmann::json;

std::vector<int> int_list(const json& node, const char* key) {
  std::vector<int> out;
  if (!node.contains(key)) return out;
  if (!node[key].is_array()) {
    throw InvalidInput(std::string("\"") + key + "\" must be an array");
  }
  for (const json& v : node[key]) {
    if (!v.is_number_integer()) {
      throw InvalidInput(std::string("\"") + key + "\" entries must be integers");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace

MuPolicy parse_mu_policy(std::string_view text) {
  if (text == "auto" || text == "geometric") return MuPolicy::geometric_mean();
  if (text == "midpoint") return MuPolicy::midpoint();
  double value = 0.0;
  const std::string s(text);
  std::istringstream in(s);
  in >> value;
  if (!in || !in.eof() || !(value > 0.0)) {
    throw InvalidInput("mu must be 'auto', 'geometric', 'midpoint' or a "
                       "positive number, got '" + s + "'");
  }
  return MuPolicy::fixed(value);
}

Scenario parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("system")) {
    throw InvalidInput("scenario needs a \"system\" entry");
  }

  Scenario sc;
  const json& sys_node = doc["system"];
  if (sys_node.is_string()) {
    sc = default_scenario(sys_node.get<std::string>());
  } else {
    auto system = std::make_shared<const MechanicalSystem>(
        detail::system_from_json(sys_node));
    sc.system = system;
    sc.initial = system->default_state;
    sc.initial_active = system->initial_active;
  }
  const MechanicalSystem& system = *sc.system;
  const Eigen::Index n = system.n;

  if (doc.contains("horizon")) sc.horizon = detail::get_number(doc, "horizon");
  if (doc.contains("dt")) sc.dt = detail::get_number(doc, "dt");
  if (doc.contains("mu")) {
    const json& mu = doc["mu"];
    if (mu.is_number()) {
      if (!(mu.get<double>() > 0.0)) throw InvalidInput("mu must be positive");
      sc.mu_policy = MuPolicy::fixed(mu.get<double>());
    } else if (mu.is_string()) {
      sc.mu_policy = parse_mu_policy(mu.get<std::string>());
    } else {
      throw InvalidInput("\"mu\" must be a number or a policy name");
    }
  }
  if (doc.contains("initial")) {
    const json& init = doc["initial"];
    sc.initial.q = detail::get_vector(init, "q", n);
    sc.initial.qdot = init.contains("qdot") ? detail::get_vector(init, "qdot", n)
                                            : Eigen::VectorXd::Zero(n);
    sc.initial.t = init.value("t", 0.0);
  }
  if (doc.contains("active")) {
    const json& act = doc["active"];
    if (!act.is_array() || static_cast<Eigen::Index>(act.size()) != system.m) {
      throw InvalidInput("\"active\" must list one boolean per constraint row");
    }
    sc.initial_active.assign(act.size(), false);
    for (std::size_t i = 0; i < act.size(); ++i) {
      sc.initial_active[i] = act[i].get<bool>();
    }
  }
  if (doc.contains("events")) {
    sc.events.clear();
    for (const json& ev : doc["events"]) {
      TopologyEvent e;
      e.time = detail::get_number(ev, "time");
      e.activate = int_list(ev, "activate");
      e.deactivate = int_list(ev, "deactivate");
      sc.events.push_back(std::move(e));
    }
  }
  if (doc.contains("force")) {
    const Eigen::VectorXd f = detail::get_vector(doc, "force", n);
    sc.open_loop = [f](double, const Eigen::VectorXd&, const Eigen::VectorXd&) {
      return f;
    };
  }
  if (doc.contains("controller")) {
    const json& ctl = doc["controller"];
    const std::string type = ctl.value("type", std::string("regulate"));
    if (type == "regulate") {
      RegulationConfig cfg;
      cfg.gains = RegulationGains::isotropic(n, ctl.value("kp", 10.0),
                                             ctl.value("kd", 10.0),
                                             ctl.value("sigma", 1.5));
      if (ctl.contains("xi")) cfg.gains.xi = detail::get_vector(ctl, "xi", n);
      if (ctl.contains("target")) {
        cfg.target = detail::get_vector(ctl, "target", n);
      } else if (system.default_target) {
        cfg.target = *system.default_target;
      } else {
        throw InvalidInput("regulation controller needs a \"target\"");
      }
      sc.controller = std::move(cfg);
    } else if (type != "none") {
      throw InvalidInput("unknown controller type '" + type + "'");
    }
  }
  if (doc.contains("options")) {
    const json& opt = doc["options"];
    sc.options.rank_tol = opt.value("rank_tol", sc.options.rank_tol);
    sc.options.drift_tol = opt.value("drift_tol", sc.options.drift_tol);
    sc.options.retraction_interval =
        opt.value("retraction_interval", sc.options.retraction_interval);
  }
  validate_scenario(sc);
  return sc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace projdyn
