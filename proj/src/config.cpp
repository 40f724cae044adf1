#include "hopper/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hopper {

namespace {

using nlohmann::json;

double get_number(const json& obj, const std::string& section, const std::string& key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    raise(Errc::InvalidConfig, section + "." + key + " must be a number");
  }
  return v.get<double>();
}

void reject_unknown(const json& obj, const std::string& section,
                    std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      raise(Errc::InvalidConfig, "unknown key " + section + "." + it.key());
    }
  }
}

}  // namespace

Config default_config() { return Config{}; }

Config parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    raise(Errc::InvalidConfig, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) {
    raise(Errc::InvalidConfig, "top level must be an object");
  }
  reject_unknown(root, "config", {"params", "raibert", "sim", "references", "planner"});

  Config cfg = default_config();

  if (root.contains("params")) {
    const json& p = root.at("params");
    reject_unknown(p, "params", {"m", "m_b", "m_l", "k", "l0", "I_b", "g", "alpha"});
    cfg.params.m = get_number(p, "params", "m", cfg.params.m);
    cfg.params.m_b = get_number(p, "params", "m_b", cfg.params.m_b);
    cfg.params.m_l = get_number(p, "params", "m_l", cfg.params.m_l);
    cfg.params.k = get_number(p, "params", "k", cfg.params.k);
    cfg.params.l0 = get_number(p, "params", "l0", cfg.params.l0);
    cfg.params.I_b = get_number(p, "params", "I_b", cfg.params.I_b);
    cfg.params.g = get_number(p, "params", "g", cfg.params.g);
    if (p.contains("alpha")) {
      const double alpha = get_number(p, "params", "alpha", 0.0);
      const double derived = cfg.params.m / cfg.params.I_b;
      if (std::abs(alpha - derived) > 1e-9 * std::max(1.0, std::abs(derived))) {
        raise(Errc::InvalidConfig,
              "params.alpha is derived as m / I_b = " + std::to_string(derived) +
                  " and may not be set inconsistently");
      }
    }
    try {
      cfg.params.validate();
    } catch (const Error& e) {
      raise(Errc::InvalidConfig, std::string("params: ") + e.what());
    }
  }

  if (root.contains("raibert")) {
    const json& r = root.at("raibert");
    reject_unknown(r, "raibert",
                   {"k_xdot", "G_gamma", "T_s", "k_p", "k_v", "k_p_body", "k_v_body",
                    "k_p_leg", "k_v_leg", "F_thrust"});
    cfg.gains.k_xdot = get_number(r, "raibert", "k_xdot", cfg.gains.k_xdot);
    cfg.gains.G_gamma = get_number(r, "raibert", "G_gamma", cfg.gains.G_gamma);
    cfg.gains.T_s = get_number(r, "raibert", "T_s", cfg.gains.T_s);
    cfg.gains.k_p = get_number(r, "raibert", "k_p", cfg.gains.k_p);
    cfg.gains.k_v = get_number(r, "raibert", "k_v", cfg.gains.k_v);
    cfg.gains.k_p_body = get_number(r, "raibert", "k_p_body", cfg.gains.k_p_body);
    cfg.gains.k_v_body = get_number(r, "raibert", "k_v_body", cfg.gains.k_v_body);
    cfg.gains.k_p_leg = get_number(r, "raibert", "k_p_leg", cfg.gains.k_p_leg);
    cfg.gains.k_v_leg = get_number(r, "raibert", "k_v_leg", cfg.gains.k_v_leg);
    cfg.gains.F_thrust = get_number(r, "raibert", "F_thrust", cfg.gains.F_thrust);
    try {
      cfg.gains.validate();
    } catch (const Error& e) {
      raise(Errc::InvalidConfig, std::string("raibert: ") + e.what());
    }
  }

  if (root.contains("sim")) {
    const json& s = root.at("sim");
    reject_unknown(s, "sim",
                   {"dt", "duration", "max_hops", "sigma_process", "sigma_measurement",
                    "seed", "controller"});
    cfg.sim.dt = get_number(s, "sim", "dt", cfg.sim.dt);
    cfg.sim.duration = get_number(s, "sim", "duration", cfg.sim.duration);
    cfg.sim.max_hops = static_cast<int>(get_number(s, "sim", "max_hops", cfg.sim.max_hops));
    cfg.sim.sigma_process = get_number(s, "sim", "sigma_process", cfg.sim.sigma_process);
    cfg.sim.sigma_measurement =
        get_number(s, "sim", "sigma_measurement", cfg.sim.sigma_measurement);
    cfg.sim.seed = static_cast<std::uint64_t>(
        get_number(s, "sim", "seed", static_cast<double>(cfg.sim.seed)));
    if (s.contains("controller")) {
      const auto& c = s.at("controller");
      if (!c.is_string()) raise(Errc::InvalidConfig, "sim.controller must be a string");
      const std::string name = c.get<std::string>();
      if (name == "raibert") {
        cfg.sim.controller = sim::Controller::Raibert;
      } else if (name == "bvp") {
        cfg.sim.controller = sim::Controller::JerkBvp;
      } else {
        raise(Errc::InvalidConfig, "sim.controller must be 'raibert' or 'bvp'");
      }
    }
    try {
      cfg.sim.validate();
    } catch (const Error& e) {
      raise(Errc::InvalidConfig, std::string("sim: ") + e.what());
    }
  }

  if (root.contains("references")) {
    const json& r = root.at("references");
    reject_unknown(r, "references", {"apex_height", "x_dot_d", "psi_d"});
    cfg.sim.refs.apex_height =
        get_number(r, "references", "apex_height", cfg.sim.refs.apex_height);
    cfg.sim.refs.x_dot_d = get_number(r, "references", "x_dot_d", cfg.sim.refs.x_dot_d);
    cfg.sim.refs.psi_d = get_number(r, "references", "psi_d", cfg.sim.refs.psi_d);
  }

  if (root.contains("planner")) {
    const json& pl = root.at("planner");
    reject_unknown(pl, "planner",
                   {"time_weight", "bc_tol", "defect_tol", "guess_nodes",
                    "strict_paper_angle"});
    cfg.planner.time_weight =
        get_number(pl, "planner", "time_weight", cfg.planner.time_weight);
    cfg.planner.bvp.bc_tol = get_number(pl, "planner", "bc_tol", cfg.planner.bvp.bc_tol);
    cfg.planner.bvp.defect_tol =
        get_number(pl, "planner", "defect_tol", cfg.planner.bvp.defect_tol);
    cfg.planner.guess_nodes =
        static_cast<int>(get_number(pl, "planner", "guess_nodes", cfg.planner.guess_nodes));
    if (pl.contains("strict_paper_angle")) {
      const auto& v = pl.at("strict_paper_angle");
      if (!v.is_boolean()) {
        raise(Errc::InvalidConfig, "planner.strict_paper_angle must be a boolean");
      }
      cfg.planner.strict_paper_angle = v.get<bool>();
    }
  }

  // Gains carry the shared references at run time.
  cfg.gains.psi_d = cfg.sim.refs.psi_d;
  cfg.gains.x_dot_d = cfg.sim.refs.x_dot_d;
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(Errc::InvalidConfig, "cannot read config file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const Config& c) {
  json root;
  root["params"] = {{"m", c.params.m},   {"m_b", c.params.m_b}, {"m_l", c.params.m_l},
                    {"k", c.params.k},   {"l0", c.params.l0},   {"I_b", c.params.I_b},
                    {"g", c.params.g}};
  root["raibert"] = {{"k_xdot", c.gains.k_xdot},     {"G_gamma", c.gains.G_gamma},
                     {"T_s", c.gains.T_s},
                     {"k_p", c.gains.k_p},           {"k_v", c.gains.k_v},
                     {"k_p_body", c.gains.k_p_body}, {"k_v_body", c.gains.k_v_body},
                     {"k_p_leg", c.gains.k_p_leg},   {"k_v_leg", c.gains.k_v_leg},
                     {"F_thrust", c.gains.F_thrust}};
  root["sim"] = {{"dt", c.sim.dt},
                 {"duration", c.sim.duration},
                 {"max_hops", c.sim.max_hops},
                 {"sigma_process", c.sim.sigma_process},
                 {"sigma_measurement", c.sim.sigma_measurement},
                 {"seed", c.sim.seed},
                 {"controller", sim::controller_name(c.sim.controller)}};
  root["references"] = {{"apex_height", c.sim.refs.apex_height},
                        {"x_dot_d", c.sim.refs.x_dot_d},
                        {"psi_d", c.sim.refs.psi_d}};
  root["planner"] = {{"time_weight", c.planner.time_weight},
                     {"bc_tol", c.planner.bvp.bc_tol},
                     {"defect_tol", c.planner.bvp.defect_tol},
                     {"guess_nodes", c.planner.guess_nodes},
                     {"strict_paper_angle", c.planner.strict_paper_angle}};
  return root.dump(2) + "\n";
}

}  // namespace hopper
