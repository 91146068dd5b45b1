#include "morphquad/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "morphquad/errors.hpp"
#include "morphquad/units.hpp"

namespace morphquad {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double quantity(const json& v, Dimension dim, const std::string& path) {
  try {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_quantity(v.get<std::string>(), dim);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path, "expected a number or a quantity string");
}

Vec3 vector3(const json& v, Dimension dim, const std::string& path) {
  if (v.is_array()) {
    if (v.size() != 3) throw ConfigError(path, "expected 3 components");
    return {quantity(v[0], dim, index_path(path, 0)), quantity(v[1], dim, index_path(path, 1)),
            quantity(v[2], dim, index_path(path, 2))};
  }
  return Vec3::Constant(quantity(v, dim, path));
}

// Walks one JSON object, remembering which keys were consumed so that typos
// surface as errors instead of silently falling back to defaults.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  const json& require(const std::string& key) {
    if (!has(key)) throw ConfigError(join(path_, key), "required field is missing");
    return raw(key);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void read(const std::string& key, double& out, Dimension dim) {
    if (has(key)) out = quantity(raw(key), dim, path(key));
  }

  void read(const std::string& key, Vec3& out, Dimension dim) {
    if (has(key)) out = vector3(raw(key), dim, path(key));
  }

  void read(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (v.is_boolean()) {
      out = v.get<bool>();
    } else if (v == "on") {
      out = true;
    } else if (v == "off") {
      out = false;
    } else {
      throw ConfigError(path(key), "expected on/off or a boolean");
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError(path(item.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Trajectory read_trajectory(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const json& type_node = r.require("type");
  if (!type_node.is_string()) throw ConfigError(r.path("type"), "expected a string");
  const std::string type = type_node.get<std::string>();
  Trajectory out;
  if (type == "hover") {
    HoverTrajectory h;
    r.read("position", h.position, Dimension::Length);
    r.read("yaw", h.yaw, Dimension::Angle);
    out = h;
  } else if (type == "circle") {
    CircleTrajectory c;
    r.read("radius", c.radius, Dimension::Length);
    r.read("period", c.period, Dimension::Time);
    if (r.has("center")) {
      const json& cj = r.raw("center");
      if (!cj.is_array() || cj.size() != 2) throw ConfigError(r.path("center"), "expected [x, y]");
      c.center.x() = quantity(cj[0], Dimension::Length, index_path(r.path("center"), 0));
      c.center.y() = quantity(cj[1], Dimension::Length, index_path(r.path("center"), 1));
    }
    r.read("altitude", c.center.z(), Dimension::Length);
    if (!(c.radius > 0.0)) throw ConfigError(r.path("radius"), "must be positive");
    if (!(c.period > 0.0)) throw ConfigError(r.path("period"), "must be positive");
    out = c;
  } else if (type == "waypoints") {
    WaypointTrajectory w;
    const json& list = r.require("waypoints");
    if (!list.is_array() || list.empty()) throw ConfigError(r.path("waypoints"), "expected a non-empty list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      ObjectReader wr(list[i], index_path(r.path("waypoints"), i));
      Waypoint wp;
      wp.time = quantity(wr.require("time"), Dimension::Time, wr.path("time"));
      wp.position = vector3(wr.require("position"), Dimension::Length, wr.path("position"));
      wr.read("yaw", wp.yaw, Dimension::Angle);
      wr.finish();
      if (!w.waypoints.empty() && !(wp.time > w.waypoints.back().time)) {
        throw ConfigError(wr.path("time"), "waypoint times must be strictly increasing");
      }
      w.waypoints.push_back(wp);
    }
    out = w;
  } else {
    throw ConfigError(r.path("type"), "unknown trajectory type '" + type + "'");
  }
  r.finish();
  return out;
}

void read_geometry(const json& j, const std::string& path, MorphGeometry& g) {
  ObjectReader r(j, path);
  r.read("l_b", g.l_b, Dimension::Length);
  r.read("l_a", g.l_a, Dimension::Length);
  r.read("l_m", g.l_m, Dimension::Length);
  r.read("h_b", g.h_b, Dimension::Length);
  r.read("h_r", g.h_r, Dimension::Length);
  r.read("r_r", g.r_r, Dimension::Length);
  r.read("h_a", g.h_a, Dimension::Length);
  r.read("w_a", g.w_a, Dimension::Length);
  r.read("h_m", g.h_m, Dimension::Length);
  r.read("w_m", g.w_m, Dimension::Length);
  r.read("c_r", g.c_r, Dimension::Length);
  r.read("rotor_offset", g.rotor_offset, Dimension::Length);
  r.read("prop_extent", g.prop_extent, Dimension::Length);
  r.read("alpha_max", g.alpha_max, Dimension::Angle);
  r.read("k_servo", g.k_servo, Dimension::Dimensionless);
  if (r.has("fold")) {
    const json& f = r.raw("fold");
    if (f == "down") {
      g.fold_down = true;
    } else if (f == "up") {
      g.fold_down = false;
    } else {
      throw ConfigError(r.path("fold"), "expected 'down' or 'up'");
    }
  }
  r.finish();
  try {
    g.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

void read_vehicle(const json& j, const std::string& path, VehicleConfig& v) {
  ObjectReader r(j, path);
  if (r.has("geometry")) read_geometry(r.raw("geometry"), r.path("geometry"), v.geometry);
  if (r.has("masses")) {
    ObjectReader m(r.raw("masses"), r.path("masses"));
    m.read("m_b", v.masses.m_b, Dimension::Mass);
    m.read("m_a", v.masses.m_a, Dimension::Mass);
    m.read("m_m", v.masses.m_m, Dimension::Mass);
    m.read("m_r", v.masses.m_r, Dimension::Mass);
    if (m.has("total")) {
      const double total = quantity(m.raw("total"), Dimension::Mass, m.path("total"));
      if (std::abs(total - v.masses.total()) > 1e-9) {
        throw ConfigError(m.path("total"), "module masses sum to " + std::to_string(v.masses.total()) + " kg");
      }
    }
    m.finish();
    try {
      v.masses.validate();
    } catch (const DomainError& e) {
      throw ConfigError(r.path("masses"), e.what());
    }
  }
  if (r.has("rotor")) {
    ObjectReader rr(r.raw("rotor"), r.path("rotor"));
    rr.read("k_f", v.rotor.k_f, Dimension::Dimensionless);
    rr.read("k_m", v.rotor.k_m, Dimension::Dimensionless);
    rr.read("w_max", v.rotor.w_max, Dimension::AngularRate);
    rr.finish();
  }
  if (r.has("payload")) {
    ObjectReader p(r.raw("payload"), r.path("payload"));
    p.read("offset", v.payload_shape.offset, Dimension::Length);
    p.read("dims", v.payload_shape.dims, Dimension::Length);
    p.finish();
  }
  r.finish();
}

void read_gains(const json& j, const std::string& path, ControllerGains& g, double& mass_ratio) {
  ObjectReader r(j, path);
  r.read("Lambda1", g.Lambda1, Dimension::Dimensionless);
  r.read("Lambda2", g.Lambda2, Dimension::Dimensionless);
  r.read("K_p1", g.K_p1, Dimension::Dimensionless);
  r.read("K_p2", g.K_p2, Dimension::Dimensionless);
  r.read("K_z1", g.K_z1, Dimension::Dimensionless);
  r.read("K_z2", g.K_z2, Dimension::Dimensionless);
  r.read("sigma1", g.sigma1, Dimension::Dimensionless);
  r.read("sigma2", g.sigma2, Dimension::Dimensionless);
  r.read("Gamma1", g.Gamma1, Dimension::Dimensionless);
  r.read("Gamma2", g.Gamma2, Dimension::Dimensionless);
  r.read("m_floor", g.m_floor, Dimension::Mass);
  r.read("b_floor", g.b_floor, Dimension::Dimensionless);
  r.read("setpoint_filter_tau", g.setpoint_filter_tau, Dimension::Time);
  r.read("min_lift_ratio", g.min_lift_ratio, Dimension::Dimensionless);
  r.read("initial_mass_ratio", mass_ratio, Dimension::Dimensionless);
  r.finish();
  try {
    g.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  if (!(mass_ratio > 0.0)) throw ConfigError(r.path("initial_mass_ratio"), "must be positive");
}

void read_disturbance(const json& j, const std::string& path, DisturbanceParams& d) {
  ObjectReader r(j, path);
  r.read("force_bias", d.force_bias, Dimension::Force);
  r.read("torque_bias", d.torque_bias, Dimension::Torque);
  r.read("force_noise", d.force_noise, Dimension::Force);
  r.read("torque_noise", d.torque_noise, Dimension::Torque);
  r.read("noise_tau", d.noise_tau, Dimension::Time);
  r.read("proximity_gain", d.proximity_gain, Dimension::Dimensionless);
  r.read("f_max", d.f_max, Dimension::Force);
  r.read("tau_max", d.tau_max, Dimension::Torque);
  r.finish();
  try {
    d.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (name.empty()) throw ConfigError("name", "must not be empty");
  if (!(duration > 0.0)) throw ConfigError("duration", "must be positive");
  if (!(simulation.plant_dt > 0.0 && simulation.plant_dt <= 0.01)) {
    throw ConfigError("simulation.plant_dt", "must lie in (0, 10 ms]");
  }
  const double ratio = simulation.control_dt / simulation.plant_dt;
  if (!(simulation.control_dt > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0) {
    throw ConfigError("simulation.control_dt", "must be a positive integer multiple of plant_dt");
  }
  if (!(simulation.servo_rate > 0.0)) throw ConfigError("simulation.servo_rate", "must be positive");
  if (!(simulation.settle_tolerance > 0.0)) throw ConfigError("simulation.settle_tolerance", "must be positive");

  const double servo_max = vehicle.geometry.alpha_max / vehicle.geometry.k_servo;
  double last = 0.0;
  for (std::size_t i = 0; i < morph_schedule.size(); ++i) {
    const std::string p = index_path("morph_schedule", i);
    const MorphCommand& c = morph_schedule[i];
    if (c.time < last || (i > 0 && c.time == last)) throw ConfigError(p + ".time", "times must be strictly ascending");
    if (c.time < 0.0 || c.time > duration) throw ConfigError(p + ".time", "outside [0, duration]");
    if (c.servo < 0.0 || c.servo > servo_max + 1e-9) {
      throw ConfigError(p + ".servo", "servo angle outside [0, " + std::to_string(rad2deg(servo_max)) + "] deg");
    }
    last = c.time;
  }
  last = 0.0;
  for (std::size_t i = 0; i < payload_events.size(); ++i) {
    const std::string p = index_path("payload_events", i);
    const PayloadEvent& e = payload_events[i];
    if (e.time < last || (i > 0 && e.time == last)) throw ConfigError(p + ".time", "times must be strictly ascending");
    if (e.time < 0.0 || e.time > duration) throw ConfigError(p + ".time", "outside [0, duration]");
    if (e.action == PayloadAction::Attach && !(e.mass > 0.0)) throw ConfigError(p + ".mass", "must be positive");
    last = e.time;
  }
  if (const auto* w = std::get_if<WaypointTrajectory>(&trajectory)) {
    if (w->waypoints.front().time < 0.0 || w->waypoints.back().time > duration) {
      throw ConfigError("trajectory.waypoints", "waypoint times outside [0, duration]");
    }
  }
  if (gap && !(gap->width > 0.0)) throw ConfigError("gap.width", "must be positive");
  if (!(initial_mass_ratio > 0.0)) throw ConfigError("controller.initial_mass_ratio", "must be positive");
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports "at line L, column C" in what().
    throw ConfigError("", source + ": " + e.what());
  }

  ScenarioConfig cfg;
  ObjectReader r(doc, "");
  const json& name = r.require("name");
  if (!name.is_string()) throw ConfigError("name", "expected a string");
  cfg.name = name.get<std::string>();
  cfg.duration = quantity(r.require("duration"), Dimension::Time, "duration");
  if (r.has("seed")) {
    const json& s = r.raw("seed");
    if (!s.is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  r.read("observer", cfg.observer);
  if (r.has("trajectory")) cfg.trajectory = read_trajectory(r.raw("trajectory"), "trajectory");

  if (r.has("morph_schedule")) {
    const json& list = r.raw("morph_schedule");
    if (!list.is_array()) throw ConfigError("morph_schedule", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      ObjectReader mr(list[i], index_path("morph_schedule", i));
      MorphCommand c;
      c.time = quantity(mr.require("time"), Dimension::Time, mr.path("time"));
      c.servo = quantity(mr.require("servo"), Dimension::Angle, mr.path("servo"));
      mr.finish();
      cfg.morph_schedule.push_back(c);
    }
  }
  if (r.has("payload_events")) {
    const json& list = r.raw("payload_events");
    if (!list.is_array()) throw ConfigError("payload_events", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      ObjectReader pr(list[i], index_path("payload_events", i));
      PayloadEvent e;
      e.time = quantity(pr.require("time"), Dimension::Time, pr.path("time"));
      const json& action = pr.require("action");
      if (action == "attach") {
        e.action = PayloadAction::Attach;
        e.mass = quantity(pr.require("mass"), Dimension::Mass, pr.path("mass"));
      } else if (action == "release") {
        e.action = PayloadAction::Release;
        if (pr.has("mass")) pr.raw("mass");
      } else {
        throw ConfigError(pr.path("action"), "expected 'attach' or 'release'");
      }
      pr.finish();
      cfg.payload_events.push_back(e);
    }
  }
  if (r.has("disturbance")) read_disturbance(r.raw("disturbance"), "disturbance", cfg.disturbance);
  if (r.has("controller")) read_gains(r.raw("controller"), "controller", cfg.gains, cfg.initial_mass_ratio);
  if (r.has("observer_gains")) {
    ObjectReader o(r.raw("observer_gains"), "observer_gains");
    o.read("K_f", cfg.observer_gains.K_f, Dimension::Dimensionless);
    o.read("K_t", cfg.observer_gains.K_t, Dimension::Dimensionless);
    o.read("f_limit", cfg.observer_gains.f_limit, Dimension::Force);
    o.read("tau_limit", cfg.observer_gains.tau_limit, Dimension::Torque);
    o.finish();
    try {
      cfg.observer_gains.validate();
    } catch (const DomainError& e) {
      throw ConfigError("observer_gains", e.what());
    }
  }
  if (r.has("vehicle")) read_vehicle(r.raw("vehicle"), "vehicle", cfg.vehicle);
  if (r.has("simulation")) {
    ObjectReader s(r.raw("simulation"), "simulation");
    s.read("plant_dt", cfg.simulation.plant_dt, Dimension::Time);
    s.read("control_dt", cfg.simulation.control_dt, Dimension::Time);
    s.read("servo_rate", cfg.simulation.servo_rate, Dimension::AngularRate);
    s.read("settle_tolerance", cfg.simulation.settle_tolerance, Dimension::Length);
    s.finish();
  }
  if (r.has("gap")) {
    ObjectReader g(r.raw("gap"), "gap");
    GapSpec gap;
    g.read("x", gap.x, Dimension::Length);
    g.read("width", gap.width, Dimension::Length);
    g.read("margin", gap.margin, Dimension::Length);
    g.finish();
    cfg.gap = gap;
  }
  if (r.has("output")) {
    const json& o = r.raw("output");
    if (!o.is_string()) throw ConfigError("output", "expected a file name");
    cfg.output = o.get<std::string>();
  }
  r.finish();
  if (cfg.output.empty()) cfg.output = cfg.name + ".csv";
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("", "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace morphquad
