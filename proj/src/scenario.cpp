#include "locsched/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace locsched {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (n.IsDefined() && n.Mark().line >= 0) os << ":" << n.Mark().line + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  YAML::Node child(const YAML::Node& map, const std::string& key, bool required) const {
    if (!map.IsMap()) fail(map, "expected a mapping");
    YAML::Node c = map[key];
    if (required && !c) fail(map, "missing required key '" + key + "'");
    return c;
  }

  void check_keys(const YAML::Node& map, std::initializer_list<const char*> allowed) const {
    if (!map.IsMap()) fail(map, "expected a mapping");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, "unknown key '" + key + "'");
    }
  }

  double number(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a number");
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) fail(n, what + " must be finite");
      return v;
    } catch (const YAML::Exception&) {
      fail(n, what + " must be a number");
    }
  }

  double positive(const YAML::Node& n, const std::string& what) const {
    const double v = number(n, what);
    if (!(v > 0)) fail(n, what + " must be positive");
    return v;
  }

  double nonneg(const YAML::Node& n, const std::string& what) const {
    const double v = number(n, what);
    if (v < 0) fail(n, what + " must be nonnegative");
    return v;
  }

  double opt_number(const YAML::Node& map, const std::string& key, double def) const {
    YAML::Node c = child(map, key, false);
    return c ? number(c, key) : def;
  }

  double opt_positive(const YAML::Node& map, const std::string& key, double def) const {
    YAML::Node c = child(map, key, false);
    return c ? positive(c, key) : def;
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& what, std::size_t expect = 0) const {
    if (!n.IsSequence()) fail(n, what + " must be a list of numbers");
    if (expect && n.size() != expect) fail(n, what + " must have " + std::to_string(expect) + " entries");
    std::vector<double> out;
    for (const auto& e : n) out.push_back(number(e, what));
    return out;
  }

  std::string string(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a string");
    return n.as<std::string>();
  }

  Shape shape(const YAML::Node& n) const {
    if (!n.IsMap() || n.size() != 1) fail(n, "shape must be {rect: [x0, y0, x1, y1]} or {circle: [cx, cy, r]}");
    if (n["rect"]) {
      auto v = numbers(n["rect"], "rect", 4);
      if (v[2] < v[0] || v[3] < v[1]) fail(n["rect"], "rect corners must be ordered [x0, y0, x1, y1]");
      return Rect{v[0], v[1], v[2], v[3]};
    }
    if (n["circle"]) {
      auto v = numbers(n["circle"], "circle", 3);
      if (v[2] < 0) fail(n["circle"], "circle radius must be nonnegative");
      return Circle{v[0], v[1], v[2]};
    }
    fail(n, "shape must be rect or circle");
  }

 private:
  std::string source_;
};

Mat sigma_cov(double sigma, int n) { return Mat::Identity(n, n) * sigma * sigma; }

}  // namespace

Vec Scenario::waypoint(int i) const {
  if (i == 0) return initial_state.head(2);
  return waypoints.at(static_cast<std::size_t>(i - 1));
}

Scenario load_scenario_yaml(const std::string& text, const std::string& source_name) {
  Reader r(source_name);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source_name + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError(source_name + ": document must be a mapping");
  r.check_keys(root, {"format_version", "name", "dynamics", "sensors", "workspace", "footprint", "initial_state",
                      "waypoints", "power", "boot", "controller", "objectives"});

  Scenario s;
  const int version = static_cast<int>(r.number(r.child(root, "format_version", true), "format_version"));
  if (version != 1) r.fail(root["format_version"], "unsupported format_version " + std::to_string(version));
  s.name = root["name"] ? r.string(root["name"], "name") : std::string("unnamed");

  // dynamics
  const YAML::Node dyn = r.child(root, "dynamics", true);
  r.check_keys(dyn, {"kind", "dt", "process_noise_sigma", "drift_matrix"});
  const std::string kind = r.string(r.child(dyn, "kind", true), "kind");
  if (kind == "unicycle") {
    s.plant.kind = PlantKind::Unicycle2ndOrder;
    if (dyn["drift_matrix"]) r.fail(dyn["drift_matrix"], "drift_matrix applies only to linear_drift");
  } else if (kind == "linear_drift") {
    s.plant.kind = PlantKind::LinearDrift;
    Mat a(2, 2);
    a << -0.3, 0.1, 0.1, -0.3;
    if (YAML::Node m = dyn["drift_matrix"]) {
      if (!m.IsSequence() || m.size() == 0 || m.size() > kMaxStateDim) r.fail(m, "drift_matrix must be a square list of rows");
      const int n = static_cast<int>(m.size());
      a.resize(n, n);
      for (int row = 0; row < n; ++row) {
        auto v = r.numbers(m[row], "drift_matrix row", static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c) a(row, c) = v[c];
      }
      if (n < 2) r.fail(m, "drift_matrix must be at least 2x2 (planar position)");
    }
    s.plant.drift = a;
  } else {
    r.fail(dyn["kind"], "kind must be 'unicycle' or 'linear_drift'");
  }
  s.plant.dt = r.opt_positive(dyn, "dt", 0.05);
  const int n = s.plant.dim();
  const double sigma_w = r.nonneg(r.child(dyn, "process_noise_sigma", true), "process_noise_sigma");
  s.plant.process_noise = sigma_cov(sigma_w, n);

  // sensors
  const YAML::Node sens = r.child(root, "sensors", true);
  r.check_keys(sens, {"odometry", "localization"});
  for (const char* key : {"odometry", "localization"}) {
    const YAML::Node m = r.child(sens, key, true);
    r.check_keys(m, {"sigma", "rate"});
    const double sigma = r.nonneg(r.child(m, "sigma", true), "sigma");
    const double rate = r.positive(r.child(m, "rate", true), "rate");
    if (std::string(key) == "odometry") {
      s.sensors.odometry_cov = sigma_cov(sigma, n);
      s.sensors.odometry_rate = rate;
    } else {
      s.sensors.localization_cov = sigma_cov(sigma, n);
      s.sensors.localization_rate = rate;
    }
  }

  // workspace
  const YAML::Node ws = r.child(root, "workspace", true);
  r.check_keys(ws, {"bounds", "obstacles", "target"});
  auto b = r.numbers(r.child(ws, "bounds", true), "bounds", 4);
  s.workspace.bounds = Rect{b[0], b[1], b[2], b[3]};
  if (YAML::Node obs = ws["obstacles"]) {
    if (!obs.IsSequence()) r.fail(obs, "obstacles must be a list");
    for (const auto& o : obs) s.workspace.obstacles.push_back(r.shape(o));
  }
  s.workspace.target = r.shape(r.child(ws, "target", true));

  // footprint
  if (YAML::Node fp = root["footprint"]) {
    if (fp.IsScalar() && fp.as<std::string>() == "point") {
      s.footprint.kind = RobotFootprint::Kind::Point;
    } else if (fp.IsMap() && fp["disc"]) {
      r.check_keys(fp, {"disc"});
      s.footprint.kind = RobotFootprint::Kind::Disc;
      s.footprint.radius = r.nonneg(fp["disc"], "disc radius");
    } else if (fp.IsMap() && fp["rectangle"]) {
      r.check_keys(fp, {"rectangle"});
      s.footprint.kind = RobotFootprint::Kind::Rectangle;
      auto wh = r.numbers(fp["rectangle"], "rectangle", 2);
      if (wh[0] < 0 || wh[1] < 0) r.fail(fp["rectangle"], "rectangle extents must be nonnegative");
      s.footprint.width = wh[0];
      s.footprint.height = wh[1];
    } else {
      r.fail(fp, "footprint must be 'point', {disc: r} or {rectangle: [w, h]}");
    }
  }

  // initial state and waypoints
  const YAML::Node init = r.child(root, "initial_state", true);
  auto x0 = r.numbers(init, "initial_state");
  if (static_cast<int>(x0.size()) != n) {
    r.fail(init, "initial_state must have " + std::to_string(n) + " components for this dynamics kind");
  }
  s.initial_state = Vec(n);
  for (int k = 0; k < n; ++k) s.initial_state(k) = x0[k];
  const YAML::Node wps = r.child(root, "waypoints", true);
  if (!wps.IsSequence() || wps.size() == 0) r.fail(wps, "waypoints must be a nonempty list");
  for (const auto& w : wps) {
    auto p = r.numbers(w, "waypoint");
    if (static_cast<int>(p.size()) != (s.plant.kind == PlantKind::Unicycle2ndOrder ? 2 : n)) {
      r.fail(w, "waypoint has the wrong number of components");
    }
    Vec v(static_cast<int>(p.size()));
    for (std::size_t k = 0; k < p.size(); ++k) v(static_cast<int>(k)) = p[k];
    s.waypoints.push_back(v);
  }

  // resources
  if (YAML::Node p = root["power"]) {
    r.check_keys(p, {"base", "localization"});
    if (p["base"]) s.power.base = r.nonneg(p["base"], "base");
    if (p["localization"]) s.power.on = r.nonneg(p["localization"], "localization power");
  }
  if (YAML::Node bt = root["boot"]) {
    r.check_keys(bt, {"time", "energy"});
    if (bt["time"]) s.boot.time = r.positive(bt["time"], "boot time");
    if (bt["energy"]) s.boot.energy = r.nonneg(bt["energy"], "boot energy");
  }

  // controller
  if (YAML::Node c = root["controller"]) {
    r.check_keys(c, {"gains", "k", "v_min", "epsilon_mean", "epsilon_var", "reach_radius", "t_max", "saturation"});
    ControllerParams& cp = s.controller;
    if (YAML::Node g = c["gains"]) {
      auto k = r.numbers(g, "gains", 4);
      cp.k1 = k[0], cp.k2 = k[1], cp.k3 = k[2], cp.k4 = k[3];
    }
    cp.k = r.opt_positive(c, "k", cp.k);
    cp.v_min = r.opt_positive(c, "v_min", cp.v_min);
    cp.eps_mean = r.opt_positive(c, "epsilon_mean", cp.eps_mean);
    cp.eps_var = r.opt_positive(c, "epsilon_var", cp.eps_var);
    cp.reach_radius = r.opt_positive(c, "reach_radius", cp.eps_mean);
    cp.t_max = r.opt_positive(c, "t_max", cp.t_max);
    if (YAML::Node sat = c["saturation"]) {
      r.check_keys(sat, {"speed", "turn_rate", "accel", "control_norm"});
      cp.saturation.speed = r.opt_positive(sat, "speed", cp.saturation.speed);
      cp.saturation.turn_rate = r.opt_positive(sat, "turn_rate", cp.saturation.turn_rate);
      cp.saturation.accel = r.opt_positive(sat, "accel", cp.saturation.accel);
      cp.saturation.control_norm = r.opt_positive(sat, "control_norm", cp.saturation.control_norm);
    }
  }

  if (YAML::Node obj = root["objectives"]) {
    if (!obj.IsSequence()) r.fail(obj, "objectives must be a list");
    s.objectives.clear();
    for (const auto& o : obj) {
      const std::string name = r.string(o, "objective");
      if (name != "ptarg" && name != "pcoll" && name != "energy" && name != "duration") {
        r.fail(o, "unknown objective '" + name + "' (expected ptarg, pcoll, energy, duration)");
      }
      s.objectives.push_back(name);
    }
    if (s.objectives.size() < 2) r.fail(obj, "at least two objectives are required");
  }

  try {
    validate_scenario(s);
  } catch (const InvalidInput& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario_yaml(ss.str(), path);
}

void validate_scenario(const Scenario& s) {
  validate_workspace(s.workspace);
  if (s.waypoints.empty()) throw InvalidInput("at least one waypoint is required");
  if (!(s.plant.dt > 0)) throw InvalidInput("dt must be positive");
  if (s.plant.dim() < 2 || s.plant.dim() > kMaxStateDim) throw InvalidInput("state dimension must be between 2 and 4");
  if (s.initial_state.size() != s.plant.dim()) throw InvalidInput("initial state dimension mismatch");
  if (in_collision(s.initial_state, s.footprint, s.workspace)) throw InvalidInput("initial state is in collision");
  for (std::size_t k = 0; k < s.waypoints.size(); ++k) {
    const Vec& w = s.waypoints[k];
    if (in_collision_xy(w(0), w(1), 0.0, RobotFootprint{}, s.workspace)) {
      throw InvalidInput("waypoint " + std::to_string(k + 1) + " lies inside an obstacle or outside the bounds");
    }
  }
}

}  // namespace locsched
