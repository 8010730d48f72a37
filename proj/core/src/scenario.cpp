#include "xlayer/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "xlayer/error.hpp"

namespace xlayer {

using nlohmann::json;

ReuseFactor ReuseFactor::finite(int f) {
  if (f <= 2) throw InvalidArgument("reuse factor must be > 2 (got " + std::to_string(f) + ")");
  return ReuseFactor(f);
}

int ReuseFactor::value() const {
  if (!is_finite()) throw InvalidArgument("reuse factor is infinite");
  return f_;
}

std::string ReuseFactor::to_string() const { return is_finite() ? std::to_string(f_) : "inf"; }

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1e3); }

int ScenarioConfig::num_groups() const {
  const double d = group_width;
  if (sector_radius <= 2.0 * d) return 1;
  return static_cast<int>(std::ceil((sector_radius - 2.0 * d) / d - 1e-12)) + 1;
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const std::string& field, const std::string& rule) {
    if (!ok) throw InvalidArgument("scenario field '" + field + "': " + rule);
  };
  require(num_nodes >= 1, "num_nodes", "must be >= 1");
  require(std::isfinite(sector_radius) && sector_radius > 0.0, "sector_radius", "must be positive");
  require(sector_angle > 0.0 && sector_angle <= 2.0 * std::numbers::pi + 1e-12, "sector_angle",
          "must lie in (0, 2 pi]");
  require(std::isfinite(group_width) && group_width > 0.0, "group_width", "must be positive");
  require(theta > 0.0 && theta <= std::numbers::pi, "theta", "must lie in (0, pi]");
  require(d_th_factor > 0.0, "d_th_factor", "must be positive");
  require(K > 0.0, "K", "must be positive");
  require(l0 > 0.0, "l0", "must be positive");
  require(pathloss_exponent > 0.0, "pathloss_exponent", "must be positive");
  require(N0 > 0.0, "N0", "must be positive");
  require(W_max > 0.0, "W_max", "must be positive");
  require(P_max >= 0.0, "P_max", "must be non-negative");
  require(alpha > 0.0, "alpha", "must be positive");
  require(log_base > 1.0, "log_base", "must be > 1");
  require(epsilon_power >= 0.0, "epsilon_power", "must be non-negative");
  require(reference.tol > 0.0, "reference.tol", "must be positive");
  require(reference.max_scp_iters >= 1, "reference.max_scp_iters", "must be >= 1");
  for (const auto* s : {&layered, &device.admm}) {
    require(s->rho > 0.0, "rho", "must be positive");
    require(s->max_iters >= 1, "max_iters", "must be >= 1");
    require(s->eps_abs > 0.0 && s->eps_rel >= 0.0, "eps_abs/eps_rel", "must be positive");
  }
  require(device.partial_update_iters >= 0, "device.partial_update_iters", "must be >= 0");
  require(device.skip_probability >= 0.0 && device.skip_probability < 1.0, "device.skip_probability",
          "must lie in [0, 1)");
  require(device.plane_budget >= 1, "device.plane_budget", "must be >= 1");
  require(device.bandwidth_penalty_scale > 0.0, "device.bandwidth_penalty_scale", "must be positive");
  require(flow_floor >= 0.0, "flow_floor", "must be non-negative");
  require(quantization_grid >= 0.0, "quantization_grid", "must be non-negative");
  int prev = -1;
  for (const ChannelEvent& e : events) {
    require(e.iteration > prev, "events", "iterations must be strictly increasing");
    require(e.min_factor > 0.0 && e.max_factor >= e.min_factor, "events", "need 0 < min_factor <= max_factor");
    for (double f : e.factors) require(f > 0.0, "events.factors", "must be positive");
    prev = e.iteration;
  }
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Reads keys from an object, remembering which were consumed so leftovers
// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidArgument("'" + display() + "' must be a JSON object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void read(const char* key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument("scenario field '" + qualified(key) + "': " + e.what());
    }
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw InvalidArgument("scenario field '" + qualified(key.c_str()) + "': unknown key");
    }
  }

  std::string qualified(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_admm(ObjectReader& parent, const json& root, const char* key, AdmmSettings& s,
               DeviceSettings* device) {
  if (!parent.has(key)) return;
  ObjectReader r(root.at(key), key);
  r.read("rho", s.rho);
  r.read("max_iters", s.max_iters);
  r.read("eps_abs", s.eps_abs);
  r.read("eps_rel", s.eps_rel);
  if (device != nullptr) {
    r.read("partial_update_iters", device->partial_update_iters);
    r.read("skip_probability", device->skip_probability);
    r.read("plane_budget", device->plane_budget);
    r.read("bandwidth_penalty_scale", device->bandwidth_penalty_scale);
  }
  r.finish();
}

ChannelEvent read_event(const json& j, std::size_t index) {
  ObjectReader r(j, "events[" + std::to_string(index) + "]");
  ChannelEvent e;
  r.read("iteration", e.iteration);
  std::string kind = "scale_noise";
  r.read("kind", kind);
  if (kind == "scale_noise") {
    e.kind = ChannelEvent::Kind::kScaleNoise;
  } else if (kind == "scale_gain") {
    e.kind = ChannelEvent::Kind::kScaleGain;
  } else {
    throw InvalidArgument("scenario field '" + r.qualified("kind") + "': expected scale_noise or scale_gain");
  }
  r.read("min_factor", e.min_factor);
  r.read("max_factor", e.max_factor);
  r.read("seed", e.seed);
  r.read("factors", e.factors);
  r.finish();
  return e;
}

int line_of(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c;
  ObjectReader r(j, "");
  r.read("name", c.name);
  r.read("num_nodes", c.num_nodes);
  r.read("sector_radius", c.sector_radius);
  r.read("sector_angle", c.sector_angle);
  if (r.has("sector_angle_deg")) {
    double deg = 0.0;
    r.read("sector_angle_deg", deg);
    c.sector_angle = deg * kDeg;
  }
  r.read("group_width", c.group_width);
  r.read("theta", c.theta);
  if (r.has("theta_deg")) {
    double deg = 0.0;
    r.read("theta_deg", deg);
    c.theta = deg * kDeg;
  }
  r.read("d_th_factor", c.d_th_factor);
  r.read("rng_seed", c.rng_seed);
  r.read("K", c.K);
  r.read("l0", c.l0);
  r.read("pathloss_exponent", c.pathloss_exponent);
  r.read("N0", c.N0);
  r.read("W_max", c.W_max);
  r.read("P_max", c.P_max);
  if (r.has("P_max_dBm")) {
    if (j.contains("P_max")) throw InvalidArgument("scenario: give only one of 'P_max' and 'P_max_dBm'");
    double dbm = 0.0;
    r.read("P_max_dBm", dbm);
    c.P_max = dbm_to_watts(dbm);
  }
  r.read("alpha", c.alpha);
  if (r.has("reuse")) {
    const json& f = j.at("reuse");
    if (f.is_string() && (f == "inf" || f == "none")) {
      c.reuse = ReuseFactor::none();
    } else if (f.is_number_integer()) {
      c.reuse = ReuseFactor::finite(f.get<int>());
    } else {
      throw InvalidArgument("scenario field 'reuse': expected an integer > 2 or \"inf\"");
    }
  }
  r.read("log_base", c.log_base);
  r.read("epsilon_power", c.epsilon_power);
  r.read("flow_floor", c.flow_floor);
  r.read("quantization_grid", c.quantization_grid);
  if (r.has("reference")) {
    ObjectReader rr(j.at("reference"), "reference");
    rr.read("tol", c.reference.tol);
    rr.read("max_scp_iters", c.reference.max_scp_iters);
    rr.finish();
  }
  read_admm(r, j, "layered", c.layered, nullptr);
  read_admm(r, j, "device", c.device.admm, &c.device);
  if (r.has("events")) {
    const json& ev = j.at("events");
    if (!ev.is_array()) throw InvalidArgument("scenario field 'events': expected an array");
    for (std::size_t i = 0; i < ev.size(); ++i) c.events.push_back(read_event(ev[i], i));
  }
  r.finish();
  c.validate();
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["num_nodes"] = c.num_nodes;
  j["sector_radius"] = c.sector_radius;
  j["sector_angle_deg"] = c.sector_angle / kDeg;
  j["group_width"] = c.group_width;
  j["theta_deg"] = c.theta / kDeg;
  j["d_th_factor"] = c.d_th_factor;
  j["rng_seed"] = c.rng_seed;
  j["K"] = c.K;
  j["l0"] = c.l0;
  j["pathloss_exponent"] = c.pathloss_exponent;
  j["N0"] = c.N0;
  j["W_max"] = c.W_max;
  j["P_max"] = c.P_max;
  j["alpha"] = c.alpha;
  if (c.reuse.is_finite()) {
    j["reuse"] = c.reuse.value();
  } else {
    j["reuse"] = "inf";
  }
  j["log_base"] = c.log_base;
  j["epsilon_power"] = c.epsilon_power;
  j["flow_floor"] = c.flow_floor;
  j["quantization_grid"] = c.quantization_grid;
  j["reference"] = {{"tol", c.reference.tol}, {"max_scp_iters", c.reference.max_scp_iters}};
  j["layered"] = {{"rho", c.layered.rho},
                  {"max_iters", c.layered.max_iters},
                  {"eps_abs", c.layered.eps_abs},
                  {"eps_rel", c.layered.eps_rel}};
  j["device"] = {{"rho", c.device.admm.rho},
                 {"max_iters", c.device.admm.max_iters},
                 {"eps_abs", c.device.admm.eps_abs},
                 {"eps_rel", c.device.admm.eps_rel},
                 {"partial_update_iters", c.device.partial_update_iters},
                 {"skip_probability", c.device.skip_probability},
                 {"plane_budget", c.device.plane_budget},
                 {"bandwidth_penalty_scale", c.device.bandwidth_penalty_scale}};
  json events = json::array();
  for (const ChannelEvent& e : c.events) {
    json je = {{"iteration", e.iteration},
               {"kind", e.kind == ChannelEvent::Kind::kScaleNoise ? "scale_noise" : "scale_gain"},
               {"min_factor", e.min_factor},
               {"max_factor", e.max_factor},
               {"seed", e.seed}};
    if (!e.factors.empty()) je["factors"] = e.factors;
    events.push_back(je);
  }
  j["events"] = events;
  return j;
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    const std::size_t line_start = text.rfind('\n', byte == 0 ? 0 : byte - 1);
    const std::size_t column = line_start == std::string::npos ? byte + 1 : byte - line_start;
    std::ostringstream msg;
    msg << origin << ":" << line_of(text, byte) << ":" << column << ": JSON syntax error: " << e.what();
    throw InvalidArgument(msg.str());
  }
  try {
    return scenario_from_json(j);
  } catch (const InvalidArgument& e) {
    // Point at the first line mentioning the offending key, when there is one.
    std::string what = e.what();
    const std::size_t q1 = what.find('\'');
    const std::size_t q2 = q1 == std::string::npos ? q1 : what.find('\'', q1 + 1);
    std::string prefix = origin;
    if (q2 != std::string::npos) {
      std::string key = what.substr(q1 + 1, q2 - q1 - 1);
      const std::size_t dot = key.rfind('.');
      if (dot != std::string::npos) key = key.substr(dot + 1);
      const std::size_t bracket = key.find('[');
      if (bracket != std::string::npos) key = key.substr(0, bracket);
      const std::size_t at = text.find("\"" + key + "\"");
      if (at != std::string::npos) prefix += ":" + std::to_string(line_of(text, at));
    }
    throw InvalidArgument(prefix + ": " + what);
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

}  // namespace xlayer
