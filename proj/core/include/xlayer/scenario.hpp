#ifndef XLAYER_SCENARIO_HPP_
#define XLAYER_SCENARIO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace xlayer {

// Spectrum reuse factor: a finite integer > 2, or no reuse at all.
class ReuseFactor {
 public:
  static ReuseFactor none() { return ReuseFactor(0); }
  static ReuseFactor finite(int f);

  bool is_finite() const { return f_ != 0; }
  int value() const;  // throws for the no-reuse factor
  std::string to_string() const;

  friend bool operator==(ReuseFactor, ReuseFactor) = default;

 private:
  explicit ReuseFactor(int f) : f_(f) {}
  int f_;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Mid-run channel change applied by the device ADMM simulation. Each user
// node draws a factor uniformly from [min_factor, max_factor] (or takes it
// from `factors`, one per user in node order) and rescales the noise density or the
// gains of its outgoing links.
struct ChannelEvent {
  enum class Kind { kScaleNoise, kScaleGain };
  int iteration = 0;
  Kind kind = Kind::kScaleNoise;
  double min_factor = 0.5;
  double max_factor = 2.5;
  std::uint64_t seed = 0;
  std::vector<double> factors;
};

struct ReferenceSettings {
  double tol = 1e-6;
  int max_scp_iters = 200;
};

struct AdmmSettings {
  double rho = 1.0;
  int max_iters = 500;
  double eps_abs = 1e-4;
  double eps_rel = 1e-3;
};

struct DeviceSettings {
  AdmmSettings admm{0.5, 500, 1e-4, 1e-4};
  int partial_update_iters = 5;
  double skip_probability = 0.5;
  std::size_t plane_budget = 10;
  double bandwidth_penalty_scale = 0.1;
};

struct ScenarioConfig {
  std::string name = "scenario";

  // Geometry. num_nodes counts the destination (node 0, at the origin).
  int num_nodes = 12;
  double sector_radius = 280.0;     // m
  double sector_angle = 6.283185307179586;  // rad
  double group_width = 40.0;        // d, m; the first group spans [0, 2d]
  double theta = 0.17453292519943295;  // rad
  double d_th_factor = 1.5;
  std::uint64_t rng_seed = 1;

  // Channel and resources.
  double K = 1.0;
  double l0 = 1.0;
  double pathloss_exponent = 4.0;
  double N0 = 1e-11;    // W/MHz
  double W_max = 10.0;  // MHz
  double P_max = 0.5;   // W
  double alpha = 0.1;
  ReuseFactor reuse = ReuseFactor::finite(3);
  double log_base = 2.0;
  double epsilon_power = 1e-6;

  ReferenceSettings reference;
  AdmmSettings layered;
  DeviceSettings device;
  std::vector<ChannelEvent> events;
  double flow_floor = 0.01;          // Mbps, for link pruning
  double quantization_grid = 0.0;    // MHz, 0 disables

  double d_th() const { return d_th_factor * group_width; }
  int num_groups() const;  // M = ceil((R - 2d)/d) + 1, at least 1

  // Throws InvalidArgument naming the offending field.
  void validate() const;
};

// JSON mapping. Unknown keys are rejected. Angles may be given in radians
// ("sector_angle", "theta") or degrees ("sector_angle_deg", "theta_deg");
// P_max in watts ("P_max") or dBm ("P_max_dBm"); "reuse" is an integer or
// the string "inf".
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

// Parses text; errors carry "line L, column C" for syntax problems and the
// line of the offending key for semantic ones.
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<string>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace xlayer

#endif  // XLAYER_SCENARIO_HPP_
