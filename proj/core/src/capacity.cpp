#include "xlayer/capacity.hpp"

#include <cmath>
#include <string>

#include "xlayer/error.hpp"

namespace xlayer {

const char* to_string(SolverFailure failure) {
  switch (failure) {
    case SolverFailure::kInfeasible:
      return "infeasible";
    case SolverFailure::kUnbounded:
      return "unbounded";
    case SolverFailure::kNotConverged:
      return "not converged";
    case SolverFailure::kNumerical:
      return "numerical failure";
  }
  return "unknown";
}

namespace {

void check_link(const LinkChannel& link) {
  if (!(link.gain > 0.0) || !(link.noise > 0.0) || !(link.log_base > 1.0)) {
    throw InvalidArgument("capacity: gain and noise must be positive and log base > 1");
  }
}

// log(1 + s) - s / (1 + s), accurate for small s.
double bandwidth_slope_natural(double s) {
  if (s < 1e-3) {
    return s * s * (0.5 - s * (2.0 / 3.0 - s * 0.75));
  }
  return std::log1p(s) - s / (1.0 + s);
}

}  // namespace

double snr(double bandwidth, double power, const LinkChannel& link) {
  return power * link.gain / (bandwidth * link.noise);
}

double capacity(double bandwidth, double power, const LinkChannel& link) {
  check_link(link);
  if (bandwidth < 0.0 || power < 0.0) {
    throw InvalidArgument("capacity: bandwidth and power must be non-negative (w=" +
                          std::to_string(bandwidth) + ", p=" + std::to_string(power) + ")");
  }
  if (bandwidth == 0.0) return 0.0;
  return bandwidth * std::log1p(snr(bandwidth, power, link)) / std::log(link.log_base);
}

double capacity(double bandwidth, double power, double gain, double noise, double log_base) {
  return capacity(bandwidth, power, LinkChannel{gain, noise, log_base});
}

CapacityGradient capacity_gradient(double bandwidth, double power, const LinkChannel& link) {
  check_link(link);
  if (!(bandwidth > 0.0) || power < 0.0) {
    throw InvalidArgument("capacity_gradient: requires w > 0 and p >= 0");
  }
  const double s = snr(bandwidth, power, link);
  const double ln_base = std::log(link.log_base);
  return {link.gain / (link.noise * ln_base) / (1.0 + s), bandwidth_slope_natural(s) / ln_base};
}

CapacityGradient capacity_gradient(double bandwidth, double power, double gain, double noise,
                                   double log_base) {
  return capacity_gradient(bandwidth, power, LinkChannel{gain, noise, log_base});
}

CapacityGradient capacity_gradient_at_zero_snr(const LinkChannel& link) {
  check_link(link);
  return {link.gain / (link.noise * std::log(link.log_base)), 0.0};
}

}  // namespace xlayer
