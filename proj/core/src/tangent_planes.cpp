#include "xlayer/tangent_planes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xlayer/error.hpp"

namespace xlayer {

namespace {

bool same_plane(const TangentPlane& a, const TangentPlane& b) {
  auto close = [](double x, double y) {
    return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
  };
  return close(a.d_power, b.d_power) && close(a.d_bandwidth, b.d_bandwidth) &&
         close(a.intercept, b.intercept);
}

}  // namespace

TangentPlaneModel::TangentPlaneModel(LinkChannel link, std::size_t budget)
    : link_(link), budget_(budget) {
  if (budget_ == 0) throw InvalidArgument("TangentPlaneModel: plane budget must be positive");
}

bool TangentPlaneModel::refine(double power, double bandwidth) {
  if (power < 0.0 || bandwidth < 0.0) {
    throw InvalidArgument("TangentPlaneModel::refine: anchor must be non-negative");
  }
  ++clock_;
  TangentPlane plane;
  plane.anchor_power = power;
  plane.anchor_bandwidth = bandwidth;
  plane.last_tight = clock_;
  if (bandwidth > 0.0) {
    const CapacityGradient g = capacity_gradient(bandwidth, power, link_);
    plane.d_power = g.d_power;
    plane.d_bandwidth = g.d_bandwidth;
    plane.intercept = capacity(bandwidth, power, link_) - g.d_power * power - g.d_bandwidth * bandwidth;
    // Euler's identity makes the exact intercept zero; keep only rounding of
    // the right sign so tangency holds and the model stays an over-estimate.
    plane.intercept = std::max(plane.intercept, 0.0);
  } else {
    const CapacityGradient g = capacity_gradient_at_zero_snr(link_);
    plane.d_power = g.d_power;
    plane.d_bandwidth = 0.0;
    plane.intercept = 0.0;
  }

  for (TangentPlane& existing : planes_) {
    if (same_plane(existing, plane)) {
      existing.last_tight = clock_;
      return false;
    }
  }
  planes_.push_back(plane);
  if (planes_.size() > budget_) {
    auto victim = std::min_element(planes_.begin(), planes_.end() - 1,
                                   [](const TangentPlane& a, const TangentPlane& b) {
                                     return a.last_tight < b.last_tight;
                                   });
    planes_.erase(victim);
  }
  return true;
}

double TangentPlaneModel::value(double power, double bandwidth) const {
  double best = std::numeric_limits<double>::infinity();
  for (const TangentPlane& plane : planes_) best = std::min(best, plane.value(power, bandwidth));
  return best;
}

void TangentPlaneModel::mark_tight(double power, double bandwidth, double rel_tol) {
  if (planes_.empty()) return;
  ++clock_;
  const double v = value(power, bandwidth);
  const double slack = rel_tol * std::max(1.0, std::abs(v));
  for (TangentPlane& plane : planes_) {
    if (plane.value(power, bandwidth) <= v + slack) plane.last_tight = clock_;
  }
}

void TangentPlaneModel::reset(LinkChannel link) {
  link_ = link;
  clear();
}

void TangentPlaneModel::clear() { planes_.clear(); }

}  // namespace xlayer
