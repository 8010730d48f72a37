#ifndef XLAYER_TANGENT_PLANES_HPP_
#define XLAYER_TANGENT_PLANES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xlayer/capacity.hpp"

namespace xlayer {

// One supporting plane c(p, w) <= d_power * p + d_bandwidth * w + intercept.
struct TangentPlane {
  double d_power = 0.0;
  double d_bandwidth = 0.0;
  double intercept = 0.0;
  double anchor_power = 0.0;
  double anchor_bandwidth = 0.0;
  std::uint64_t last_tight = 0;

  double value(double power, double bandwidth) const {
    return d_power * power + d_bandwidth * bandwidth + intercept;
  }
};

// Piecewise-linear outer model of a link's concave capacity function: the
// pointwise minimum of a bounded set of tangent planes. When the budget is
// exceeded the plane that has gone longest without being tight at an iterate
// is evicted; the most recently added plane is never evicted.
class TangentPlaneModel {
 public:
  static constexpr std::size_t kDefaultBudget = 10;

  explicit TangentPlaneModel(LinkChannel link, std::size_t budget = kDefaultBudget);

  // Adds the plane tangent at (power, bandwidth). Returns false when an
  // identical plane is already present (the capacity is positively
  // homogeneous, so every anchor on the same ray yields the same plane).
  bool refine(double power, double bandwidth);

  // Minimum over planes; +inf for an empty model.
  double value(double power, double bandwidth) const;

  // Records which planes are within rel_tol of the model value at the given
  // point; used by the eviction policy.
  void mark_tight(double power, double bandwidth, double rel_tol = 1e-9);

  // Replaces the channel (e.g. after a noise change) and drops all planes.
  void reset(LinkChannel link);
  void clear();

  std::span<const TangentPlane> planes() const { return planes_; }
  std::size_t size() const { return planes_.size(); }
  bool empty() const { return planes_.empty(); }
  std::size_t budget() const { return budget_; }
  const LinkChannel& link() const { return link_; }

 private:
  LinkChannel link_;
  std::size_t budget_;
  std::uint64_t clock_ = 0;
  std::vector<TangentPlane> planes_;
};

}  // namespace xlayer

#endif  // XLAYER_TANGENT_PLANES_HPP_
