#include "xlayer/projection.hpp"

#include <algorithm>
#include <functional>
#include <vector>

#include "xlayer/error.hpp"

namespace xlayer {

double capped_simplex_threshold(const Eigen::VectorXd& point, double cap) {
  if (cap < 0.0) throw InvalidArgument("project_capped_simplex: cap must be non-negative");
  double clamped_sum = 0.0;
  for (double v : point) clamped_sum += std::max(v, 0.0);
  if (clamped_sum <= cap) return 0.0;

  std::vector<double> sorted;
  sorted.reserve(static_cast<std::size_t>(point.size()));
  for (double v : point) {
    if (v > 0.0) sorted.push_back(v);
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    prefix += sorted[k];
    const double t = (prefix - cap) / static_cast<double>(k + 1);
    if (k + 1 == sorted.size() || sorted[k + 1] <= t) {
      threshold = t;
      break;
    }
  }
  return std::max(threshold, 0.0);
}

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& point, double cap) {
  const double t = capped_simplex_threshold(point, cap);
  return (point.array() - t).cwiseMax(0.0).matrix();
}

double capped_simplex_distance2(const Eigen::VectorXd& point, double cap) {
  return (project_capped_simplex(point, cap) - point).squaredNorm();
}

}  // namespace xlayer
