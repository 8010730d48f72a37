#ifndef XLAYER_PROJECTION_HPP_
#define XLAYER_PROJECTION_HPP_

#include <Eigen/Dense>

namespace xlayer {

// argmin |v - point|^2  s.t.  v >= 0, sum(v) <= cap.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& point, double cap);

// Optimal squared distance of the projection above; convex and piecewise
// quadratic in cap.
double capped_simplex_distance2(const Eigen::VectorXd& point, double cap);

// Water level t with sum(max(point - t, 0)) == cap, or 0 when the clamped
// point already fits. This is the multiplier of the sum constraint (halved).
double capped_simplex_threshold(const Eigen::VectorXd& point, double cap);

}  // namespace xlayer

#endif  // XLAYER_PROJECTION_HPP_
