#ifndef XLAYER_QP_HPP_
#define XLAYER_QP_HPP_

#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace xlayer {

using SparseMatrix = Eigen::SparseMatrix<double>;

//   minimize    0.5 x' P x + c' x
//   subject to  A x  = b
//               G x <= h
//               x   >= lower     (entries may be -inf)
// P must be symmetric positive semidefinite and stored in full.
struct QpProblem {
  SparseMatrix quadratic;
  Eigen::VectorXd linear;
  SparseMatrix eq_matrix;
  Eigen::VectorXd eq_rhs;
  SparseMatrix ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  Eigen::VectorXd lower;

  int num_variables() const { return static_cast<int>(linear.size()); }
  int num_equalities() const { return static_cast<int>(eq_rhs.size()); }
  int num_inequalities() const { return static_cast<int>(ineq_rhs.size()); }

  double objective(const Eigen::VectorXd& x) const;

  // Throws InvalidArgument on inconsistent dimensions or an asymmetric P.
  void validate() const;
};

struct QpOptions {
  double tol = 1e-9;
  int max_iterations = 100;
  // Static regularization of the quasi-definite KKT system.
  double regularization = 1e-11;
  int refinement_steps = 3;
};

enum class QpStatus { kOptimal, kInaccurate };

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd eq_dual;     // multipliers of A x = b
  Eigen::VectorXd ineq_dual;   // >= 0, multipliers of G x <= h
  Eigen::VectorXd lower_dual;  // >= 0, zero for free variables
  double objective = 0.0;
  int iterations = 0;
  QpStatus status = QpStatus::kOptimal;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
};

// Primal-dual interior-point method (Mehrotra predictor-corrector) on the
// sparse quasi-definite KKT system. Throws SolverError with kind kInfeasible,
// kUnbounded or kNotConverged when no acceptable point is found.
QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

struct KktResiduals {
  double equality = 0.0;       // |A x - b|_inf
  double inequality = 0.0;     // max(G x - h)_+, including bounds
  double stationarity = 0.0;   // |P x + c + A'y + G'z - l_dual|_inf
  double complementarity = 0.0;
  double dual_sign = 0.0;      // max(-z)_+
};

KktResiduals kkt_residuals(const QpProblem& problem, const QpSolution& solution);

struct Term {
  int var;
  double coeff;
};

// Incremental assembly of a QpProblem from triplets.
class QpBuilder {
 public:
  static constexpr double kFree = -std::numeric_limits<double>::infinity();

  int add_variable(double lower = 0.0);
  int add_variables(int count, double lower = 0.0);
  int num_variables() const { return static_cast<int>(lower_.size()); }

  // Adds value to P(i, j) and, for i != j, to P(j, i).
  void add_quadratic(int i, int j, double value);
  void add_linear(int i, double value);

  int add_equality(std::span<const Term> terms, double rhs);
  int add_equality(std::initializer_list<Term> terms, double rhs) {
    return add_equality(std::span<const Term>(terms.begin(), terms.size()), rhs);
  }
  int add_inequality(std::span<const Term> terms, double rhs);
  int add_inequality(std::initializer_list<Term> terms, double rhs) {
    return add_inequality(std::span<const Term>(terms.begin(), terms.size()), rhs);
  }
  int num_inequalities() const { return static_cast<int>(ineq_rhs_.size()); }

  QpProblem build() const;

 private:
  using Triplet = Eigen::Triplet<double>;
  std::vector<double> lower_;
  std::vector<double> linear_;
  std::vector<Triplet> quadratic_;
  std::vector<Triplet> eq_;
  std::vector<double> eq_rhs_;
  std::vector<Triplet> ineq_;
  std::vector<double> ineq_rhs_;
};

}  // namespace xlayer

#endif  // XLAYER_QP_HPP_
