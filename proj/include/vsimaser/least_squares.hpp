#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace vsimaser {

// Fills residuals (length m) and, when the pointer is non-null, the m x n Jacobian.
// Returning false marks the parameter vector as infeasible; the step is rejected.
using ResidualFunction =
    std::function<bool(const Eigen::VectorXd& params, Eigen::VectorXd& residuals,
                       Eigen::MatrixXd* jacobian)>;

struct LeastSquaresOptions {
  // Converged once every |step_i| < tolerance * max(|p_i|, scale_i).
  double relative_step_tolerance = 1e-8;
  int max_iterations = 500;
  // Per-parameter magnitude floor for the step test; defaults to 1.
  std::vector<double> parameter_scale;
};

struct LeastSquaresResult {
  Eigen::VectorXd params;
  // Half the sum of squared residuals.
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  Eigen::MatrixXd normal_matrix;
  int n_residuals = 0;
  // Cost after each accepted step, starting with the initial cost.
  std::vector<double> cost_history;
};

/// Levenberg-Marquardt with Marquardt diagonal scaling and Nielsen's damping update.
/// Throws DegenerateFitError when the Jacobian has a null column or the normal
/// matrix is numerically singular at the solution. Non-convergence is reported
/// through `converged`; callers decide whether that is an error.
LeastSquaresResult damped_least_squares(const ResidualFunction& residual,
                                        const Eigen::VectorXd& initial,
                                        const LeastSquaresOptions& options = {});

/// Central-difference Jacobian of `residual`, used to check analytic Jacobians.
Eigen::MatrixXd finite_difference_jacobian(const ResidualFunction& residual,
                                           const Eigen::VectorXd& params, double relative_step = 1e-6);

/// Diagonal of s^2 (J^T J)^-1 with s^2 = 2 cost / (m - n); NaN when m <= n.
std::vector<double> covariance_diagonal(const LeastSquaresResult& result);

}  // namespace vsimaser
