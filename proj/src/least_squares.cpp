#include "vsimaser/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vsimaser/errors.hpp"

namespace vsimaser {

namespace {

constexpr double kInitialDampingFactor = 1e-3;
// Beyond this the proposed steps are below rounding of the parameters.
constexpr double kMaxDamping = 1e16;
constexpr double kSingularRatio = 1e-15;

void check_rank(const Eigen::MatrixXd& normal) {
  const Eigen::Index n = normal.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(normal(i, i) > 0.0)) {
      throw DegenerateFitError("parameter " + std::to_string(i) + " does not affect the residuals");
    }
  }
  // Scale-free conditioning test on the correlation form of J^T J.
  const Eigen::VectorXd inv_sqrt = normal.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd corr = inv_sqrt.asDiagonal() * normal * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > kSingularRatio * hi)) throw DegenerateFitError("normal equations are singular");
}

}  // namespace

LeastSquaresResult damped_least_squares(const ResidualFunction& residual,
                                        const Eigen::VectorXd& initial,
                                        const LeastSquaresOptions& options) {
  const Eigen::Index n = initial.size();
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  if (!options.parameter_scale.empty()) {
    if (static_cast<Eigen::Index>(options.parameter_scale.size()) != n) {
      throw ValidationError("parameter_scale length does not match the parameter count");
    }
    scale = Eigen::Map<const Eigen::VectorXd>(options.parameter_scale.data(), n);
  }

  LeastSquaresResult out;
  out.params = initial;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  if (!residual(out.params, r, &jac)) {
    throw ValidationError("initial parameters are outside the model domain");
  }
  out.n_residuals = static_cast<int>(r.size());
  out.cost = 0.5 * r.squaredNorm();
  out.cost_history.push_back(out.cost);

  Eigen::MatrixXd normal = jac.transpose() * jac;
  Eigen::VectorXd gradient = jac.transpose() * r;
  check_rank(normal);

  double damping = kInitialDampingFactor * normal.diagonal().maxCoeff();
  double growth = 2.0;
  Eigen::VectorXd trial_r;
  Eigen::MatrixXd trial_jac;

  while (out.iterations < options.max_iterations) {
    ++out.iterations;
    if (gradient.cwiseAbs().maxCoeff() == 0.0 || out.cost == 0.0) {
      out.converged = true;
      break;
    }
    Eigen::MatrixXd damped = normal;
    damped.diagonal() += damping * normal.diagonal();
    const Eigen::VectorXd step = damped.ldlt().solve(-gradient);

    bool small_step = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ref = std::max(std::abs(out.params(i)), scale(i));
      if (!(std::abs(step(i)) < options.relative_step_tolerance * ref)) {
        small_step = false;
        break;
      }
    }

    const Eigen::VectorXd trial = out.params + step;
    const bool feasible = step.allFinite() && residual(trial, trial_r, &trial_jac);
    const double trial_cost = feasible ? 0.5 * trial_r.squaredNorm()
                                       : std::numeric_limits<double>::infinity();
    const double predicted = -step.dot(gradient) - 0.5 * step.dot(normal * step);
    const double rho = predicted > 0.0 ? (out.cost - trial_cost) / predicted : -1.0;

    const bool accepted = feasible && trial_cost <= out.cost && rho > 0.0;
    if (accepted) {
      out.params = trial;
      out.cost = trial_cost;
      out.cost_history.push_back(out.cost);
      normal = trial_jac.transpose() * trial_jac;
      gradient = trial_jac.transpose() * trial_r;
      damping *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      growth = 2.0;
    } else {
      damping *= growth;
      growth *= 2.0;
    }
    if ((accepted && small_step) || damping > kMaxDamping * normal.diagonal().maxCoeff()) {
      out.converged = true;
      break;
    }
  }

  check_rank(normal);
  out.normal_matrix = std::move(normal);
  return out;
}

Eigen::MatrixXd finite_difference_jacobian(const ResidualFunction& residual,
                                           const Eigen::VectorXd& params, double relative_step) {
  Eigen::VectorXd r0;
  residual(params, r0, nullptr);
  Eigen::MatrixXd jac(r0.size(), params.size());
  Eigen::VectorXd plus, minus;
  for (Eigen::Index j = 0; j < params.size(); ++j) {
    const double h = relative_step * std::max(1.0, std::abs(params(j)));
    Eigen::VectorXd p = params;
    p(j) += h;
    residual(p, plus, nullptr);
    p(j) = params(j) - h;
    residual(p, minus, nullptr);
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

std::vector<double> covariance_diagonal(const LeastSquaresResult& result) {
  const auto n = result.params.size();
  const auto dof = result.n_residuals - static_cast<int>(n);
  std::vector<double> out(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
  if (dof <= 0) return out;
  const double s2 = 2.0 * result.cost / dof;
  const Eigen::MatrixXd inv = result.normal_matrix.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = s2 * inv(i, i);
  return out;
}

}  // namespace vsimaser
