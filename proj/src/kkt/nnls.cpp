#include "kktscope/nnls.hpp"

#include <limits>
#include <vector>

#include "kktscope/errors.hpp"

namespace kktscope {
namespace {

Eigen::VectorXd solve_passive(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const std::vector<bool>& passive) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (passive[j]) cols.push_back(j);
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(a.cols());
  if (cols.empty()) return full;
  Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(k) = a.col(cols[k]);
  const Eigen::VectorXd s = sub.colPivHouseholderQr().solve(b);
  for (std::size_t k = 0; k < cols.size(); ++k) full(cols[k]) = s(k);
  return full;
}

}  // namespace

NnlsResult solve_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                      const NnlsOptions& options) {
  if (a.rows() != b.size()) {
    throw Error(ErrorKind::kDimension, "nnls: matrix rows do not match right-hand side");
  }
  const Eigen::Index n = a.cols();
  const int max_iterations =
      options.max_iterations > 0 ? options.max_iterations : static_cast<int>(3 * n + 10);
  const double dual_tol =
      10.0 * std::numeric_limits<double>::epsilon() * (1.0 + a.norm()) * (1.0 + b.norm());

  NnlsResult result;
  result.x = Eigen::VectorXd::Zero(n);
  result.residual_norm = b.norm();
  std::vector<bool> passive(static_cast<std::size_t>(n), false);

  for (int iter = 0; iter < max_iterations; ++iter) {
    const Eigen::VectorXd w = a.transpose() * (b - a * result.x);
    Eigen::Index best = -1;
    double best_w = dual_tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[j] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[best] = true;

    Eigen::VectorXd x = result.x;
    Eigen::VectorXd s = solve_passive(a, b, passive);
    // Step back toward feasibility until the passive solution is strictly positive.
    for (Eigen::Index guard = 0; guard <= n; ++guard) {
      bool feasible = true;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && s(j) <= 0.0) {
          feasible = false;
          const double denom = x(j) - s(j);
          const double ratio = denom > 0.0 ? x(j) / denom : 0.0;
          alpha = std::min(alpha, ratio);
        }
      }
      if (feasible) break;
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && x(j) <= std::numeric_limits<double>::epsilon() * (1.0 + x.norm())) {
          passive[j] = false;
          x(j) = 0.0;
        }
      }
      s = solve_passive(a, b, passive);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[j] || s(j) <= 0.0) {
        s(j) = 0.0;
        passive[j] = false;
      }
    }

    const double residual = (b - a * s).norm();
    ++result.iterations;
    if (result.residual_norm - residual < options.min_improvement) {
      if (residual < result.residual_norm) {
        result.x = s;
        result.residual_norm = residual;
      }
      break;
    }
    result.x = s;
    result.residual_norm = residual;
  }
  return result;
}

}  // namespace kktscope
