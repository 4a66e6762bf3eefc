#pragma once

#include <Eigen/Dense>

namespace kktscope {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  int iterations = 0;
};

struct NnlsOptions {
  int max_iterations = 0;  // 0 picks 3 * columns + 10
  double min_improvement = 1e-12;
};

/// Lawson-Hanson active-set solver for min ||A x - b|| subject to x >= 0.
///
/// Coefficients that leave the passive set are exactly zero in the result.
NnlsResult solve_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                      const NnlsOptions& options = {});

}  // namespace kktscope
