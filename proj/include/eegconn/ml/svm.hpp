#pragma once

#include "eegconn/ml/hyperparams.hpp"

#include <Eigen/Dense>

#include <vector>

namespace eegconn::ml {

enum class Kernel { linear, polynomial, rbf };

struct SvmParams {
  Kernel kernel = Kernel::linear;
  double C = 1.0;
  double gamma = 0.001;
  int degree = 3;
  double coef0 = 0.0;
  double tolerance = 1e-3;
};

SvmParams svm_params_from(const Hyperparameters& p);

/// K(a_i, b_j) for sample rows of a and b.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const SvmParams& params);

struct DualSolution {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  long iterations = 0;
  bool converged = false;
};

/// Binary C-SVC dual, min 1/2 a'Qa - e'a s.t. y'a = 0, 0 <= a <= C, with
/// Q_ij = y_i y_j K_ij. SMO with second-order working-set selection; stops
/// when the maximal KKT violation drops below `tolerance`. The decision
/// function is sum_i alpha_i y_i K(x_i, x) + bias. A feasible warm start
/// may be supplied.
DualSolution solve_svm_dual(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& y, double C,
                            double tolerance, long max_iterations,
                            const Eigen::VectorXd* warm_start = nullptr);

inline long default_svm_iteration_cap(Eigen::Index n_samples) { return 10L * n_samples * 1000L; }

/// One-vs-rest multi-class SVM over compact class indices 0..n_classes-1.
class SvmModel {
 public:
  static SvmModel fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                      const SvmParams& params);

  /// rows x n_classes one-vs-rest decision values.
  Eigen::MatrixXd decision_function(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;

  /// d x n_classes primal weights; only meaningful for the linear kernel.
  const Eigen::MatrixXd& linear_weights() const { return weights_; }

 private:
  SvmParams params_;
  Eigen::MatrixXd support_;
  Eigen::MatrixXd dual_coef_;  // n_train x n_classes, alpha_i * y_i
  Eigen::VectorXd bias_;
  Eigen::MatrixXd weights_;
};

}  // namespace eegconn::ml
