#include "eegconn/ml/svm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eegconn::ml {

SvmParams svm_params_from(const Hyperparameters& p) {
  validate_hyperparameters(Family::svm, p);
  SvmParams out;
  const auto& k = get_string(p, "kernel");
  out.kernel = k == "linear" ? Kernel::linear : (k == "rbf" ? Kernel::rbf : Kernel::polynomial);
  out.C = get_number(p, "C");
  out.gamma = get_number(p, "gamma");
  if (p.count("degree")) out.degree = static_cast<int>(get_number(p, "degree"));
  return out;
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const SvmParams& params) {
  Eigen::MatrixXd k = a * b.transpose();
  switch (params.kernel) {
    case Kernel::linear:
      break;
    case Kernel::polynomial:
      k = (params.gamma * k.array() + params.coef0).pow(params.degree).matrix();
      break;
    case Kernel::rbf: {
      const Eigen::VectorXd na = a.rowwise().squaredNorm();
      const Eigen::RowVectorXd nb = b.rowwise().squaredNorm().transpose();
      Eigen::MatrixXd d2 = (-2.0 * k).colwise() + na;
      d2.rowwise() += nb;
      k = (-params.gamma * d2.array().max(0.0)).exp().matrix();
      break;
    }
  }
  return k;
}

DualSolution solve_svm_dual(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& y, double C,
                            double tolerance, long max_iterations,
                            const Eigen::VectorXd* warm_start) {
  constexpr double kTau = 1e-12;
  const Eigen::Index n = y.size();
  if (kernel.rows() != n || kernel.cols() != n) throw std::invalid_argument("svm: kernel shape");
  if (!(C > 0.0)) throw std::invalid_argument("svm: C must be positive");

  const Eigen::MatrixXd q = (y * y.transpose()).cwiseProduct(kernel);
  const Eigen::VectorXd qd = kernel.diagonal();

  DualSolution sol;
  sol.alpha = warm_start ? *warm_start : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = q * sol.alpha - Eigen::VectorXd::Ones(n);
  auto& alpha = sol.alpha;
  auto upper = [&](Eigen::Index t) { return alpha(t) >= C; };
  auto lower = [&](Eigen::Index t) { return alpha(t) <= 0.0; };

  for (sol.iterations = 0; sol.iterations < max_iterations; ++sol.iterations) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y(t) > 0) {
        if (!upper(t) && -grad(t) >= gmax) { gmax = -grad(t); i = t; }
      } else {
        if (!lower(t) && grad(t) >= gmax) { gmax = grad(t); i = t; }
      }
    }
    Eigen::Index j = -1;
    double obj_min = std::numeric_limits<double>::infinity();
    if (i >= 0) {
      for (Eigen::Index t = 0; t < n; ++t) {
        if (y(t) > 0) {
          if (lower(t)) continue;
          const double gd = gmax + grad(t);
          if (grad(t) >= gmax2) gmax2 = grad(t);
          if (gd > 0) {
            double quad = qd(i) + qd(t) - 2.0 * y(i) * q(i, t);
            if (quad <= 0) quad = kTau;
            const double obj = -(gd * gd) / quad;
            if (obj <= obj_min) { j = t; obj_min = obj; }
          }
        } else {
          if (upper(t)) continue;
          const double gd = gmax - grad(t);
          if (-grad(t) >= gmax2) gmax2 = -grad(t);
          if (gd > 0) {
            double quad = qd(i) + qd(t) + 2.0 * y(i) * q(i, t);
            if (quad <= 0) quad = kTau;
            const double obj = -(gd * gd) / quad;
            if (obj <= obj_min) { j = t; obj_min = obj; }
          }
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < tolerance) {
      sol.converged = true;
      break;
    }

    const double ai_old = alpha(i);
    const double aj_old = alpha(j);
    if (y(i) != y(j)) {
      double quad = qd(i) + qd(j) + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0) {
        if (alpha(j) < 0) { alpha(j) = 0; alpha(i) = diff; }
      } else {
        if (alpha(i) < 0) { alpha(i) = 0; alpha(j) = -diff; }
      }
      if (diff > 0) {
        if (alpha(i) > C) { alpha(i) = C; alpha(j) = C - diff; }
      } else {
        if (alpha(j) > C) { alpha(j) = C; alpha(i) = C + diff; }
      }
    } else {
      double quad = qd(i) + qd(j) - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > C) {
        if (alpha(i) > C) { alpha(i) = C; alpha(j) = sum - C; }
      } else {
        if (alpha(j) < 0) { alpha(j) = 0; alpha(i) = sum; }
      }
      if (sum > C) {
        if (alpha(j) > C) { alpha(j) = C; alpha(i) = sum - C; }
      } else {
        if (alpha(i) < 0) { alpha(i) = 0; alpha(j) = sum; }
      }
    }
    const double di = alpha(i) - ai_old;
    const double dj = alpha(j) - aj_old;
    grad += q.col(i) * di + q.col(j) * dj;
  }

  // Bias from free support vectors, else the midpoint of the feasible range.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  long n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * grad(t);
    if (upper(t)) {
      if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  sol.bias = -rho;
  return sol;
}

SvmModel SvmModel::fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                       const SvmParams& params) {
  if (x.rows() != static_cast<Eigen::Index>(y.size())) throw std::invalid_argument("svm: row mismatch");
  SvmModel m;
  m.params_ = params;
  m.support_ = x;
  const Eigen::MatrixXd k = kernel_matrix(x, x, params);
  const Eigen::Index n = x.rows();
  m.dual_coef_.resize(n, n_classes);
  m.bias_.resize(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    Eigen::VectorXd yc(n);
    for (Eigen::Index i = 0; i < n; ++i) yc(i) = y[i] == c ? 1.0 : -1.0;
    const auto sol = solve_svm_dual(k, yc, params.C, params.tolerance, default_svm_iteration_cap(n));
    m.dual_coef_.col(c) = sol.alpha.cwiseProduct(yc);
    m.bias_(c) = sol.bias;
  }
  if (params.kernel == Kernel::linear) m.weights_ = x.transpose() * m.dual_coef_;
  return m;
}

Eigen::MatrixXd SvmModel::decision_function(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = params_.kernel == Kernel::linear
                            ? Eigen::MatrixXd(x * weights_)
                            : Eigen::MatrixXd(kernel_matrix(x, support_, params_) * dual_coef_);
  out.rowwise() += bias_.transpose();
  return out;
}

std::vector<int> SvmModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd d = decision_function(x);
  std::vector<int> out(d.rows());
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    Eigen::Index best = 0;
    d.row(r).maxCoeff(&best);
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace eegconn::ml
