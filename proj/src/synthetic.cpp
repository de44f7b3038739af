#include "eegconn/synthetic.hpp"

#include "eegconn/random.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace eegconn {

double check_var_stability(std::span<const Eigen::MatrixXd> coefficients) {
  if (coefficients.empty()) throw std::invalid_argument("stability: no coefficient matrices");
  const Eigen::Index n = coefficients.front().rows();
  for (const auto& a : coefficients) {
    if (a.rows() != n || a.cols() != n) {
      throw std::invalid_argument("stability: coefficient matrices must be square and equal size");
    }
  }
  const Eigen::Index p = static_cast<Eigen::Index>(coefficients.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n * p, n * p);
  for (Eigen::Index r = 0; r < p; ++r) companion.block(0, r * n, n, n) = coefficients[r];
  if (p > 1) companion.block(n, 0, n * (p - 1), n * (p - 1)).setIdentity();
  if (companion.isZero(0.0)) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

std::vector<std::string> default_labels(Eigen::Index n) {
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < n; ++i) labels.push_back("ch" + std::to_string(i + 1));
  return labels;
}

}  // namespace

Recording generate_var(const VarGroundTruth& gt, long n_samples, double sample_rate,
                       long burn_in) {
  const int p = gt.order();
  if (p < 1) throw std::invalid_argument("generate_var: order must be >= 1");
  const Eigen::Index n = gt.n_channels();
  if (gt.noise_covariance.cols() != n) {
    throw std::invalid_argument("generate_var: noise covariance must be square");
  }
  for (const auto& a : gt.coefficients) {
    if (a.rows() != n || a.cols() != n) {
      throw std::invalid_argument("generate_var: coefficient and noise covariance sizes differ");
    }
  }
  if (n_samples < 10L * p) {
    throw std::invalid_argument("generate_var: n_samples must be at least 10 * order");
  }
  if (burn_in < 0) throw std::invalid_argument("generate_var: burn_in must be >= 0");
  const double rho = check_var_stability(gt.coefficients);
  if (rho >= 1.0 - kStabilityMargin) {
    std::ostringstream os;
    os.precision(12);
    os << "generate_var: unstable coefficients, spectral radius " << rho;
    throw std::invalid_argument(os.str());
  }
  const Eigen::MatrixXd& sigma = gt.noise_covariance;
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("generate_var: noise covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("generate_var: noise covariance is not positive definite");
  }
  const Eigen::MatrixXd chol = llt.matrixL();

  Rng rng(gt.seed);
  const long total = n_samples + burn_in;
  // Column per time step keeps the recursion cache-friendly.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, total);
  Eigen::VectorXd z(n);
  for (long t = 0; t < total; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    Eigen::VectorXd xt = chol * z;
    for (int r = 1; r <= p && r <= t; ++r) xt.noalias() += gt.coefficients[r - 1] * x.col(t - r);
    x.col(t) = xt;
  }

  Recording rec;
  rec.sample_rate = sample_rate;
  rec.channels = default_labels(n);
  rec.data = x.rightCols(n_samples).transpose();
  rec.subject_id = "var";
  return rec;
}

Recording generate_coupled_sinusoids(double f0, double snr, long lag, long n_samples,
                                     double sample_rate, std::uint64_t seed) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sinusoids: sample_rate must be positive");
  if (!(f0 > 0.0) || f0 >= sample_rate / 2.0) {
    throw std::invalid_argument("sinusoids: f0 must lie strictly between 0 and Nyquist");
  }
  if (!(snr > 0.0)) throw std::invalid_argument("sinusoids: snr must be positive");
  if (n_samples < 2) throw std::invalid_argument("sinusoids: need at least 2 samples");
  if (lag < 0) throw std::invalid_argument("sinusoids: lag must be >= 0");

  Rng rng(seed);
  const double phase = 2.0 * std::numbers::pi * rng.uniform();
  const double noise_sd = std::isinf(snr) ? 0.0 : std::sqrt(0.5 / snr);
  const double w = 2.0 * std::numbers::pi * f0 / sample_rate;

  Recording rec;
  rec.sample_rate = sample_rate;
  rec.channels = {"ch1", "ch2"};
  rec.data.resize(n_samples, 2);
  for (long t = 0; t < n_samples; ++t) {
    rec.data(t, 0) = std::sin(w * static_cast<double>(t) + phase);
    rec.data(t, 1) = std::sin(w * static_cast<double>(t - lag) + phase);
  }
  if (noise_sd > 0.0) {
    for (long t = 0; t < n_samples; ++t) {
      rec.data(t, 0) += noise_sd * rng.normal();
      rec.data(t, 1) += noise_sd * rng.normal();
    }
  }
  rec.subject_id = "sinusoids";
  return rec;
}

}  // namespace eegconn
