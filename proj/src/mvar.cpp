#include "eegconn/mvar.hpp"

#include "eegconn/synthetic.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace eegconn {

namespace {

// Lagged regression Y = X B over t in [first, n): row of X holds
// [x(t-1)', ..., x(t-p)'].
struct LagRegression {
  Eigen::MatrixXd gram;   // X'X
  Eigen::MatrixXd cross;  // X'Y
  Eigen::MatrixXd yy;     // Y'Y
  long n_rows = 0;
};

Eigen::MatrixXd demeaned(const Recording& rec) {
  Eigen::MatrixXd x = rec.data;
  x.rowwise() -= x.colwise().mean();
  return x;
}

LagRegression build_regression(const Eigen::MatrixXd& x, int p, long first) {
  const long n = x.rows();
  const Eigen::Index n_ch = x.cols();
  const long rows = n - first;
  Eigen::MatrixXd design(rows, n_ch * p);
  for (int r = 1; r <= p; ++r) design.middleCols((r - 1) * n_ch, n_ch) = x.middleRows(first - r, rows);
  const auto y = x.middleRows(first, rows);

  LagRegression reg;
  reg.n_rows = rows;
  reg.gram = Eigen::MatrixXd::Zero(n_ch * p, n_ch * p);
  reg.gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  reg.gram = reg.gram.selfadjointView<Eigen::Lower>();
  reg.cross.noalias() = design.transpose() * y;
  reg.yy.noalias() = y.transpose() * y;
  return reg;
}

// Solves the leading (k x k) normal equations; throws on rank deficiency.
Eigen::MatrixXd solve_leading(const LagRegression& reg, Eigen::Index k) {
  const Eigen::MatrixXd g = reg.gram.topLeftCorner(k, k);
  const Eigen::VectorXd d = g.diagonal();
  if ((d.array() <= 0.0).any()) {
    throw std::invalid_argument("mvar: rank-deficient regression (constant channel)");
  }
  const Eigen::VectorXd inv_sqrt = d.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * g * inv_sqrt.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
    throw std::invalid_argument("mvar: rank-deficient regression (collinear channels)");
  }
  const Eigen::MatrixXd rhs = inv_sqrt.asDiagonal() * reg.cross.topRows(k);
  return inv_sqrt.asDiagonal() * llt.solve(rhs);
}

void check_samples(const Recording& rec, int order) {
  if (order < 1) throw std::invalid_argument("mvar: order must be >= 1");
  const long needed = 10L * rec.n_channels() * order;
  if (rec.n_samples() < needed) {
    throw std::invalid_argument("mvar: " + std::to_string(rec.n_samples()) +
                                " samples is fewer than the required " + std::to_string(needed));
  }
}

}  // namespace

MvarModel fit_mvar(const Recording& rec, int order) {
  rec.validate();
  check_samples(rec, order);
  const Eigen::Index n_ch = rec.n_channels();
  const auto x = demeaned(rec);
  const auto reg = build_regression(x, order, order);
  const Eigen::MatrixXd b = solve_leading(reg, n_ch * order);

  MvarModel model;
  for (int r = 1; r <= order; ++r) {
    model.coefficients.push_back(b.middleRows((r - 1) * n_ch, n_ch).transpose());
  }
  const long dof = std::max(1L, reg.n_rows - static_cast<long>(n_ch) * order);
  Eigen::MatrixXd resid = reg.yy - reg.cross.transpose() * b;
  resid = 0.5 * (resid + resid.transpose()).eval();
  model.noise_covariance = resid / static_cast<double>(dof);
  model.n_samples_fit = reg.n_rows;
  model.spectral_radius = check_var_stability(model.coefficients);
  model.stable = model.spectral_radius < 1.0;
  return model;
}

std::vector<double> order_criteria(const Recording& rec, int p_max) {
  rec.validate();
  check_samples(rec, p_max);
  const Eigen::Index n_ch = rec.n_channels();
  const auto x = demeaned(rec);
  const auto reg = build_regression(x, p_max, p_max);
  const double n_eff = static_cast<double>(reg.n_rows);

  std::vector<double> aic;
  for (int p = 1; p <= p_max; ++p) {
    const Eigen::Index k = n_ch * p;
    const Eigen::MatrixXd b = solve_leading(reg, k);
    Eigen::MatrixXd sigma = (reg.yy - reg.cross.topRows(k).transpose() * b) / n_eff;
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("mvar: singular residual covariance at order " + std::to_string(p));
    }
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    aic.push_back(log_det + 2.0 * p * static_cast<double>(n_ch * n_ch) / n_eff);
  }
  return aic;
}

int select_order(const Recording& rec, int p_max) {
  if (p_max < 1) throw std::invalid_argument("select_order: p_max must be >= 1");
  const auto aic = order_criteria(rec, p_max);
  int best = 1;
  for (int p = 2; p <= p_max; ++p) {
    if (aic[p - 1] < aic[best - 1]) best = p;
  }
  return best;
}

Eigen::MatrixXcd coefficient_spectrum(const std::vector<Eigen::MatrixXd>& coefficients, double f) {
  const Eigen::Index n = coefficients.front().rows();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n);
  for (std::size_t r = 1; r <= coefficients.size(); ++r) {
    const std::complex<double> e = std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(r));
    a -= coefficients[r - 1].cast<std::complex<double>>() * e;
  }
  return a;
}

std::vector<Eigen::MatrixXcd> pdc_spectrum(const std::vector<Eigen::MatrixXd>& coefficients,
                                           const std::vector<double>& freqs) {
  if (coefficients.empty()) throw std::invalid_argument("pdc: model has no lags");
  const Eigen::Index n = coefficients.front().rows();
  for (const auto& a : coefficients) {
    if (a.rows() != n || a.cols() != n) throw std::invalid_argument("pdc: coefficient shape mismatch");
  }
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(freqs.size());
  for (const double f : freqs) {
    if (!(f >= 0.0 && f <= 0.5)) {
      throw std::invalid_argument("pdc: normalized frequency must lie in [0, 0.5]");
    }
    Eigen::MatrixXcd a = coefficient_spectrum(coefficients, f);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double norm = a.col(j).norm();
      if (!(norm > 0.0)) {
        throw std::runtime_error("pdc: zero column norm for source channel " + std::to_string(j));
      }
      a.col(j) /= norm;
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Eigen::MatrixXcd> pdc_spectrum(const MvarModel& model, const std::vector<double>& freqs) {
  return pdc_spectrum(model.coefficients, freqs);
}

ConnectivityMatrix pdc_matrix(const std::vector<Eigen::MatrixXd>& coefficients, Band band,
                              double sample_rate) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("pdc: sample rate must be positive");
  if (!(band.low >= 0.0 && band.low <= band.high && band.high <= sample_rate / 2.0)) {
    throw std::invalid_argument("pdc: band must satisfy 0 <= low <= high <= Nyquist");
  }
  std::vector<double> freqs;
  for (int i = 0; i < kPdcBandPoints; ++i) {
    const double hz = band.low + (band.high - band.low) * i / (kPdcBandPoints - 1);
    freqs.push_back(hz / sample_rate);
  }
  const auto spectrum = pdc_spectrum(coefficients, freqs);
  const Eigen::Index n = coefficients.front().rows();
  ConnectivityMatrix out;
  out.metric = Metric::pdc;
  out.band = band;
  out.values = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : spectrum) out.values += e.cwiseAbs();
  out.values /= static_cast<double>(spectrum.size());
  for (Eigen::Index i = 0; i < n; ++i) out.channel_labels.push_back("ch" + std::to_string(i + 1));
  return out;
}

ConnectivityMatrix pdc_matrix(const MvarModel& model, Band band, double sample_rate) {
  return pdc_matrix(model.coefficients, band, sample_rate);
}

}  // namespace eegconn
