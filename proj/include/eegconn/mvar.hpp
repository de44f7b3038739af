#pragma once

#include "eegconn/connectivity.hpp"
#include "eegconn/recording.hpp"

#include <Eigen/Dense>

#include <vector>

namespace eegconn {

/// Least-squares multivariate autoregressive fit,
/// x(t) = sum_{r=1..p} coefficients[r-1] * x(t-r) + w(t).
/// coefficients[r-1](i, j) is the influence of channel j at lag r on channel i.
struct MvarModel {
  std::vector<Eigen::MatrixXd> coefficients;
  Eigen::MatrixXd noise_covariance;
  long n_samples_fit = 0;
  double spectral_radius = 0.0;
  // False when the companion spectral radius is >= 1.
  bool stable = true;

  int order() const { return static_cast<int>(coefficients.size()); }
  Eigen::Index n_channels() const {
    return coefficients.empty() ? 0 : coefficients.front().rows();
  }
};

/// Channels are demeaned before fitting. Requires
/// n_samples >= 10 * n_channels * order; throws std::invalid_argument on a
/// rank-deficient regression (e.g. a constant channel).
MvarModel fit_mvar(const Recording& rec, int order);

/// AIC-minimizing order in [1, p_max]. Every candidate is fitted on the same
/// samples (t >= p_max) so the criteria are comparable; ties go to the
/// smaller order.
int select_order(const Recording& rec, int p_max);

/// Per-order AIC values as computed by select_order (index 0 = order 1).
std::vector<double> order_criteria(const Recording& rec, int p_max);

/// Frequency-domain coefficient matrix I - sum_r A_r exp(-i 2 pi f r) at a
/// normalized frequency f (cycles/sample).
Eigen::MatrixXcd coefficient_spectrum(const std::vector<Eigen::MatrixXd>& coefficients, double f);

/// Column-normalized partial directed coherence at each normalized frequency
/// in [0, 0.5].
std::vector<Eigen::MatrixXcd> pdc_spectrum(const std::vector<Eigen::MatrixXd>& coefficients,
                                           const std::vector<double>& freqs);
std::vector<Eigen::MatrixXcd> pdc_spectrum(const MvarModel& model, const std::vector<double>& freqs);

inline constexpr int kPdcBandPoints = 33;

/// |PDC| averaged over kPdcBandPoints evenly spaced frequencies across the band.
ConnectivityMatrix pdc_matrix(const std::vector<Eigen::MatrixXd>& coefficients, Band band,
                              double sample_rate);
ConnectivityMatrix pdc_matrix(const MvarModel& model, Band band, double sample_rate);

}  // namespace eegconn
