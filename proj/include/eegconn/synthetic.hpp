#pragma once

#include "eegconn/recording.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace eegconn {

/// A stable vector autoregressive process with known coefficients:
/// x(t) = sum_r coefficients[r-1] * x(t-r) + w(t), w ~ N(0, noise_covariance).
/// Entry (i, j) of a coefficient matrix is the influence of channel j on i.
struct VarGroundTruth {
  std::vector<Eigen::MatrixXd> coefficients;
  Eigen::MatrixXd noise_covariance;
  std::uint64_t seed = 0;

  int order() const { return static_cast<int>(coefficients.size()); }
  Eigen::Index n_channels() const { return noise_covariance.rows(); }
};

/// Spectral radius of the (n*p) x (n*p) companion matrix.
double check_var_stability(std::span<const Eigen::MatrixXd> coefficients);

inline constexpr double kStabilityMargin = 1e-9;
inline constexpr long kDefaultBurnIn = 1000;

/// Simulates the process. Channels are labelled "ch1".."chN". Throws
/// std::invalid_argument for an unstable or ill-formed ground truth.
Recording generate_var(const VarGroundTruth& gt, long n_samples, double sample_rate = 256.0,
                       long burn_in = kDefaultBurnIn);

/// Two channels sharing a sinusoid at f0; channel 2 carries it delayed by
/// `lag` samples. Each channel gets independent white noise with power
/// (signal power)/snr; pass infinity for noise-free output.
Recording generate_coupled_sinusoids(double f0, double snr, long lag, long n_samples,
                                     double sample_rate, std::uint64_t seed);

}  // namespace eegconn
