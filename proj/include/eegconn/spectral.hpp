#pragma once

#include "eegconn/recording.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace eegconn {

/// Welch cross-spectral density. matrices[k](a, b) = PSD_ab(freqs[k]), the
/// averaged product X_a * conj(X_b) with one-sided density scaling, so the
/// diagonal integrates to the channel variance.
struct CrossSpectralDensity {
  std::vector<double> freqs;
  std::vector<Eigen::MatrixXcd> matrices;
  long n_segments = 0;
  long window_len = 0;
  double sample_rate = 0.0;
  std::vector<std::string> channel_labels;
};

/// Hann-windowed, mean-detrended segments of `window_len` samples with the
/// given fractional overlap.
CrossSpectralDensity welch_csd(const Recording& rec, long window_len, double overlap = 0.5);

/// Analytic Morlet transform of one channel, rows = freqs, cols = samples.
struct WaveletTransform {
  std::vector<double> freqs;
  std::vector<double> times;
  Eigen::MatrixXcd coefficients;
  double omega0 = 6.0;
  double sample_rate = 0.0;
  /// Per frequency row, the number of samples at each edge inside the cone
  /// of influence (e-folding time sqrt(2) * scale).
  std::vector<long> coi_samples;
};

inline constexpr double kDefaultOmega0 = 6.0;

/// Morlet scale (seconds) whose Fourier period is 1/f.
double morlet_scale(double freq, double omega0);

/// Caches the zero-padded spectrum of a signal so that many frequency rows
/// can be evaluated without repeating the forward FFT.
class MorletAnalyzer {
 public:
  MorletAnalyzer(const Eigen::VectorXd& signal, double sample_rate);

  WaveletTransform transform(const std::vector<double>& freqs,
                             double omega0 = kDefaultOmega0) const;

  /// One frequency row, length = signal length.
  Eigen::VectorXcd row(double freq, double omega0 = kDefaultOmega0) const;

  long size() const { return n_; }

 private:
  long n_ = 0;
  long padded_ = 0;
  double fs_ = 0.0;
  Eigen::VectorXcd spectrum_;
};

WaveletTransform morlet_cwt(const Eigen::VectorXd& signal, double sample_rate,
                            const std::vector<double>& freqs, double omega0 = kDefaultOmega0);

/// Throws std::invalid_argument unless freqs is non-empty, strictly ascending
/// and inside (0, fs/2), and omega0 >= 5.
void validate_wavelet_grid(const std::vector<double>& freqs, double sample_rate, double omega0);

}  // namespace eegconn
