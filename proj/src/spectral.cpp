#include "eegconn/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eegconn {

CrossSpectralDensity welch_csd(const Recording& rec, long window_len, double overlap) {
  rec.validate();
  if (window_len < 8) throw std::invalid_argument("welch: window_len must be >= 8");
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw std::invalid_argument("welch: overlap must be in [0, 1)");
  }
  const long n = rec.n_samples();
  if (window_len > n) throw std::invalid_argument("welch: window longer than recording");
  const long hop = std::max(1L, window_len - std::lround(overlap * window_len));
  const long n_segments = 1 + (n - window_len) / hop;
  if (n_segments < 2) {
    throw std::invalid_argument("welch: recording too short for 2 segments");
  }

  const Eigen::Index n_ch = rec.n_channels();
  Eigen::VectorXd window(window_len);
  for (long k = 0; k < window_len; ++k) {
    window(k) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * k / window_len);
  }
  const double scale = 1.0 / (rec.sample_rate * window.squaredNorm() * n_segments);
  const long n_freqs = window_len / 2 + 1;

  CrossSpectralDensity csd;
  csd.window_len = window_len;
  csd.n_segments = n_segments;
  csd.sample_rate = rec.sample_rate;
  csd.channel_labels = rec.channels;
  csd.matrices.assign(n_freqs, Eigen::MatrixXcd::Zero(n_ch, n_ch));
  for (long k = 0; k < n_freqs; ++k) {
    csd.freqs.push_back(static_cast<double>(k) * rec.sample_rate / window_len);
  }

  Eigen::FFT<double> fft;
  std::vector<double> seg(window_len);
  std::vector<std::complex<double>> spec;
  Eigen::MatrixXcd bins(n_freqs, n_ch);
  for (long s = 0; s < n_segments; ++s) {
    const long start = s * hop;
    for (Eigen::Index c = 0; c < n_ch; ++c) {
      const auto block = rec.data.col(c).segment(start, window_len);
      const double mean = block.mean();
      for (long k = 0; k < window_len; ++k) seg[k] = (block(k) - mean) * window(k);
      fft.fwd(spec, seg);
      for (long k = 0; k < n_freqs; ++k) bins(k, c) = spec[k];
    }
    for (long k = 0; k < n_freqs; ++k) {
      const Eigen::VectorXcd x = bins.row(k).transpose();
      csd.matrices[k].noalias() += x * x.adjoint();
    }
  }

  for (long k = 0; k < n_freqs; ++k) {
    const bool edge = k == 0 || (window_len % 2 == 0 && k == n_freqs - 1);
    auto& m = csd.matrices[k];
    m *= edge ? scale : 2.0 * scale;
    for (Eigen::Index c = 0; c < n_ch; ++c) m(c, c) = m(c, c).real();
  }
  return csd;
}

double morlet_scale(double freq, double omega0) {
  return (omega0 + std::sqrt(2.0 + omega0 * omega0)) / (4.0 * std::numbers::pi * freq);
}

void validate_wavelet_grid(const std::vector<double>& freqs, double sample_rate, double omega0) {
  if (freqs.empty()) throw std::invalid_argument("cwt: empty frequency list");
  if (!(omega0 >= 5.0)) throw std::invalid_argument("cwt: omega0 must be >= 5");
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!(freqs[i] > 0.0) || freqs[i] >= sample_rate / 2.0) {
      throw std::invalid_argument("cwt: frequency " + std::to_string(freqs[i]) +
                                  " Hz outside (0, Nyquist)");
    }
    if (i > 0 && !(freqs[i] > freqs[i - 1])) {
      throw std::invalid_argument("cwt: frequencies must be strictly ascending");
    }
  }
}

MorletAnalyzer::MorletAnalyzer(const Eigen::VectorXd& signal, double sample_rate)
    : n_(signal.size()), fs_(sample_rate) {
  if (n_ < 2) throw std::invalid_argument("cwt: signal needs at least 2 samples");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("cwt: sample rate must be positive");
  padded_ = 1;
  while (padded_ < 2 * n_) padded_ <<= 1;
  std::vector<double> buf(padded_, 0.0);
  for (long i = 0; i < n_; ++i) buf[i] = signal(i);
  std::vector<std::complex<double>> spec;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  fft.fwd(spec, buf);
  // Only non-negative frequencies are needed by the analytic wavelet.
  spectrum_ = Eigen::Map<Eigen::VectorXcd>(spec.data(), static_cast<Eigen::Index>(spec.size()));
}

Eigen::VectorXcd MorletAnalyzer::row(double freq, double omega0) const {
  const double dt = 1.0 / fs_;
  const double s = morlet_scale(freq, omega0);
  const double norm = std::pow(std::numbers::pi, -0.25) * std::sqrt(2.0 * std::numbers::pi * s / dt);
  std::vector<std::complex<double>> prod(padded_, {0.0, 0.0});
  for (Eigen::Index k = 1; k < spectrum_.size(); ++k) {
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) / (padded_ * dt);
    const double arg = s * omega - omega0;
    if (arg > 40.0) break;
    prod[k] = spectrum_(k) * (norm * std::exp(-0.5 * arg * arg));
  }
  std::vector<std::complex<double>> out;
  Eigen::FFT<double> fft;
  fft.inv(out, prod);
  Eigen::VectorXcd r(n_);
  for (long i = 0; i < n_; ++i) r(i) = out[i];
  return r;
}

WaveletTransform MorletAnalyzer::transform(const std::vector<double>& freqs, double omega0) const {
  validate_wavelet_grid(freqs, fs_, omega0);
  WaveletTransform wt;
  wt.freqs = freqs;
  wt.omega0 = omega0;
  wt.sample_rate = fs_;
  wt.times.resize(n_);
  for (long i = 0; i < n_; ++i) wt.times[i] = static_cast<double>(i) / fs_;
  wt.coefficients.resize(static_cast<Eigen::Index>(freqs.size()), n_);
  for (std::size_t f = 0; f < freqs.size(); ++f) {
    wt.coefficients.row(static_cast<Eigen::Index>(f)) = row(freqs[f], omega0).transpose();
    wt.coi_samples.push_back(
        static_cast<long>(std::ceil(std::sqrt(2.0) * morlet_scale(freqs[f], omega0) * fs_)));
  }
  return wt;
}

WaveletTransform morlet_cwt(const Eigen::VectorXd& signal, double sample_rate,
                            const std::vector<double>& freqs, double omega0) {
  validate_wavelet_grid(freqs, sample_rate, omega0);
  return MorletAnalyzer(signal, sample_rate).transform(freqs, omega0);
}

}  // namespace eegconn
