#include "eegconn/connectivity.hpp"

#include <cmath>
#include <stdexcept>

namespace eegconn {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::msc: return "msc";
    case Metric::wc: return "wc";
    case Metric::pdc: return "pdc";
  }
  return "?";
}

Metric metric_from_string(std::string_view s) {
  if (s == "msc") return Metric::msc;
  if (s == "wc") return Metric::wc;
  if (s == "pdc") return Metric::pdc;
  throw std::invalid_argument("unknown metric \"" + std::string(s) + "\"");
}

ConnectivityMatrix msc_matrix(const CrossSpectralDensity& csd, Band band) {
  if (!(band.low <= band.high)) throw std::invalid_argument("msc: band edges out of order");
  std::vector<std::size_t> bins;
  for (std::size_t k = 0; k < csd.freqs.size(); ++k) {
    if (csd.freqs[k] >= band.low && csd.freqs[k] <= band.high) bins.push_back(k);
  }
  if (bins.empty()) throw std::invalid_argument("msc: no spectral bins inside the band");
  const Eigen::Index n = csd.matrices.front().rows();

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (const auto k : bins) {
    const auto& s = csd.matrices[k];
    for (Eigen::Index a = 0; a < n; ++a) {
      if (!(s(a, a).real() > 0.0)) {
        const std::string label = a < static_cast<Eigen::Index>(csd.channel_labels.size())
                                      ? csd.channel_labels[a]
                                      : std::to_string(a);
        throw std::invalid_argument("msc: zero auto-spectrum for channel " + label + " at " +
                                    std::to_string(csd.freqs[k]) + " Hz");
      }
    }
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = a + 1; b < n; ++b) {
        acc(a, b) += std::norm(s(a, b)) / (s(a, a).real() * s(b, b).real());
      }
    }
  }
  acc /= static_cast<double>(bins.size());

  ConnectivityMatrix out;
  out.metric = Metric::msc;
  out.band = band;
  out.channel_labels = csd.channel_labels;
  out.values = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      out.values(a, b) = acc(a, b);
      out.values(b, a) = acc(a, b);
    }
  }
  return out;
}

long WaveletSmoothing::window_samples(double freq, double sample_rate) const {
  long w = std::lround(cycles * sample_rate / freq);
  if (w % 2 == 0) ++w;
  return w;
}

namespace {

void check_same_grid(const WaveletTransform& a, const WaveletTransform& b) {
  if (a.freqs != b.freqs || a.coefficients.rows() != b.coefficients.rows() ||
      a.coefficients.cols() != b.coefficients.cols() || a.sample_rate != b.sample_rate) {
    throw std::invalid_argument("wavelet coherence: transforms do not share a grid");
  }
}

// Windowed sums via long-double prefix sums; the window is truncated at the
// record edges.
struct RowCoherence {
  std::vector<long double> paa, pbb, pab_re, pab_im;

  void compute(const Eigen::VectorXcd& wa, const Eigen::VectorXcd& wb, long half,
               double* out) {
    const long n = wa.size();
    paa.assign(n + 1, 0.0L);
    pbb.assign(n + 1, 0.0L);
    pab_re.assign(n + 1, 0.0L);
    pab_im.assign(n + 1, 0.0L);
    for (long t = 0; t < n; ++t) {
      const auto x = wa(t);
      const auto y = wb(t);
      paa[t + 1] = paa[t] + static_cast<long double>(std::norm(x));
      pbb[t + 1] = pbb[t] + static_cast<long double>(std::norm(y));
      const auto xy = x * std::conj(y);
      pab_re[t + 1] = pab_re[t] + static_cast<long double>(xy.real());
      pab_im[t + 1] = pab_im[t] + static_cast<long double>(xy.imag());
    }
    for (long t = 0; t < n; ++t) {
      const long lo = std::max(0L, t - half);
      const long hi = std::min(n, t + half + 1);
      const long double saa = paa[hi] - paa[lo];
      const long double sbb = pbb[hi] - pbb[lo];
      const long double re = pab_re[hi] - pab_re[lo];
      const long double im = pab_im[hi] - pab_im[lo];
      const long double den = std::sqrt(saa * sbb);
      out[t] = den > 0.0L ? static_cast<double>(std::sqrt(re * re + im * im) / den) : 0.0;
    }
  }
};

std::pair<long, long> interior_range(long n, long coi, long half) {
  const long margin = coi + half;
  return {std::min(margin, n), std::max(std::min(margin, n), n - margin)};
}

}  // namespace

TimeFrequencyCoherence wavelet_coherence(const WaveletTransform& a, const WaveletTransform& b,
                                         const WaveletSmoothing& smoothing) {
  check_same_grid(a, b);
  const long n = a.coefficients.cols();
  TimeFrequencyCoherence out;
  out.freqs = a.freqs;
  out.values.resize(a.coefficients.rows(), n);
  Eigen::Matrix<double, Eigen::Dynamic, 1> row(n);
  RowCoherence rc;
  for (Eigen::Index f = 0; f < a.coefficients.rows(); ++f) {
    const long w = smoothing.window_samples(a.freqs[f], a.sample_rate);
    if (w < 3) {
      throw std::invalid_argument("wavelet coherence: smoothing window shorter than 3 samples at " +
                                  std::to_string(a.freqs[f]) + " Hz");
    }
    const long half = w / 2;
    rc.compute(a.coefficients.row(f).transpose(), b.coefficients.row(f).transpose(), half,
               row.data());
    out.values.row(f) = row.transpose();
    out.interior.push_back(interior_range(n, a.coi_samples[f], half));
  }
  return out;
}

std::vector<double> band_frequencies(Band band, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("band frequencies: step must be positive");
  if (!(band.low > 0.0 && band.low <= band.high)) {
    throw std::invalid_argument("band frequencies: require 0 < low <= high");
  }
  const long count = static_cast<long>(std::floor((band.high - band.low) / step + 1e-9)) + 1;
  std::vector<double> freqs;
  for (long i = 0; i < count; ++i) freqs.push_back(band.low + step * static_cast<double>(i));
  return freqs;
}

ConnectivityMatrix wc_matrix(const Recording& rec, Band band, const WaveletCoherenceOptions& options) {
  rec.validate();
  const auto freqs = band_frequencies(band, options.freq_step);
  validate_wavelet_grid(freqs, rec.sample_rate, options.omega0);
  const Eigen::Index n_ch = rec.n_channels();
  const long n = rec.n_samples();

  std::vector<MorletAnalyzer> analyzers;
  analyzers.reserve(n_ch);
  for (Eigen::Index c = 0; c < n_ch; ++c) analyzers.emplace_back(rec.data.col(c), rec.sample_rate);

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_ch, n_ch);
  std::vector<Eigen::VectorXcd> rows(n_ch);
  std::vector<double> coh(n);
  RowCoherence rc;
  for (const double f : freqs) {
    const long w = options.smoothing.window_samples(f, rec.sample_rate);
    if (w < 3) {
      throw std::invalid_argument("wavelet coherence: smoothing window shorter than 3 samples at " +
                                  std::to_string(f) + " Hz");
    }
    const long half = w / 2;
    const long coi = static_cast<long>(
        std::ceil(std::sqrt(2.0) * morlet_scale(f, options.omega0) * rec.sample_rate));
    const auto [lo, hi] = interior_range(n, coi, half);
    if (hi <= lo) {
      throw std::invalid_argument("wavelet coherence: recording too short for an interior at " +
                                  std::to_string(f) + " Hz");
    }
    for (Eigen::Index c = 0; c < n_ch; ++c) rows[c] = analyzers[c].row(f, options.omega0);
    for (Eigen::Index a = 0; a < n_ch; ++a) {
      for (Eigen::Index b = a + 1; b < n_ch; ++b) {
        rc.compute(rows[a], rows[b], half, coh.data());
        double sum = 0.0;
        for (long t = lo; t < hi; ++t) sum += coh[t];
        acc(a, b) += sum / static_cast<double>(hi - lo);
      }
    }
  }
  acc /= static_cast<double>(freqs.size());

  ConnectivityMatrix out;
  out.metric = Metric::wc;
  out.band = band;
  out.channel_labels = rec.channels;
  out.values = Eigen::MatrixXd::Identity(n_ch, n_ch);
  for (Eigen::Index a = 0; a < n_ch; ++a) {
    for (Eigen::Index b = a + 1; b < n_ch; ++b) {
      out.values(a, b) = acc(a, b);
      out.values(b, a) = acc(a, b);
    }
  }
  return out;
}

}  // namespace eegconn
