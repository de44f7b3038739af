#pragma once

#include "eegconn/recording.hpp"
#include "eegconn/spectral.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace eegconn {

enum class Metric { msc, wc, pdc };

std::string_view to_string(Metric m);
Metric metric_from_string(std::string_view s);

struct Band {
  double low = 13.0;
  double high = 29.0;
};

inline constexpr Band kBetaBand{13.0, 29.0};

/// n x n band-aggregated connectivity. For pdc, values(i, j) is the
/// influence of channel j on channel i.
struct ConnectivityMatrix {
  Metric metric = Metric::msc;
  Band band;
  Eigen::MatrixXd values;
  std::vector<std::string> channel_labels;
};

/// Magnitude-squared coherence |S_ab|^2 / (S_aa * S_bb), averaged over the
/// Welch bins falling inside the band.
ConnectivityMatrix msc_matrix(const CrossSpectralDensity& csd, Band band);

/// Time smoothing used by wavelet coherence: a centred boxcar of
/// `cycles / f` seconds on each frequency row.
struct WaveletSmoothing {
  double cycles = 20.0;

  long window_samples(double freq, double sample_rate) const;
};

/// Coherence on the shared time-frequency grid plus, per row, the half-open
/// column range outside both the cone of influence and the smoothing margin.
struct TimeFrequencyCoherence {
  std::vector<double> freqs;
  Eigen::MatrixXd values;
  std::vector<std::pair<long, long>> interior;
};

TimeFrequencyCoherence wavelet_coherence(const WaveletTransform& a, const WaveletTransform& b,
                                         const WaveletSmoothing& smoothing = {});

struct WaveletCoherenceOptions {
  double omega0 = kDefaultOmega0;
  WaveletSmoothing smoothing;
  double freq_step = 1.0;
};

/// Evenly spaced analysis frequencies from band.low to band.high inclusive.
std::vector<double> band_frequencies(Band band, double step);

/// Pairwise wavelet coherence averaged over the band rows and the interior
/// time columns.
ConnectivityMatrix wc_matrix(const Recording& rec, Band band,
                             const WaveletCoherenceOptions& options = {});

}  // namespace eegconn
