#pragma once

#include "eegconn/recording.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace eegconn {

/// One second-order section in direct form II transposed, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

using SosFilter = std::vector<Biquad>;

// Butterworth designs via the bilinear transform with prewarped edges.
SosFilter butter_lowpass(int order, double cutoff, double fs);
SosFilter butter_highpass(int order, double cutoff, double fs);
/// `order` is the prototype order; the digital filter has order 2*order.
SosFilter butter_bandstop(int order, double low, double high, double fs);

std::complex<double> frequency_response(const SosFilter& sos, double f, double fs);

/// Number of samples holding 99.99% of the impulse-response energy.
long effective_impulse_length(const SosFilter& sos);

/// Zero-phase forward-backward filtering. The signal is extended at both ends
/// by odd reflection of `pad` samples and each pass starts from the
/// steady-state response to the first sample. Requires x.size() > pad.
Eigen::VectorXd filtfilt(const SosFilter& sos, const Eigen::VectorXd& x, long pad);

struct FilterSpec {
  enum class Kind { bandpass, notch };
  Kind kind = Kind::bandpass;
  double low_cut = 0.1;
  double high_cut = 45.0;
  double notch_center = 50.0;
  double notch_width = 4.0;
  // Prototype order for the notch and the high-pass edge of the band-pass.
  int order = 4;
  // The 45 Hz edge needs a steeper skirt to stay within 1 dB up to 0.9*high.
  int lowpass_order = 10;

  /// Throws std::invalid_argument unless the spec is valid at this rate.
  void validate(double fs) const;
  SosFilter design(double fs) const;
};

Recording apply_filter(const Recording& rec, const FilterSpec& spec);
Recording bandpass_filter(const Recording& rec, double low, double high);
Recording notch_filter(const Recording& rec, double center);

/// Subtracts, per sample, the mean of the reference channels from every
/// channel. Reference channels are kept.
Recording rereference_average(const Recording& rec,
                              const std::vector<std::string>& reference_labels);

enum class BaselineMode { mean, zscore };

/// Removes each channel's baseline mean from the task recording; in zscore
/// mode also divides by the baseline standard deviation.
Recording baseline_correct(const Recording& rec, const Recording& baseline,
                           BaselineMode mode = BaselineMode::mean);

}  // namespace eegconn
