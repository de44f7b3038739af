#include "eegconn/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eegconn {

namespace {

using cplx = std::complex<double>;

enum class Band { lowpass, highpass, bandstop };

std::vector<cplx> butter_prototype_poles(int order) {
  std::vector<cplx> poles;
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

double prewarp(double f, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); }

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

// Groups digital poles into conjugate pairs (or real pairs) and attaches the
// numerator appropriate for the band type, then normalizes each section to
// unit gain at the reference point of the passband.
SosFilter assemble(std::vector<cplx> poles, Band band, double notch_w, const cplx& z_ref) {
  std::vector<cplx> complex_upper;
  std::vector<double> reals;
  for (const auto& p : poles) {
    if (std::abs(p.imag()) < 1e-12 * std::max(1.0, std::abs(p))) {
      reals.push_back(p.real());
    } else if (p.imag() > 0) {
      complex_upper.push_back(p);
    }
  }
  std::sort(complex_upper.begin(), complex_upper.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) < std::abs(b); });
  std::sort(reals.begin(), reals.end());

  SosFilter sos;
  auto numerator = [&](Biquad& q, bool second_order) {
    if (!second_order) {
      q.b0 = 1.0;
      q.b1 = band == Band::highpass ? -1.0 : 1.0;
      q.b2 = 0.0;
      return;
    }
    switch (band) {
      case Band::lowpass: q.b0 = 1.0; q.b1 = 2.0; q.b2 = 1.0; break;
      case Band::highpass: q.b0 = 1.0; q.b1 = -2.0; q.b2 = 1.0; break;
      case Band::bandstop: q.b0 = 1.0; q.b1 = -2.0 * std::cos(notch_w); q.b2 = 1.0; break;
    }
  };
  auto normalize = [&](Biquad& q) {
    const cplx zi = 1.0 / z_ref;
    const cplx num = q.b0 + q.b1 * zi + q.b2 * zi * zi;
    const cplx den = 1.0 + q.a1 * zi + q.a2 * zi * zi;
    const double g = std::abs(num / den);
    q.b0 /= g;
    q.b1 /= g;
    q.b2 /= g;
  };

  for (const auto& p : complex_upper) {
    Biquad q;
    q.a1 = -2.0 * p.real();
    q.a2 = std::norm(p);
    numerator(q, true);
    normalize(q);
    sos.push_back(q);
  }
  std::size_t i = 0;
  for (; i + 1 < reals.size(); i += 2) {
    Biquad q;
    q.a1 = -(reals[i] + reals[i + 1]);
    q.a2 = reals[i] * reals[i + 1];
    numerator(q, true);
    normalize(q);
    sos.push_back(q);
  }
  if (i < reals.size()) {
    Biquad q;
    q.a1 = -reals[i];
    numerator(q, false);
    normalize(q);
    sos.push_back(q);
  }
  return sos;
}

void check_edge(double f, double fs, const char* what) {
  if (!(fs > 0.0)) throw std::invalid_argument("filter: sample rate must be positive");
  if (!(f > 0.0) || f >= fs / 2.0) {
    throw std::invalid_argument(std::string("filter: ") + what +
                                " must lie strictly between 0 and Nyquist");
  }
}

void check_order(int order) {
  if (order < 1) throw std::invalid_argument("filter: order must be >= 1");
}

}  // namespace

SosFilter butter_lowpass(int order, double cutoff, double fs) {
  check_order(order);
  check_edge(cutoff, fs, "cutoff");
  const double w = prewarp(cutoff, fs);
  std::vector<cplx> poles;
  for (const auto& p : butter_prototype_poles(order)) poles.push_back(bilinear(w * p, fs));
  return assemble(std::move(poles), Band::lowpass, 0.0, cplx(1.0, 0.0));
}

SosFilter butter_highpass(int order, double cutoff, double fs) {
  check_order(order);
  check_edge(cutoff, fs, "cutoff");
  const double w = prewarp(cutoff, fs);
  std::vector<cplx> poles;
  for (const auto& p : butter_prototype_poles(order)) poles.push_back(bilinear(w / p, fs));
  return assemble(std::move(poles), Band::highpass, 0.0, cplx(-1.0, 0.0));
}

SosFilter butter_bandstop(int order, double low, double high, double fs) {
  check_order(order);
  check_edge(low, fs, "stop-band low edge");
  check_edge(high, fs, "stop-band high edge");
  if (!(low < high)) throw std::invalid_argument("filter: stop-band edges must increase");
  const double w1 = prewarp(low, fs);
  const double w2 = prewarp(high, fs);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;
  std::vector<cplx> poles;
  for (const auto& p : butter_prototype_poles(order)) {
    const cplx a = (bw / 2.0) / p;
    const cplx root = std::sqrt(a * a - w0 * w0);
    poles.push_back(bilinear(a + root, fs));
    poles.push_back(bilinear(a - root, fs));
  }
  // The analog zeros at +-j*w0 land on the unit circle at this angle.
  const double notch_w = std::arg(bilinear(cplx(0.0, w0), fs));
  return assemble(std::move(poles), Band::bandstop, notch_w, cplx(1.0, 0.0));
}

std::complex<double> frequency_response(const SosFilter& sos, double f, double fs) {
  const cplx zi = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  cplx h(1.0, 0.0);
  for (const auto& q : sos) {
    h *= (q.b0 + q.b1 * zi + q.b2 * zi * zi) / (1.0 + q.a1 * zi + q.a2 * zi * zi);
  }
  return h;
}

namespace {

struct SectionState {
  double z1 = 0.0, z2 = 0.0;
};

double step(const Biquad& q, SectionState& s, double x) {
  const double y = q.b0 * x + s.z1;
  s.z1 = q.b1 * x - q.a1 * y + s.z2;
  s.z2 = q.b2 * x - q.a2 * y;
  return y;
}

// State of every section after an infinitely long constant input u.
std::vector<SectionState> steady_state(const SosFilter& sos, double u) {
  std::vector<SectionState> states(sos.size());
  double in = u;
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const auto& q = sos[k];
    const double dc = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    const double y = dc * in;
    states[k].z2 = q.b2 * in - q.a2 * y;
    states[k].z1 = q.b1 * in - q.a1 * y + states[k].z2;
    in = y;
  }
  return states;
}

void run_pass(const SosFilter& sos, std::vector<double>& x) {
  if (x.empty()) return;
  auto states = steady_state(sos, x.front());
  for (auto& v : x) {
    double y = v;
    for (std::size_t k = 0; k < sos.size(); ++k) y = step(sos[k], states[k], y);
    v = y;
  }
}

}  // namespace

long effective_impulse_length(const SosFilter& sos) {
  constexpr long kChunk = 1024;
  constexpr long kMax = 1L << 22;
  std::vector<SectionState> states(sos.size());
  std::vector<double> energy;  // cumulative
  double total = 0.0;
  for (long t = 0; t < kMax; ++t) {
    double y = t == 0 ? 1.0 : 0.0;
    for (std::size_t k = 0; k < sos.size(); ++k) y = step(sos[k], states[k], y);
    total += y * y;
    energy.push_back(total);
    if ((t + 1) % kChunk == 0 && t + 1 >= 2 * kChunk) {
      const double recent = total - energy[t - kChunk];
      if (recent <= 1e-16 * total) break;
    }
  }
  if (total <= 0.0) return 1;
  const double target = (1.0 - 1e-4) * total;
  const auto it = std::lower_bound(energy.begin(), energy.end(), target);
  return static_cast<long>(it - energy.begin()) + 1;
}

Eigen::VectorXd filtfilt(const SosFilter& sos, const Eigen::VectorXd& x, long pad) {
  const long n = x.size();
  if (pad < 0) throw std::invalid_argument("filtfilt: negative padding");
  if (n <= pad) {
    throw std::invalid_argument("filtfilt: signal of " + std::to_string(n) +
                                " samples is not longer than the required padding of " +
                                std::to_string(pad) + " samples");
  }
  std::vector<double> ext(static_cast<std::size_t>(n + 2 * pad));
  for (long i = 0; i < pad; ++i) ext[i] = 2.0 * x(0) - x(pad - i);
  for (long i = 0; i < n; ++i) ext[pad + i] = x(i);
  for (long i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * x(n - 1) - x(n - 2 - i);

  run_pass(sos, ext);
  std::reverse(ext.begin(), ext.end());
  run_pass(sos, ext);
  std::reverse(ext.begin(), ext.end());

  Eigen::VectorXd out(n);
  for (long i = 0; i < n; ++i) out(i) = ext[pad + i];
  return out;
}

void FilterSpec::validate(double fs) const {
  if (!(fs > 0.0)) throw std::invalid_argument("filter: sample rate must be positive");
  if (kind == Kind::bandpass) {
    if (!(low_cut > 0.0 && low_cut < high_cut && high_cut < fs / 2.0)) {
      throw std::invalid_argument("band-pass: require 0 < low < high < Nyquist");
    }
    if (order < 1 || lowpass_order < 1) {
      throw std::invalid_argument("band-pass: orders must be >= 1");
    }
  } else {
    if (!(notch_center > 0.0 && notch_center < fs / 2.0)) {
      throw std::invalid_argument("notch: center must lie strictly between 0 and Nyquist");
    }
    if (order < 2 || order % 2 != 0) throw std::invalid_argument("notch: order must be even and >= 2");
    if (!(notch_width > 0.0) || notch_center - notch_width / 2.0 <= 0.0 ||
        notch_center + notch_width / 2.0 >= fs / 2.0) {
      throw std::invalid_argument("notch: stop band must lie inside (0, Nyquist)");
    }
  }
}

SosFilter FilterSpec::design(double fs) const {
  validate(fs);
  if (kind == Kind::bandpass) {
    auto sos = butter_highpass(order, low_cut, fs);
    const auto lp = butter_lowpass(lowpass_order, high_cut, fs);
    sos.insert(sos.end(), lp.begin(), lp.end());
    return sos;
  }
  return butter_bandstop(order, notch_center - notch_width / 2.0,
                         notch_center + notch_width / 2.0, fs);
}

Recording apply_filter(const Recording& rec, const FilterSpec& spec) {
  rec.validate();
  const auto sos = spec.design(rec.sample_rate);
  const long pad = 3 * effective_impulse_length(sos);
  Recording out = rec;
  for (Eigen::Index c = 0; c < rec.n_channels(); ++c) {
    out.data.col(c) = filtfilt(sos, rec.data.col(c), pad);
  }
  return out;
}

Recording bandpass_filter(const Recording& rec, double low, double high) {
  FilterSpec spec;
  spec.kind = FilterSpec::Kind::bandpass;
  spec.low_cut = low;
  spec.high_cut = high;
  return apply_filter(rec, spec);
}

Recording notch_filter(const Recording& rec, double center) {
  FilterSpec spec;
  spec.kind = FilterSpec::Kind::notch;
  spec.notch_center = center;
  return apply_filter(rec, spec);
}

Recording rereference_average(const Recording& rec,
                              const std::vector<std::string>& reference_labels) {
  rec.validate();
  if (reference_labels.empty()) throw std::invalid_argument("rereference: no reference channels");
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(rec.n_samples());
  for (const auto& label : reference_labels) ref += rec.data.col(rec.channel_index(label));
  ref /= static_cast<double>(reference_labels.size());
  Recording out = rec;
  out.data.colwise() -= ref;
  return out;
}

Recording baseline_correct(const Recording& rec, const Recording& baseline, BaselineMode mode) {
  rec.validate();
  baseline.validate();
  if (rec.channels != baseline.channels) {
    throw std::invalid_argument("baseline: channel labels differ from the task recording");
  }
  if (rec.sample_rate != baseline.sample_rate) {
    throw std::invalid_argument("baseline: sample rate differs from the task recording");
  }
  Recording out = rec;
  const Eigen::RowVectorXd mean = baseline.data.colwise().mean();
  out.data.rowwise() -= mean;
  if (mode == BaselineMode::zscore) {
    const Eigen::RowVectorXd sd =
        ((baseline.data.rowwise() - mean).colwise().squaredNorm() /
         static_cast<double>(baseline.n_samples() - 1))
            .cwiseSqrt();
    for (Eigen::Index c = 0; c < out.n_channels(); ++c) {
      if (!(sd(c) > 0.0)) {
        throw std::invalid_argument("baseline: channel " + rec.channels[c] +
                                    " has zero baseline variance");
      }
      out.data.col(c) /= sd(c);
    }
  }
  return out;
}

}  // namespace eegconn
