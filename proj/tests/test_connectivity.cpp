#include "doctest.h"

#include "eegconn/connectivity.hpp"
#include "eegconn/random.hpp"
#include "eegconn/spectral.hpp"
#include "eegconn/synthetic.hpp"

#include <algorithm>
#include <cmath>

using namespace eegconn;

namespace {

Recording white_noise(int channels, long n, std::uint64_t seed) {
  Rng rng(seed);
  Recording rec;
  rec.sample_rate = 256;
  for (int c = 0; c < channels; ++c) rec.channels.push_back("c" + std::to_string(c + 1));
  rec.data.resize(n, channels);
  for (long t = 0; t < n; ++t)
    for (int c = 0; c < channels; ++c) rec.data(t, c) = rng.normal();
  return rec;
}

}  // namespace

TEST_CASE("metric names round trip") {
  for (const auto m : {Metric::msc, Metric::wc, Metric::pdc}) CHECK(metric_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(metric_from_string("plv"), std::invalid_argument);
}

TEST_CASE("msc is one on the diagonal and symmetric") {
  const auto rec = white_noise(4, 256 * 30, 1);
  const auto m = msc_matrix(welch_csd(rec, 256), kBetaBand);
  CHECK(m.metric == Metric::msc);
  CHECK((m.values.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-9);
  CHECK((m.values - m.values.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(m.values.minCoeff() >= 0.0);
  CHECK(m.values.maxCoeff() <= 1.0 + 1e-9);
  CHECK(m.channel_labels == rec.channels);
}

TEST_CASE("independent noise has low msc") {
  // 120 half-overlapping 256-sample segments.
  const auto rec = white_noise(2, 128 * 121, 2);
  const auto csd = welch_csd(rec, 256);
  CHECK(csd.n_segments == 120);
  CHECK(msc_matrix(csd, kBetaBand).values(0, 1) < 0.1);
}

TEST_CASE("coupled sinusoids have high msc near their frequency") {
  const auto rec = generate_coupled_sinusoids(20, 10.0, 5, 256 * 60, 256, 3);
  const auto m = msc_matrix(welch_csd(rec, 128), Band{18, 22});
  CHECK(m.values(0, 1) > 0.9);
}

TEST_CASE("msc errors") {
  auto rec = white_noise(2, 256 * 10, 4);
  const auto csd = welch_csd(rec, 256);
  CHECK_THROWS_AS(msc_matrix(csd, Band{20.2, 20.4}), std::invalid_argument);
  CHECK_THROWS_AS(msc_matrix(csd, Band{30, 20}), std::invalid_argument);
  rec.data.col(1).setZero();
  CHECK_THROWS_AS(msc_matrix(welch_csd(rec, 256), kBetaBand), std::invalid_argument);
}

TEST_CASE("band frequencies are inclusive") {
  const auto f = band_frequencies(kBetaBand, 1.0);
  CHECK(f.size() == 17);
  CHECK(f.front() == 13.0);
  CHECK(f.back() == 29.0);
  const auto coarse = band_frequencies(Band{13, 14}, 0.3);
  CHECK(coarse.back() <= 14.0);
  CHECK(14.0 - coarse.back() < 0.3);
}

TEST_CASE("wavelet coherence bounds and identity") {
  const auto freqs = band_frequencies(kBetaBand, 2.0);
  const auto rec = white_noise(2, 2048, 5);
  const auto a = morlet_cwt(rec.data.col(0), 256, freqs);
  const auto b = morlet_cwt(rec.data.col(1), 256, freqs);
  const auto ab = wavelet_coherence(a, b);
  CHECK(ab.values.minCoeff() >= 0.0);
  CHECK(ab.values.maxCoeff() <= 1.0 + 1e-9);
  const auto aa = wavelet_coherence(a, a);
  for (std::size_t r = 0; r < freqs.size(); ++r) {
    const auto [lo, hi] = aa.interior[r];
    REQUIRE(hi > lo);
    CHECK((aa.values.row(r).segment(lo, hi - lo).array() - 1.0).abs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("independent noise has low wavelet coherence") {
  const auto rec = white_noise(2, 256 * 60, 6);
  const auto freqs = band_frequencies(kBetaBand, 4.0);
  const auto tfc = wavelet_coherence(morlet_cwt(rec.data.col(0), 256, freqs),
                                     morlet_cwt(rec.data.col(1), 256, freqs));
  std::vector<double> interior;
  for (std::size_t r = 0; r < freqs.size(); ++r) {
    const auto [lo, hi] = tfc.interior[r];
    for (long c = lo; c < hi; ++c) interior.push_back(tfc.values(r, c));
  }
  std::nth_element(interior.begin(), interior.begin() + interior.size() / 2, interior.end());
  CHECK(interior[interior.size() / 2] < 0.35);
}

TEST_CASE("wavelet coherence errors") {
  const auto rec = white_noise(2, 1024, 7);
  const auto a = morlet_cwt(rec.data.col(0), 256, {15, 20});
  const auto b = morlet_cwt(rec.data.col(1), 256, {15, 21});
  CHECK_THROWS_AS(wavelet_coherence(a, b), std::invalid_argument);
  WaveletSmoothing tiny;
  tiny.cycles = 0.01;
  CHECK_THROWS_AS(wavelet_coherence(a, a, tiny), std::invalid_argument);
}

TEST_CASE("wc matrix on coupled sinusoids") {
  const auto rec = generate_coupled_sinusoids(20, 4.0, 3, 256 * 20, 256, 8);
  const auto m = wc_matrix(rec, kBetaBand);
  CHECK(m.metric == Metric::wc);
  CHECK(m.values(0, 1) > 0.8);
  CHECK(m.values(0, 1) == doctest::Approx(m.values(1, 0)));
  CHECK(m.values(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
}
