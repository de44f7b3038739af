#include "doctest.h"

#include "eegconn/recording.hpp"
#include "eegconn/synthetic.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

using namespace eegconn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("eegconn_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

double lag1_autocorrelation(const Eigen::VectorXd& x) {
  const Eigen::VectorXd c = x.array() - x.mean();
  const auto n = c.size();
  return c.head(n - 1).dot(c.tail(n - 1)) / c.squaredNorm();
}

VarGroundTruth white(int n, std::uint64_t seed) {
  VarGroundTruth gt;
  gt.coefficients = {Eigen::MatrixXd::Zero(n, n)};
  gt.noise_covariance = Eigen::MatrixXd::Identity(n, n);
  gt.seed = seed;
  return gt;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

}  // namespace

TEST_CASE("recording round trip is lossless") {
  TempDir dir;
  Recording rec;
  rec.sample_rate = 256;
  rec.channels = {"Fz", "Cz", "Pz"};
  rec.data = Eigen::MatrixXd::Random(50, 3) * 1e3;
  rec.data(0, 0) = 1.0 / 3.0;
  rec.subject_id = "sub-001";
  rec.session = Session::post;
  const auto path = dir.path / "rec.csv";
  save_recording(rec, path);
  CHECK(fs::exists(sidecar_path(path)));
  const auto back = load_recording(path);
  CHECK(back.sample_rate == 256);
  CHECK(back.channels == rec.channels);
  CHECK(back.subject_id == "sub-001");
  CHECK(back.session == Session::post);
  CHECK((back.data - rec.data).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("recording parse errors carry locations") {
  TempDir dir;
  const auto path = dir.path / "bad.csv";
  write_text(dir.path / "bad.meta.json",
             R"({"sample_rate": 256, "channels": ["a", "b"], "subject_id": "s", "session": "pre"})");
  write_text(path, "a,b\n1,2\n3,oops\n");
  try {
    load_recording(path);
    FAIL("expected a FormatError");
  } catch (const FormatError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
  }
  write_text(path, "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(load_recording(path), FormatError);
  write_text(path, "a,c\n1,2\n");
  CHECK_THROWS_AS(load_recording(path), FormatError);
  CHECK_THROWS_AS(load_recording(dir.path / "missing.csv"), IoError);
}

TEST_CASE("recording invariants") {
  Recording rec;
  rec.sample_rate = 256;
  rec.channels = {"a", "a"};
  rec.data = Eigen::MatrixXd::Zero(4, 2);
  CHECK_THROWS_AS(rec.validate(), std::invalid_argument);
  rec.channels = {"a", "b"};
  CHECK_NOTHROW(rec.validate());
  CHECK(rec.channel_index("b") == 1);
  CHECK_THROWS_AS(rec.channel_index("z"), std::invalid_argument);
  rec.data(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(rec.validate(), std::invalid_argument);
  rec.data(1, 1) = 0;
  rec.sample_rate = 0;
  CHECK_THROWS_AS(rec.validate(), std::invalid_argument);
}

TEST_CASE("white noise has no lag-1 correlation and zero mean") {
  const auto rec = generate_var(white(3, 11), 10000);
  CHECK_NOTHROW(rec.validate());
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(lag1_autocorrelation(rec.data.col(c))) < 0.05);
    CHECK(std::abs(rec.data.col(c).mean()) < 5.0 / std::sqrt(10000.0));
  }
}

TEST_CASE("AR(1) autocorrelation equals its coefficient") {
  VarGroundTruth gt;
  gt.coefficients = {Eigen::MatrixXd::Constant(1, 1, 0.5)};
  gt.noise_covariance = Eigen::MatrixXd::Identity(1, 1);
  gt.seed = 4;
  const auto rec = generate_var(gt, 10000);
  CHECK(lag1_autocorrelation(rec.data.col(0)) == doctest::Approx(0.5).epsilon(0.1));
  CHECK(generate_var(gt, 500).data == generate_var(gt, 500).data);
  gt.seed = 5;
  CHECK(generate_var(gt, 500).data != rec.data.topRows(500));
}

TEST_CASE("companion spectral radius") {
  std::vector<Eigen::MatrixXd> zero{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
  CHECK(check_var_stability(zero) == 0.0);
  std::vector<Eigen::MatrixXd> scalar{Eigen::MatrixXd::Constant(1, 1, 0.5)};
  CHECK(check_var_stability(scalar) == doctest::Approx(0.5));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d.diagonal() << 0.9, 0.2;
  std::vector<Eigen::MatrixXd> diag{d};
  CHECK(check_var_stability(diag) == doctest::Approx(0.9));
  std::vector<Eigen::MatrixXd> mismatch{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3)};
  CHECK_THROWS_AS(check_var_stability(mismatch), std::invalid_argument);
}

TEST_CASE("generate_var rejects unstable or ill-formed models") {
  auto gt = white(2, 1);
  gt.coefficients[0] = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(generate_var(gt, 100), std::invalid_argument);
  gt = white(2, 1);
  gt.noise_covariance = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(generate_var(gt, 100), std::invalid_argument);
}

TEST_CASE("coupled sinusoids") {
  const auto clean = generate_coupled_sinusoids(20, std::numeric_limits<double>::infinity(), 0, 512, 256, 3);
  CHECK(clean.data.col(0) == clean.data.col(1));
  const auto a = generate_coupled_sinusoids(20, 4, 3, 1024, 256, 8);
  CHECK(a.data == generate_coupled_sinusoids(20, 4, 3, 1024, 256, 8).data);
  CHECK_THROWS_AS(generate_coupled_sinusoids(130, 1, 0, 100, 256, 1), std::invalid_argument);

  // Direct DFT over all bins: the peak is the bin nearest 20 Hz.
  const long n = a.data.rows();
  long best = 0;
  double best_power = -1;
  for (long k = 1; k < n / 2; ++k) {
    std::complex<double> s = 0;
    for (long t = 0; t < n; ++t) {
      s += a.data(t, 0) * std::polar(1.0, -2.0 * std::numbers::pi * k * t / n);
    }
    if (std::norm(s) > best_power) {
      best_power = std::norm(s);
      best = k;
    }
  }
  CHECK(best == std::lround(20.0 * n / 256.0));
}
