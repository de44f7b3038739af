#include "eegconn/cli/cohort.hpp"

#include "eegconn/parallel.hpp"
#include "eegconn/random.hpp"
#include "eegconn/serialize.hpp"

#include <cstdio>
#include <set>
#include <stdexcept>

namespace eegconn::cli {

using nlohmann::json;

std::filesystem::path recording_file(const std::filesystem::path& dir, const std::string& id,
                                     Session session) {
  return dir / (id + "_" + std::string(to_string(session)) + ".csv");
}

double delta_accuracy(const SubjectEntry& s, int trials) {
  return percentage_accuracy(s.post_correct, trials) - percentage_accuracy(s.pre_correct, trials);
}

Manifest load_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path, 0, 0, e.what());
  }
  Manifest m;
  try {
    m.trials = j.at("trials").get<int>();
    if (m.trials < 1) throw std::invalid_argument("trials must be positive");
    std::set<std::string> ids;
    for (const auto& s : j.at("subjects")) {
      SubjectEntry e;
      e.id = s.at("id").get<std::string>();
      e.pre_correct = s.at("pre_correct").get<int>();
      e.post_correct = s.at("post_correct").get<int>();
      if (s.contains("class")) e.true_class = s.at("class").get<int>();
      if (!ids.insert(e.id).second) throw std::invalid_argument("duplicate subject " + e.id);
      if (e.pre_correct < 0 || e.pre_correct > m.trials || e.post_correct < 0 ||
          e.post_correct > m.trials) {
        throw std::invalid_argument("subject " + e.id + ": counts must lie in [0, trials]");
      }
      m.subjects.push_back(std::move(e));
    }
    if (j.contains("ground_truth")) m.ground_truth = j.at("ground_truth");
  } catch (const json::exception& e) {
    throw FormatError(path, 0, 0, e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(path, 0, 0, e.what());
  }
  return m;
}

void save_manifest(const Manifest& m, const std::filesystem::path& dir) {
  json j;
  j["trials"] = m.trials;
  json subjects = json::array();
  for (const auto& s : m.subjects) {
    json e = {{"id", s.id}, {"pre_correct", s.pre_correct}, {"post_correct", s.post_correct}};
    if (s.true_class >= 0) e["class"] = s.true_class;
    subjects.push_back(e);
  }
  j["subjects"] = subjects;
  if (!m.ground_truth.is_null()) j["ground_truth"] = m.ground_truth;
  write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

namespace {

constexpr int kClasses = 3;
constexpr double kDiagLag1 = 0.4;
constexpr double kDiagLag2 = -0.2;
constexpr double kBaseCoupling = 0.1;
constexpr double kMaxRadius = 0.98;

std::pair<int, int> random_edge(int channels, Rng& rng) {
  const int target = static_cast<int>(rng.below(channels));
  int source = static_cast<int>(rng.below(channels - 1));
  if (source >= target) ++source;
  return {target, source};
}

}  // namespace

CohortDesign design_cohort(const SyntheticSpec& spec, std::uint64_t seed) {
  const int n = spec.channels;
  Rng rng(mix_seed(seed, 0x636f686f7274ULL));
  CohortDesign d;
  for (int r = 0; r < spec.var_order; ++r) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    if (r == 0) a.diagonal().setConstant(kDiagLag1);
    if (r == 1) a.diagonal().setConstant(kDiagLag2);
    d.base.push_back(a);
  }
  for (int e = 0; e < n; ++e) {
    const auto [t, s] = random_edge(n, rng);
    d.base[0](t, s) += (rng.uniform() < 0.5 ? -1.0 : 1.0) * kBaseCoupling;
  }
  for (int c = 0; c < kClasses; ++c) {
    std::set<std::pair<int, int>> used;
    std::vector<TemplateEdge> edges;
    while (static_cast<int>(edges.size()) < spec.template_edges) {
      const auto edge = random_edge(n, rng);
      if (!used.insert(edge).second) continue;
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      edges.push_back({edge.first, edge.second, sign * spec.template_strength});
    }
    d.templates.push_back(std::move(edges));
  }
  return d;
}

std::pair<VarGroundTruth, VarGroundTruth> subject_models(const SyntheticSpec& spec,
                                                         const CohortDesign& design, int subject,
                                                         int cls, std::uint64_t seed) {
  const int n = spec.channels;
  for (int attempt = 0; attempt < 100; ++attempt) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(subject), static_cast<std::uint64_t>(attempt)));
    std::vector<Eigen::MatrixXd> shared = design.base;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) shared[0](i, j) += spec.jitter * rng.normal();
    std::vector<Eigen::MatrixXd> pre = shared, post = shared;
    for (auto* session : {&pre, &post}) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) (*session)[0](i, j) += 0.5 * spec.jitter * rng.normal();
    }
    for (const auto& e : design.templates[cls]) post[0](e.target, e.source) += e.coefficient;
    for (int e = 0; e < spec.nuisance_edges; ++e) {
      const auto [t, s] = random_edge(n, rng);
      auto& target = rng.uniform() < 0.5 ? pre : post;
      target[0](t, s) += (rng.uniform() < 0.5 ? -1.0 : 1.0) * spec.nuisance_strength;
    }
    if (check_var_stability(pre) >= kMaxRadius || check_var_stability(post) >= kMaxRadius) continue;
    VarGroundTruth a{pre, Eigen::MatrixXd::Identity(n, n), mix_seed(seed, subject, 0x707265ULL)};
    VarGroundTruth b{post, Eigen::MatrixXd::Identity(n, n), mix_seed(seed, subject, 0x706f7374ULL)};
    return {a, b};
  }
  throw std::invalid_argument("synthetic: could not draw a stable model for subject " +
                              std::to_string(subject) + "; reduce template or nuisance strength");
}

std::pair<int, int> draw_scores(int cls, int trials, const ClassBinning& binning, Rng& rng) {
  std::vector<int> options;
  for (int d = 0; d <= trials; ++d) {
    const auto r = bin_label(percentage_accuracy(d, trials), binning);
    if (!r.clamped && r.label == cls) options.push_back(d);
  }
  if (options.empty()) {
    throw std::invalid_argument("synthetic: no score change of " + std::to_string(trials) +
                                " trials falls in class " + std::to_string(cls));
  }
  const int d = options[rng.below(options.size())];
  const int pre = static_cast<int>(rng.below(static_cast<std::uint64_t>(trials - d + 1)));
  return {pre, pre + d};
}

Manifest write_synthetic_cohort(const SyntheticSpec& spec, const ClassBinning& binning,
                                std::uint64_t seed, const std::filesystem::path& dir, unsigned jobs) {
  const CohortDesign design = design_cohort(spec, seed);
  const int total = kClasses * spec.subjects_per_class;
  const long n_samples = static_cast<long>(std::lround(spec.duration_s * spec.sample_rate));

  Manifest m;
  m.trials = spec.trials;
  Rng score_rng(mix_seed(seed, 0x73636f7265ULL));
  for (int s = 0; s < total; ++s) {
    char id[32];
    std::snprintf(id, sizeof id, "sub-%03d", s + 1);
    SubjectEntry e;
    e.id = id;
    e.true_class = s % kClasses;
    std::tie(e.pre_correct, e.post_correct) = draw_scores(e.true_class, spec.trials, binning, score_rng);
    m.subjects.push_back(e);
  }

  std::filesystem::create_directories(dir);
  parallel_for(static_cast<std::size_t>(total), jobs, [&](std::size_t s) {
    const auto& e = m.subjects[s];
    const auto [pre, post] = subject_models(spec, design, static_cast<int>(s), e.true_class, seed);
    for (const auto& [gt, session] : {std::pair{pre, Session::pre}, std::pair{post, Session::post}}) {
      Recording rec = generate_var(gt, n_samples, spec.sample_rate);
      rec.subject_id = e.id;
      rec.session = session;
      save_recording(rec, recording_file(dir, e.id, session));
    }
  });

  json templates = json::array();
  for (const auto& edges : design.templates) {
    json t = json::array();
    for (const auto& e : edges) {
      t.push_back({{"source", "ch" + std::to_string(e.source + 1)},
                   {"target", "ch" + std::to_string(e.target + 1)},
                   {"lag", 1},
                   {"coefficient", e.coefficient}});
    }
    templates.push_back(t);
  }
  m.ground_truth = {{"class_names", binning.labels}, {"templates", templates}};
  save_manifest(m, dir);
  return m;
}

}  // namespace eegconn::cli
