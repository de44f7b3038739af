#include "eegconn/cli/config.hpp"

#include "eegconn/serialize.hpp"

#include <cstdio>
#include <set>

namespace eegconn::cli {

using nlohmann::json;

ml::HyperparameterGrid ClassifySpec::grid_for(ml::Family f) const {
  const auto it = grids.find(f);
  return it != grids.end() ? it->second : ml::HyperparameterGrid::make(f, grid);
}

std::filesystem::path RunConfig::run_dir() const {
  return out / (run_id.empty() ? content_hash(*this) : run_id);
}

bool has_errors(const std::vector<Issue>& issues) {
  for (const auto& i : issues) {
    if (!i.warning) return true;
  }
  return false;
}

namespace {

// Reads fields of one JSON object, remembering which keys were consumed so
// leftovers can be reported.
class Section {
 public:
  Section(const json* node, std::string pointer, std::vector<Issue>& issues)
      : node_(node), pointer_(std::move(pointer)), issues_(issues) {
    if (node_ && !node_->is_object()) {
      issues_.push_back({pointer_, "must be an object"});
      node_ = nullptr;
    }
  }

  ~Section() {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!seen_.count(key)) issues_.push_back({pointer_ + "/" + key, "unknown field"});
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    if (!node_) return nullptr;
    const auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return pointer_ + "/" + key; }

  template <typename T>
  void read(const std::string& key, T& target) {
    const json* v = child(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw std::invalid_argument("must be a boolean");
      } else if constexpr (std::is_arithmetic_v<T>) {
        if (!v->is_number()) throw std::invalid_argument("must be a number");
        if constexpr (std::is_integral_v<T>) {
          const double d = v->get<double>();
          if (d != static_cast<double>(static_cast<long long>(d))) {
            throw std::invalid_argument("must be an integer");
          }
          if (std::is_unsigned_v<T> && d < 0) throw std::invalid_argument("must be non-negative");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw std::invalid_argument("must be a string");
      }
      target = v->get<T>();
    } catch (const std::exception& e) {
      issues_.push_back({path(key), e.what()});
    }
  }

  // Reads a string and maps it through `convert`, reporting its exception.
  template <typename T, typename Fn>
  void read_enum(const std::string& key, T& target, Fn convert) {
    std::string s;
    const std::size_t before = issues_.size();
    read(key, s);
    if (issues_.size() != before || !child(key)) return;
    try {
      target = convert(s);
    } catch (const std::exception& e) {
      issues_.push_back({path(key), e.what()});
    }
  }

  template <typename T, typename Fn>
  void read_list(const std::string& key, std::vector<T>& target, Fn convert) {
    const json* v = child(key);
    if (!v) return;
    if (!v->is_array()) {
      issues_.push_back({path(key), "must be an array"});
      return;
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto& item = (*v)[i];
      try {
        if (!item.is_string()) throw std::invalid_argument("must be a string");
        const T value = convert(item.get<std::string>());
        if (std::find(out.begin(), out.end(), value) != out.end()) {
          throw std::invalid_argument("duplicate entry");
        }
        out.push_back(value);
      } catch (const std::exception& e) {
        issues_.push_back({path(key) + "/" + std::to_string(i), e.what()});
      }
    }
    target = std::move(out);
  }

  void read_band(const std::string& key, Band& band) {
    const json* v = child(key);
    if (!v) return;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
      issues_.push_back({path(key), "must be [low_hz, high_hz]"});
      return;
    }
    band = Band{(*v)[0].get<double>(), (*v)[1].get<double>()};
  }

 private:
  const json* node_;
  std::string pointer_;
  std::vector<Issue>& issues_;
  std::set<std::string> seen_;
};

DeltaMode delta_from_string(const std::string& s) {
  if (s == "absolute") return DeltaMode::absolute;
  if (s == "signed") return DeltaMode::signed_difference;
  throw std::invalid_argument("must be \"absolute\" or \"signed\"");
}

}  // namespace

RunConfig parse_config(const json& doc, std::vector<Issue>& issues) {
  RunConfig c;
  Section root(&doc, "", issues);
  root.read("seed", c.seed);
  {
    std::string out = c.out.string();
    root.read("out", out);
    c.out = out;
  }
  root.read("jobs", c.jobs);
  root.read("run_id", c.run_id);
  if (const json* r = root.child("recordings")) {
    if (r->is_string()) c.recordings = r->get<std::string>();
    else issues.push_back({"/recordings", "must be a path string"});
  }
  {
    Section s(root.child("synthetic"), "/synthetic", issues);
    auto& t = c.synthetic;
    s.read("subjects_per_class", t.subjects_per_class);
    s.read("channels", t.channels);
    s.read("duration_s", t.duration_s);
    s.read("sample_rate", t.sample_rate);
    s.read("var_order", t.var_order);
    s.read("template_strength", t.template_strength);
    s.read("template_edges", t.template_edges);
    s.read("nuisance_edges", t.nuisance_edges);
    s.read("nuisance_strength", t.nuisance_strength);
    s.read("jitter", t.jitter);
    s.read("trials", t.trials);
  }
  {
    Section s(root.child("preprocess"), "/preprocess", issues);
    auto& p = c.preprocess;
    s.read("enabled", p.enabled);
    s.read("low_cut", p.low_cut);
    s.read("high_cut", p.high_cut);
    s.read("notch", p.notch);
    s.read("notch_center", p.notch_center);
    s.read_list("reference_channels", p.reference_channels, [](const std::string& v) { return v; });
    s.read("drop_reference", p.drop_reference);
    s.read("baseline", p.baseline);
  }
  {
    Section s(root.child("connectivity"), "/connectivity", issues);
    auto& t = c.connectivity;
    s.read_list("metrics", t.metrics, [](const std::string& v) { return metric_from_string(v); });
    s.read_band("band", t.band);
    s.read("welch_window", t.welch_window);
    s.read("welch_overlap", t.welch_overlap);
    s.read("wc_cycles", t.wc_cycles);
    s.read("wc_freq_step", t.wc_freq_step);
    s.read("omega0", t.omega0);
    s.read("pdc_order", t.pdc_order);
    s.read("pdc_max_order", t.pdc_max_order);
  }
  {
    Section s(root.child("features"), "/features", issues);
    auto& f = c.features;
    s.read_enum("delta", f.delta, delta_from_string);
    std::string binning = f.recompute_binning ? "recompute" : "fixed";
    s.read("binning", binning);
    if (binning == "recompute") f.recompute_binning = true;
    else if (binning == "fixed") f.recompute_binning = false;
    else issues.push_back({"/features/binning", "must be \"fixed\" or \"recompute\""});
    s.read("mu", f.binning.mu);
    s.read("sigma", f.binning.sigma);
  }
  {
    Section s(root.child("classify"), "/classify", issues);
    auto& k = c.classify;
    s.read_list("selectors", k.selectors, [](const std::string& v) { return selector_from_string(v); });
    s.read_list("families", k.families, [](const std::string& v) { return ml::family_from_string(v); });
    s.read("k", k.k);
    s.read_enum("grid", k.grid, [](const std::string& v) { return ml::grid_density_from_string(v); });
    s.read("folds", k.folds);
    s.read("repeats", k.repeats);
    s.read_enum("ffs_scorer", k.ffs_scorer, [](const std::string& v) { return ffs_scorer_from_string(v); });
    s.read("ffs_folds", k.ffs_folds);
    if (const json* g = s.child("grids")) {
      if (!g->is_object()) {
        issues.push_back({"/classify/grids", "must be an object"});
      } else {
        for (const auto& [fam, axes] : g->items()) {
          const std::string where = "/classify/grids/" + fam;
          try {
            ml::HyperparameterGrid grid;
            grid.family = ml::family_from_string(fam);
            if (!axes.is_object()) throw std::invalid_argument("must be an object of axes");
            for (const auto& [name, values] : axes.items()) {
              if (!values.is_array()) throw std::invalid_argument("axis " + name + " must be an array");
              std::vector<ml::ParamValue> vs;
              for (const auto& v : values) {
                if (v.is_number()) vs.emplace_back(v.get<double>());
                else if (v.is_string()) vs.emplace_back(v.get<std::string>());
                else throw std::invalid_argument("axis " + name + " holds a non-scalar");
              }
              grid.axes.emplace_back(name, std::move(vs));
            }
            k.grids[grid.family] = std::move(grid);
          } catch (const std::exception& e) {
            issues.push_back({where, e.what()});
          }
        }
      }
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, std::vector<Issue>& issues) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    issues.push_back({"", "cannot parse " + path.string() + ": " + e.what()});
    return RunConfig{};
  } catch (const IoError& e) {
    issues.push_back({"", e.what()});
    return RunConfig{};
  }
  return parse_config(doc, issues);
}

json canonical_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["recordings"] = c.recordings ? json(c.recordings->string()) : json(nullptr);
  const auto& s = c.synthetic;
  j["synthetic"] = {{"subjects_per_class", s.subjects_per_class}, {"channels", s.channels},
                    {"duration_s", s.duration_s}, {"sample_rate", s.sample_rate},
                    {"var_order", s.var_order}, {"template_strength", s.template_strength},
                    {"template_edges", s.template_edges}, {"nuisance_edges", s.nuisance_edges},
                    {"nuisance_strength", s.nuisance_strength}, {"jitter", s.jitter},
                    {"trials", s.trials}};
  const auto& p = c.preprocess;
  j["preprocess"] = {{"enabled", p.enabled}, {"low_cut", p.low_cut}, {"high_cut", p.high_cut},
                     {"notch", p.notch}, {"notch_center", p.notch_center},
                     {"reference_channels", p.reference_channels},
                     {"drop_reference", p.drop_reference}, {"baseline", p.baseline}};
  const auto& t = c.connectivity;
  json metrics = json::array();
  for (const auto m : t.metrics) metrics.push_back(std::string(to_string(m)));
  j["connectivity"] = {{"metrics", metrics}, {"band", {t.band.low, t.band.high}},
                       {"welch_window", t.welch_window}, {"welch_overlap", t.welch_overlap},
                       {"wc_cycles", t.wc_cycles}, {"wc_freq_step", t.wc_freq_step},
                       {"omega0", t.omega0}, {"pdc_order", t.pdc_order},
                       {"pdc_max_order", t.pdc_max_order}};
  const auto& f = c.features;
  j["features"] = {{"delta", f.delta == DeltaMode::absolute ? "absolute" : "signed"},
                   {"binning", f.recompute_binning ? "recompute" : "fixed"},
                   {"mu", f.binning.mu}, {"sigma", f.binning.sigma}};
  const auto& k = c.classify;
  json selectors = json::array(), families = json::array(), grids = json::object();
  for (const auto s : k.selectors) selectors.push_back(std::string(to_string(s)));
  for (const auto fam : k.families) families.push_back(std::string(ml::to_string(fam)));
  for (const auto& [fam, grid] : k.grids) {
    json axes = json::array();
    for (const auto& [name, values] : grid.axes) {
      json vs = json::array();
      for (const auto& v : values) {
        if (const auto* d = std::get_if<double>(&v)) vs.push_back(*d); else vs.push_back(std::get<std::string>(v));
      }
      axes.push_back({name, vs});
    }
    grids[std::string(ml::to_string(fam))] = axes;
  }
  j["classify"] = {{"selectors", selectors}, {"families", families}, {"k", k.k},
                   {"grid", k.grid == ml::GridDensity::coarse ? "coarse" : "full"},
                   {"folds", k.folds}, {"repeats", k.repeats},
                   {"ffs_scorer", std::string(to_string(k.ffs_scorer))},
                   {"ffs_folds", k.ffs_folds}, {"grids", grids}};
  return j;
}

std::string content_hash(const RunConfig& config) {
  const std::string text = canonical_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<Issue> validate_config(const RunConfig& c, bool check_paths) {
  std::vector<Issue> issues;
  auto error = [&](std::string field, std::string msg) { issues.push_back({std::move(field), std::move(msg)}); };
  auto warn = [&](std::string field, std::string msg) {
    issues.push_back({std::move(field), std::move(msg), true});
  };

  if (c.recordings) {
    if (check_paths && !std::filesystem::is_directory(*c.recordings)) {
      error("/recordings", "directory " + c.recordings->string() + " does not exist");
    } else if (check_paths && !std::filesystem::exists(*c.recordings / "manifest.json")) {
      error("/recordings", "missing manifest.json in " + c.recordings->string());
    }
  } else {
    const auto& s = c.synthetic;
    if (s.subjects_per_class < 2) error("/synthetic/subjects_per_class", "must be at least 2");
    if (s.channels < 2) error("/synthetic/channels", "must be at least 2");
    if (!(s.sample_rate > 0)) error("/synthetic/sample_rate", "must be positive");
    if (s.var_order < 1) error("/synthetic/var_order", "must be at least 1");
    if (!(s.duration_s > 0)) error("/synthetic/duration_s", "must be positive");
    if (s.template_edges < 1 || s.template_edges > s.channels * (s.channels - 1)) {
      error("/synthetic/template_edges", "must lie in [1, channels*(channels-1)]");
    }
    if (s.nuisance_edges < 0) error("/synthetic/nuisance_edges", "must be non-negative");
    if (!(s.jitter >= 0)) error("/synthetic/jitter", "must be non-negative");
    if (s.trials < 1) error("/synthetic/trials", "must be positive");
  }

  const auto& p = c.preprocess;
  if (p.enabled) {
    if (!(p.low_cut > 0 && p.low_cut < p.high_cut)) error("/preprocess/low_cut", "require 0 < low_cut < high_cut");
    if (p.baseline != "none" && p.baseline != "mean" && p.baseline != "zscore") {
      error("/preprocess/baseline", "must be \"none\", \"mean\" or \"zscore\"");
    }
    if (!c.recordings) {
      for (std::size_t i = 0; i < p.reference_channels.size(); ++i) {
        const auto& label = p.reference_channels[i];
        bool known = false;
        for (int ch = 1; ch <= c.synthetic.channels; ++ch) known = known || label == "ch" + std::to_string(ch);
        if (!known) error("/preprocess/reference_channels/" + std::to_string(i), "no synthetic channel \"" + label + "\"");
      }
      if (p.drop_reference && c.synthetic.channels - static_cast<int>(p.reference_channels.size()) < 2) {
        error("/preprocess/reference_channels", "dropping the references must leave at least 2 channels");
      }
    }
  }

  const auto& t = c.connectivity;
  if (t.metrics.empty()) error("/connectivity/metrics", "at least one metric must be enabled");
  if (!(t.band.low > 0 && t.band.low < t.band.high)) error("/connectivity/band", "require 0 < low < high");
  if (!c.recordings && !(t.band.high < c.synthetic.sample_rate / 2)) {
    error("/connectivity/band", "upper edge must be below the Nyquist frequency");
  }
  if (t.welch_window < 8) error("/connectivity/welch_window", "must be at least 8 samples");
  if (!(t.welch_overlap >= 0 && t.welch_overlap < 1)) error("/connectivity/welch_overlap", "must lie in [0, 1)");
  if (!(t.wc_cycles > 0)) error("/connectivity/wc_cycles", "must be positive");
  if (!(t.wc_freq_step > 0)) error("/connectivity/wc_freq_step", "must be positive");
  if (!(t.omega0 >= 5)) error("/connectivity/omega0", "must be at least 5");
  if (t.pdc_order < 0) error("/connectivity/pdc_order", "must be non-negative");
  if (t.pdc_max_order < 1) error("/connectivity/pdc_max_order", "must be at least 1");

  try {
    if (!c.features.recompute_binning) c.features.binning.validate();
  } catch (const std::exception& e) {
    error("/features/sigma", e.what());
  }

  const auto& k = c.classify;
  if (k.selectors.empty()) error("/classify/selectors", "at least one selector must be enabled");
  if (k.families.empty()) error("/classify/families", "at least one model family must be enabled");
  if (k.k < 1) error("/classify/k", "must be at least 1");
  if (k.folds < 2) error("/classify/folds", "must be at least 2");
  if (k.repeats < 1) error("/classify/repeats", "must be at least 1");
  if (k.ffs_folds < 2) error("/classify/ffs_folds", "must be at least 2");
  for (const auto fam : k.families) {
    const std::string where = "/classify/grids/" + std::string(ml::to_string(fam));
    try {
      const auto grid = k.grid_for(fam);
      grid.validate();
      const auto n = grid.cardinality();
      if (n > 1000) {
        warn(where, "grid has " + std::to_string(n) + " points (" +
                        std::to_string(n * static_cast<std::uint64_t>(k.folds * k.repeats)) +
                        " model fits per cell)");
      }
      if (n > ml::kMaxGridPoints) {
        error(where, "grid exceeds the per-cell limit of " + std::to_string(ml::kMaxGridPoints) +
                         " points");
      }
    } catch (const std::exception& e) {
      error(where, e.what());
    }
  }
  return issues;
}

}  // namespace eegconn::cli
