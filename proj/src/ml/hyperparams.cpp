#include "eegconn/ml/hyperparams.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace eegconn::ml {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::svm: return "svm";
    case Family::dt: return "dt";
    case Family::rf: return "rf";
    case Family::mlp: return "mlp";
  }
  return "?";
}

Family family_from_string(std::string_view s) {
  if (s == "svm") return Family::svm;
  if (s == "dt") return Family::dt;
  if (s == "rf") return Family::rf;
  if (s == "mlp") return Family::mlp;
  throw std::invalid_argument("unknown model family \"" + std::string(s) + "\"");
}

std::string format_value(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, std::get<double>(v));
  return std::string(buf, res.ptr);
}

std::string format_params(const Hyperparameters& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += ", ";
    out += k + "=" + format_value(v);
  }
  return out;
}

double get_number(const Hyperparameters& p, const std::string& name) {
  const auto it = p.find(name);
  if (it == p.end()) throw std::invalid_argument("hyperparameter \"" + name + "\" is missing");
  const auto* d = std::get_if<double>(&it->second);
  if (!d) throw std::invalid_argument("hyperparameter \"" + name + "\" must be numeric");
  return *d;
}

const std::string& get_string(const Hyperparameters& p, const std::string& name) {
  const auto it = p.find(name);
  if (it == p.end()) throw std::invalid_argument("hyperparameter \"" + name + "\" is missing");
  const auto* s = std::get_if<std::string>(&it->second);
  if (!s) throw std::invalid_argument("hyperparameter \"" + name + "\" must be a string");
  return *s;
}

Hyperparameters default_hyperparameters(Family f) {
  switch (f) {
    case Family::svm:
      return {{"kernel", std::string("linear")}, {"gamma", 0.001}, {"C", 1.0}};
    case Family::dt:
      return {{"min_samples_split", 4.0}, {"min_samples_leaf", 8.0}, {"max_depth", 2.0}};
    case Family::rf:
      return {{"n_estimators", 40.0},
              {"min_samples_split", 5.0},
              {"min_samples_leaf", 4.0},
              {"max_depth", 9.0}};
    case Family::mlp:
      return {{"solver", std::string("adam")},
              {"hidden_layers", 1.0},
              {"hidden_units", 50.0},
              {"alpha", 0.1},
              {"activation", std::string("relu")}};
  }
  return {};
}

namespace {

const std::set<std::string>& allowed_names(Family f) {
  static const std::set<std::string> svm{"kernel", "C", "gamma", "degree"};
  static const std::set<std::string> dt{"max_depth", "min_samples_split", "min_samples_leaf"};
  static const std::set<std::string> rf{"max_depth", "min_samples_split", "min_samples_leaf",
                                        "n_estimators", "max_features"};
  static const std::set<std::string> mlp{"hidden_layers", "hidden_units", "activation",
                                         "solver", "alpha", "learning_rate", "max_epochs"};
  switch (f) {
    case Family::svm: return svm;
    case Family::dt: return dt;
    case Family::rf: return rf;
    case Family::mlp: return mlp;
  }
  return svm;
}

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

void require_int_at_least(const Hyperparameters& p, const std::string& name, double lo) {
  const double v = get_number(p, name);
  if (!is_integer(v) || v < lo) {
    throw std::invalid_argument("hyperparameter \"" + name + "\" must be an integer >= " +
                                format_value(lo));
  }
}

void require_positive(const Hyperparameters& p, const std::string& name) {
  const double v = get_number(p, name);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("hyperparameter \"" + name + "\" must be positive");
  }
}

void require_choice(const Hyperparameters& p, const std::string& name,
                    std::initializer_list<std::string_view> choices) {
  const auto& v = get_string(p, name);
  if (std::find(choices.begin(), choices.end(), v) == choices.end()) {
    throw std::invalid_argument("hyperparameter \"" + name + "\" has invalid value \"" + v + "\"");
  }
}

}  // namespace

void validate_hyperparameters(Family f, const Hyperparameters& p) {
  const auto& names = allowed_names(f);
  for (const auto& [k, v] : p) {
    if (!names.count(k)) {
      throw std::invalid_argument("unknown hyperparameter \"" + k + "\" for " +
                                  std::string(to_string(f)));
    }
  }
  switch (f) {
    case Family::svm:
      require_choice(p, "kernel", {"linear", "polynomial", "poly", "rbf"});
      require_positive(p, "C");
      require_positive(p, "gamma");
      if (p.count("degree")) require_int_at_least(p, "degree", 1);
      break;
    case Family::rf:
      require_int_at_least(p, "n_estimators", 1);
      if (p.count("max_features")) require_int_at_least(p, "max_features", 1);
      [[fallthrough]];
    case Family::dt:
      require_int_at_least(p, "max_depth", 1);
      require_int_at_least(p, "min_samples_split", 2);
      require_int_at_least(p, "min_samples_leaf", 1);
      break;
    case Family::mlp:
      require_int_at_least(p, "hidden_layers", 1);
      if (get_number(p, "hidden_layers") > 3) {
        throw std::invalid_argument("hyperparameter \"hidden_layers\" must be at most 3");
      }
      require_int_at_least(p, "hidden_units", 1);
      require_choice(p, "activation", {"logistic", "tanh", "relu"});
      require_choice(p, "solver", {"adam", "sgd"});
      if (!(get_number(p, "alpha") >= 0.0)) {
        throw std::invalid_argument("hyperparameter \"alpha\" must be >= 0");
      }
      if (p.count("learning_rate")) require_positive(p, "learning_rate");
      if (p.count("max_epochs")) require_int_at_least(p, "max_epochs", 1);
      break;
  }
}

void validate_search_range(Family f, const std::string& name, const ParamValue& v) {
  struct Range {
    double lo, hi;
  };
  static const std::map<std::string, Range> svm{{"C", {0.01, 100}}, {"gamma", {0.001, 1}}};
  static const std::map<std::string, Range> tree{
      {"max_depth", {2, 10}}, {"min_samples_split", {2, 10}}, {"min_samples_leaf", {1, 10}},
      {"n_estimators", {10, 100}}};
  static const std::map<std::string, Range> mlp{
      {"hidden_layers", {1, 3}}, {"hidden_units", {10, 1000}}, {"alpha", {0.0001, 0.1}}};
  const auto* ranges = f == Family::svm ? &svm : (f == Family::mlp ? &mlp : &tree);
  const auto it = ranges->find(name);
  if (it == ranges->end()) return;
  const auto* d = std::get_if<double>(&v);
  if (!d) throw std::invalid_argument("grid axis \"" + name + "\" must be numeric");
  const double tol = 1e-9 * std::max(1.0, std::abs(it->second.hi));
  if (*d < it->second.lo - tol || *d > it->second.hi + tol) {
    throw std::invalid_argument("grid axis \"" + name + "\" value " + format_value(v) +
                                " outside the search range [" + format_value(it->second.lo) +
                                ", " + format_value(it->second.hi) + "]");
  }
}

GridDensity grid_density_from_string(std::string_view s) {
  if (s == "coarse") return GridDensity::coarse;
  if (s == "full") return GridDensity::full;
  throw std::invalid_argument("grid density must be \"coarse\" or \"full\"");
}

void HyperparameterGrid::validate() const {
  if (axes.empty()) throw std::invalid_argument("grid: no axes");
  std::set<std::string> seen;
  for (const auto& [name, values] : axes) {
    if (!seen.insert(name).second) throw std::invalid_argument("grid: duplicate axis " + name);
    if (values.empty()) throw std::invalid_argument("grid: axis \"" + name + "\" is empty");
    for (const auto& v : values) validate_search_range(family, name, v);
  }
  validate_hyperparameters(family, point(0));
}

std::uint64_t HyperparameterGrid::cardinality() const {
  if (axes.empty()) return 0;
  std::uint64_t total = 1;
  for (const auto& [name, values] : axes) {
    const std::uint64_t len = values.size();
    if (len == 0) return 0;
    if (total > std::numeric_limits<std::uint64_t>::max() / len) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total *= len;
  }
  return total;
}

Hyperparameters HyperparameterGrid::point(std::uint64_t index) const {
  Hyperparameters p;
  for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
    const auto len = it->second.size();
    p[it->first] = it->second[index % len];
    index /= len;
  }
  return p;
}

namespace {

std::vector<ParamValue> numbers(std::initializer_list<double> values) {
  return {values.begin(), values.end()};
}

std::vector<ParamValue> strings(std::initializer_list<const char*> values) {
  std::vector<ParamValue> out;
  for (const auto* v : values) out.emplace_back(std::string(v));
  return out;
}

// lo, lo+step, ... up to hi; hi itself is appended when the steps miss it.
std::vector<ParamValue> stepped(double lo, double hi, double step) {
  std::vector<ParamValue> out;
  const long count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) {
    // Round to the step's decimal resolution so values print cleanly.
    const double v = std::round((lo + step * static_cast<double>(i)) * 1e6) / 1e6;
    out.emplace_back(v);
  }
  if (std::abs(std::get<double>(out.back()) - hi) > 1e-9) out.emplace_back(hi);
  return out;
}

}  // namespace

HyperparameterGrid HyperparameterGrid::coarse(Family f) {
  HyperparameterGrid g;
  g.family = f;
  switch (f) {
    case Family::svm:
      g.axes = {{"kernel", strings({"linear", "polynomial", "rbf"})},
                {"C", numbers({0.01, 0.1, 1, 10, 100})},
                {"gamma", numbers({0.001, 0.01, 0.1, 1})}};
      break;
    case Family::dt:
      g.axes = {{"max_depth", numbers({2, 4, 6, 8, 10})},
                {"min_samples_split", numbers({2, 5, 10})},
                {"min_samples_leaf", numbers({1, 4, 8})}};
      break;
    case Family::rf:
      g.axes = {{"n_estimators", numbers({10, 40, 100})},
                {"max_depth", numbers({3, 6, 9})},
                {"min_samples_split", numbers({2, 5})},
                {"min_samples_leaf", numbers({1, 4})}};
      break;
    case Family::mlp:
      g.axes = {{"hidden_layers", numbers({1, 2})},
                {"hidden_units", numbers({10, 50})},
                {"activation", strings({"relu", "tanh"})},
                {"solver", strings({"adam", "sgd"})},
                {"alpha", numbers({0.0001, 0.1})}};
      break;
  }
  return g;
}

HyperparameterGrid HyperparameterGrid::full(Family f) {
  HyperparameterGrid g;
  g.family = f;
  switch (f) {
    case Family::svm:
      g.axes = {{"kernel", strings({"linear", "polynomial", "rbf"})},
                {"C", stepped(0.01, 100, 0.01)},
                {"gamma", stepped(0.001, 1, 0.001)}};
      break;
    case Family::dt:
      g.axes = {{"max_depth", stepped(2, 10, 1)},
                {"min_samples_split", stepped(2, 10, 1)},
                {"min_samples_leaf", stepped(1, 10, 1)}};
      break;
    case Family::rf:
      g.axes = {{"n_estimators", stepped(10, 100, 10)},
                {"max_depth", stepped(2, 10, 1)},
                {"min_samples_split", stepped(2, 10, 1)},
                {"min_samples_leaf", stepped(1, 10, 1)}};
      break;
    case Family::mlp:
      g.axes = {{"hidden_layers", stepped(1, 3, 1)},
                {"hidden_units", stepped(10, 1000, 10)},
                {"activation", strings({"logistic", "tanh", "relu"})},
                {"solver", strings({"adam", "sgd"})},
                {"alpha", stepped(0.0001, 0.1, 0.001)}};
      break;
  }
  return g;
}

HyperparameterGrid HyperparameterGrid::single(Family f, const Hyperparameters& p) {
  HyperparameterGrid g;
  g.family = f;
  for (const auto& [k, v] : p) g.axes.push_back({k, {v}});
  return g;
}

HyperparameterGrid HyperparameterGrid::make(Family f, GridDensity d) {
  return d == GridDensity::coarse ? coarse(f) : full(f);
}

}  // namespace eegconn::ml
