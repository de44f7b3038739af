#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace eegconn::ml {

enum class Family { svm, dt, rf, mlp };

std::string_view to_string(Family f);
Family family_from_string(std::string_view s);

using ParamValue = std::variant<double, std::string>;
using Hyperparameters = std::map<std::string, ParamValue>;

std::string format_value(const ParamValue& v);
std::string format_params(const Hyperparameters& params);

double get_number(const Hyperparameters& p, const std::string& name);
const std::string& get_string(const Hyperparameters& p, const std::string& name);

/// Best-performing settings reported for each family; used as training
/// defaults and as the single-point grid.
Hyperparameters default_hyperparameters(Family f);

/// Throws std::invalid_argument for unknown names, wrong value types, or
/// values no trainer can use. Looser than the Table I search ranges.
void validate_hyperparameters(Family f, const Hyperparameters& p);

/// Throws std::invalid_argument if a value lies outside the documented
/// search range for its axis.
void validate_search_range(Family f, const std::string& name, const ParamValue& v);

enum class GridDensity { coarse, full };

GridDensity grid_density_from_string(std::string_view s);

/// Named axes iterated as a Cartesian product, last axis fastest.
struct HyperparameterGrid {
  Family family = Family::svm;
  std::vector<std::pair<std::string, std::vector<ParamValue>>> axes;

  void validate() const;
  /// Product of axis lengths, saturating at UINT64_MAX.
  std::uint64_t cardinality() const;
  Hyperparameters point(std::uint64_t index) const;

  static HyperparameterGrid coarse(Family f);
  static HyperparameterGrid full(Family f);
  static HyperparameterGrid single(Family f, const Hyperparameters& p);
  static HyperparameterGrid make(Family f, GridDensity d);
};

}  // namespace eegconn::ml
