#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ccsusy/factorization.hpp"
#include "ccsusy/susy_transform.hpp"

namespace ccsusy {

struct U0Config {
  RealMatrix matrix;
};

struct CanonicalConfig {
  int rank = 0;
  std::vector<int> primed;  // empty: channels with the `rank` largest thresholds
  RealMatrix q0;
  RealMatrix x0;
};

struct PresetConfig {
  std::string name;
};

struct RadialGrid {
  double r_max = 8.0;
  int n_points = 401;
};

struct EnergyGrid {
  double e_min = 0.0;
  double e_max = 20.0;
  int n_points = 801;
};

struct BoundScanConfig {
  std::optional<double> e_min;
  std::optional<double> e_max;
  int n_grid = 2000;
};

/// One run of the command-line tool. Channels/factorization may be absent
/// only in preset mode; resolve_config fills every field.
struct RunConfig {
  std::optional<std::vector<double>> thresholds;
  std::optional<double> factorization_energy;
  std::optional<std::vector<double>> factorization_kappa;
  std::variant<U0Config, CanonicalConfig, PresetConfig> parametrization = PresetConfig{};
  std::optional<RadialGrid> r_grid;
  std::optional<EnergyGrid> e_grid;
  BoundScanConfig bound_scan;
  std::string out_directory = ".";
  std::vector<std::string> formats = {"csv"};
};

RunConfig parse_config(const std::string& json_text);
RunConfig parse_config_file(const std::string& path);

std::vector<std::string> preset_names();
RunConfig make_preset_config(const std::string& name);

/// Expands a preset into explicit channels/factorization/parametrization and
/// fills grid defaults. Idempotent on already-resolved configs.
RunConfig resolve_config(const RunConfig& cfg);

/// Serializes a resolved config; this is the auditable effective-config echo
/// written next to every output table.
std::string serialize_config(const RunConfig& cfg);

struct BuiltTransform {
  FactorizationSpec spec;
  TransformResult transform;
};

/// Builds the transform a resolved config describes.
BuiltTransform build_transform(const RunConfig& resolved);

}  // namespace ccsusy
