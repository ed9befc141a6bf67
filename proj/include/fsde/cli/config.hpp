#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsde/grid.hpp"
#include "fsde/harness.hpp"
#include "fsde/potential.hpp"
#include "fsde/solver.hpp"

namespace fsde::cli {

inline constexpr int config_schema_version = 1;

/// Parse or validation failure; `pointer` is the JSON pointer of the offending value.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::invalid_argument(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

struct PotentialConfig {
  Potential::Kind kind = Potential::Kind::zero;
  double k = 1.0;
  double a = 1.0, b = 1.0, clip_radius = 2.0;
  Potential build() const;
};

struct EmbeddingConfig {
  int modes = 40;
  double t_min = 1e-2, t_max = 1e2;
  std::vector<double> masses;  // GLE runs, one per mass
};

struct MlConfig {
  double alpha = 0.5;
  double beta = 1.0;
  std::vector<double> z;
};

struct SpectrumConfig {
  double omega_max = 10.0;
  std::size_t points = 200;
};

struct VerifyConfig {
  std::optional<double> t_lo, t_hi;  // MSD fit window
  std::vector<double> lags{0.0, 0.5, 1.0, 2.0, 5.0};
};

struct RunConfig {
  int schema_version = config_schema_version;
  double alpha = 0.5;
  bool alpha_is_fdt = false;
  double hurst = 0.75;
  PotentialConfig potential;
  double x0 = 0.0, x0_sd = 0.0;
  double dt = 0.01;
  std::size_t n_steps = 100;
  std::size_t n_paths = 2;
  std::uint64_t seed = 0;
  Method method = Method::volterra;
  std::string out_dir = ".";
  std::string prefix = "run";
  std::string fbm_generator = "circulant";
  std::size_t keep_paths = 0;
  EmbeddingConfig embedding;
  MlConfig ml;
  SpectrumConfig spectrum;
  VerifyConfig verify;

  ModelSpec model() const;
  TimeGrid grid() const { return TimeGrid(dt, n_steps); }
  /// Canonical JSON of the model block, for manifests.
  std::string model_json() const;
};

/// Strict parser: unknown keys and out-of-range values are errors; there is no default seed.
RunConfig parse_config(const std::string& json_text);

}  // namespace fsde::cli
