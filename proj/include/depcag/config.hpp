#pragma once

#include "depcag/conjugacy.hpp"
#include "depcag/dynamics.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace depcag {

using Json = nlohmann::json;

struct DichotomyConfig {
  enum class Mode { User, DiscreteAuto };
  Mode mode = Mode::User;
  Mat P;  // User mode only
  std::optional<double> K;  // empty: certify automatically over the window
  std::optional<double> alpha;  // DiscreteAuto: empty means -ln(r) / theta
};

/// A parsed and validated run configuration. `canonical` is the fully
/// resolved document (presets expanded, defaults filled in); the hash is
/// the SHA-256 of its compact dump.
struct RunConfig {
  Json canonical;
  std::string hash;
  std::string preset;  // empty unless loaded from a preset

  std::shared_ptr<const LinearSystem> system;
  Nonlinearity f;
  DichotomyConfig dichotomy;
  EngineOptions engine;
  long k_lo = -10, k_hi = 10;  // verification window (intervals)
  int samples_per_interval = 8;
  std::uint64_t seed = 0;
};

/// Throws ConfigError carrying the JSON pointer of the offending value.
RunConfig parse_config(const Json& doc);
RunConfig load_config_file(const std::string& path);

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
Json preset_document(const std::string& name);
RunConfig load_preset(const std::string& name);

std::string sha256_hex(const std::string& bytes);

}  // namespace depcag
