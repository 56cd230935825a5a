#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cssgld/errors.hpp"
#include "cssgld/generator.hpp"
#include "cssgld/samplers.hpp"

namespace cssgld::harness {

/// Invalid experiment configuration; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class ExperimentKind { recover, compare, phase_transition, validate, chain_lab };

std::string_view kind_name(ExperimentKind kind);
ExperimentKind parse_kind(std::string_view name);

struct GeneratorSource {
  std::optional<NetSpec> netspec;
  std::optional<std::filesystem::path> weights;
  /// "identity" (latent_dim, radius) or "double_well" (scale, radius).
  std::optional<std::string> builtin;
  int latent_dim = 1;
  double scale = 5.0;
  std::optional<double> radius;
};

struct ProblemConfig {
  std::optional<double> f;
  std::optional<int> m;
  /// "gaussian" or "identity" (requires m = n).
  std::string sensing = "gaussian";
  /// Unset: z* uniform in B(0, R) per seed.
  std::optional<std::vector<double>> z_star;
  double noise_norm = 0.0;
};

struct SamplerSettings {
  /// Unset: theory schedule from sampled constants.
  std::optional<double> eta;
  double beta = 1.0;
  std::optional<double> proposal_radius;
  std::int64_t k_max = 1000;
  std::optional<std::int64_t> record_every;
  /// Unset: L from sampled constants.
  std::optional<double> lipschitz;
  std::size_t constants_samples = 200;
  /// Empty: sgld for recover, gd + sgld for compare and phase_transition.
  std::vector<Method> methods;
};

struct PhaseSettings {
  std::vector<double> f_grid{0.2, 0.4, 0.6, 0.8, 1.0};
};

struct ValidateSettings {
  std::size_t n_pairs = 500;
  std::size_t n_matrices = 5;
  double f = 0.5;
  PairLaw pair_law = PairLaw::gaussian;
  std::optional<std::vector<double>> fixed_base;
};

struct ChainLabSettings {
  std::size_t n_chains = 1000;
  std::vector<std::int64_t> checkpoints{0, 10, 100, 1000};
  std::optional<int> resolution;
  std::optional<int> tv_resolution;
  /// Extra temperatures for the quadrature table; sampler.beta is always included.
  std::vector<double> betas;
  Method method = Method::sgld;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::recover;
  GeneratorSource generator;
  ProblemConfig problem;
  std::vector<std::uint64_t> seeds{0};
  SamplerSettings sampler;
  PhaseSettings phase;
  ValidateSettings validate;
  ChainLabSettings chain_lab;
  std::filesystem::path out = "out";
  /// Effective document after overrides, echoed into summary.json.
  nlohmann::json document;
};

/// Applies one `dotted.key=value` override. The value is parsed as JSON when
/// possible, else taken as a string.
void apply_override(nlohmann::json& document, std::string_view assignment);

ExperimentConfig parse_config(const nlohmann::json& document, std::optional<ExperimentKind> kind = std::nullopt);

nlohmann::json read_config_file(const std::filesystem::path& path);

/// Reads, overrides, and parses. `kind` wins over any "kind" field.
ExperimentConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides,
                             std::optional<ExperimentKind> kind = std::nullopt);

}  // namespace cssgld::harness
