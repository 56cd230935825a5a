#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cssgld/harness/config.hpp"
#include "cssgld/loss.hpp"
#include "cssgld/samplers.hpp"

namespace cssgld::harness {

/// One (seed, f, method) recovery outcome. wall_time is written to
/// timing.csv, never to results.csv, so reruns stay byte-identical.
struct ResultRow {
  std::uint64_t seed = 0;
  Method method = Method::sgld;
  double f = 0.0;
  Eigen::Index m = 0;
  std::int64_t k = 0;
  double final_f = 0.0;
  double mse = 0.0;
  double wall_time = 0.0;
};

/// Per-seed streams: (seed, 1) sensing matrix, (seed, 2) z*, (seed, 3) noise,
/// (seed, 4) sampled constants. The chain itself uses SamplerConfig::seed = seed.
inline constexpr std::uint64_t kSensingStream = 1;
inline constexpr std::uint64_t kTruthStream = 2;
inline constexpr std::uint64_t kNoiseStream = 3;
inline constexpr std::uint64_t kConstantsStream = 4;

std::shared_ptr<const GeneratorNet> build_generator(const ExperimentConfig& config);

/// m = round(f n), or problem.m when given; f defaults to 0.5 (1 for identity sensing).
Eigen::Index measurement_count(const ExperimentConfig& config, Eigen::Index n, std::optional<double> f);

Problem build_problem(const ExperimentConfig& config, std::shared_ptr<const GeneratorNet> generator,
                      std::uint64_t seed, std::optional<double> f = std::nullopt);

/// Resolved chain settings for one problem; constants are sampled only when
/// the step size or L is left to the theory schedule.
struct ChainSetup {
  SamplerConfig sampler;
  std::optional<ConstantsReport> constants;
};

ChainSetup resolve_sampler(const ExperimentConfig& config, const Problem& problem, std::uint64_t seed);

std::vector<ResultRow> run_recover(const ExperimentConfig& config);
/// GD and SGLD from the same warm start per seed.
std::vector<ResultRow> run_compare(const ExperimentConfig& config);
std::vector<ResultRow> run_phase_transition(const ExperimentConfig& config);
nlohmann::json run_validate(const ExperimentConfig& config);
nlohmann::json run_chain_lab(const ExperimentConfig& config);

void run_experiment(const ExperimentConfig& config);

/// Regenerates every plot_<name>.svg of `kind` from the CSV/JSON files in `out`.
void replot(ExperimentKind kind, const std::filesystem::path& out);

/// Shipped reference numbers from the paper's DCGAN experiments.
std::string_view paper_reference_csv();

}  // namespace cssgld::harness
