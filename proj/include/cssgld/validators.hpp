#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cssgld/loss.hpp"
#include "cssgld/sensing.hpp"

namespace cssgld {

inline constexpr std::size_t kSmoothnessGridSize = 512;
inline constexpr double kExactSupportTol = 1e-9;

/// Pairwise terms of one sampled pair: u = ⟨lhs difference, Jacobian term⟩,
/// v = ‖z − z′‖².
struct ScatterPoint {
  double u = 0.0;
  double v = 0.0;
};

struct CurvePoint {
  double alpha = 0.0;
  double gamma = 0.0;
};

/// Supporting line u ≥ α v − γ fitted to a scatter of (u, v) pairs.
struct SmoothnessEstimate {
  double alpha = 0.0;
  double gamma = 0.0;
  /// Minimal feasible γ for each α on the grid; nondecreasing in α.
  std::vector<CurvePoint> curve;
  std::vector<ScatterPoint> scatter;
  std::size_t n_pairs = 0;
  std::size_t n_skipped = 0;
  std::string pair_law = "gaussian";
  bool exact_support = false;
  bool outside_theory = false;
};

struct PairSampling {
  PairLaw law = PairLaw::gaussian;
  /// Fixed-base variant: every z′ is this point.
  std::optional<Vector> fixed_base;
};

/// Smallest γ ≥ 0 with u_i ≥ α v_i − γ for every point, evaluated exactly in
/// floating point the way check_supporting_line tests it.
double minimal_gamma(std::span<const ScatterPoint> scatter, double alpha);

/// true iff u_i >= alpha * v_i - gamma for every point.
bool check_supporting_line(std::span<const ScatterPoint> scatter, double alpha, double gamma);

/// Builds the γ(α) curve on a 512-point grid over [0, max u/v] and selects
/// the largest α with γ(α) ≤ 1e-9, else the grid α maximizing α − γ/mean(v).
SmoothnessEstimate fit_supporting_line(std::vector<ScatterPoint> scatter);

std::vector<ScatterPoint> strong_smoothness_scatter(const GeneratorNet& generator,
                                                    std::span<const LatentPair> pairs);
std::vector<ScatterPoint> dissipativity_scatter(const GeneratorNet& generator, const SensingMatrix& sensing,
                                                std::span<const LatentPair> pairs);

/// (α, γ) of ⟨G(z) − G(z′), ∇G(z)(z − z′)⟩ ≥ α‖z − z′‖² − γ.
SmoothnessEstimate estimate_strong_smoothness(const GeneratorNet& generator, std::size_t n_pairs, RngStream& stream,
                                              const PairSampling& sampling = {});
SmoothnessEstimate estimate_strong_smoothness(const GeneratorNet& generator, std::span<const LatentPair> pairs);

/// (α_A, γ_A) of ⟨∇(AG(z))ᵀ(AG(z) − AG(z′)), z − z′⟩ ≥ α_A‖z − z′‖² − γ_A,
/// pooled over every given operator on one shared pair set.
SmoothnessEstimate estimate_dissipativity_sensing(const GeneratorNet& generator,
                                                  std::span<const SensingMatrix> operators, std::size_t n_pairs,
                                                  RngStream& stream, const PairSampling& sampling = {});
SmoothnessEstimate estimate_dissipativity_sensing(const GeneratorNet& generator, const SensingMatrix& sensing,
                                                  std::size_t n_pairs, RngStream& stream,
                                                  const PairSampling& sampling = {});

struct Proposition1Report {
  double iota = 0.0;
  double kappa = 0.0;
  double M = 0.0;
  bool condition_holds = false;  // 2ι² > Mκ
  /// ι² − Mκ/2, the strong-smoothness α the condition guarantees.
  double implied_alpha = 0.0;
  bool outside_theory = false;
  std::size_t n_pairs = 0;
};

Proposition1Report check_proposition1(const GeneratorNet& generator, std::span<const LatentPair> pairs);
Proposition1Report check_proposition1(const GeneratorNet& generator, std::size_t n_pairs, RngStream& stream,
                                      const PairSampling& sampling = {});

void write_scatter_csv(const SmoothnessEstimate& estimate, std::ostream& out);
std::string estimate_json(const SmoothnessEstimate& estimate);

}  // namespace cssgld
