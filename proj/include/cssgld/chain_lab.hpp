#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cssgld/loss.hpp"
#include "cssgld/samplers.hpp"

namespace cssgld {

inline constexpr int kDefaultGridResolution1d = 2048;
inline constexpr int kDefaultGridResolution2d = 256;

/// Gibbs density π ∝ exp(−βF) on B(0, R), tabulated at cell centres of a
/// uniform grid over [−R, R]^d (d ∈ {1, 2}). At d = 2 cells whose centre lies
/// outside the disk carry zero density. Normalized so Σ density·cell_volume = 1.
struct GibbsGrid {
  int dim = 1;
  int resolution = 0;
  double radius = 0.0;
  double beta = 0.0;
  double spacing = 0.0;
  double cell_volume = 0.0;
  double log_partition = 0.0;  // log Λ, Λ = ∫_D exp(−βF)
  std::vector<double> density;
  std::vector<bool> in_domain;

  std::size_t n_cells() const { return density.size(); }
  Vector center(std::size_t cell) const;
  std::size_t cell_of(const Vector& z) const;
  double mass(std::size_t cell) const { return density[cell] * cell_volume; }
};

GibbsGrid gibbs_grid(const Problem& problem, double beta, std::optional<int> resolution = std::nullopt);

void write_grid_csv(const GibbsGrid& grid, std::ostream& out);

struct TvEstimate {
  double tv = 0.0;
  /// Delta-method standard error of the histogram TV.
  double mc_stderr = 0.0;
  std::size_t n_samples = 0;
};

/// Half the L1 distance between the histogram of `samples` on the grid cells
/// and the grid's cell masses.
TvEstimate tv_distance(std::span<const Vector> samples, const GibbsGrid& grid);
/// Same, from per-cell sample counts.
TvEstimate tv_from_counts(std::span<const std::size_t> counts, const GibbsGrid& grid);

struct MixingPoint {
  std::int64_t k = 0;
  double tv = 0.0;
  double mc_stderr = 0.0;
};

/// Runs n_chains independent chains (warm-started per chain from split
/// streams of config.seed) and measures TV against `grid` at each checkpoint.
std::vector<MixingPoint> mixing_curve(const Problem& problem, const SamplerConfig& config, Method method,
                                      std::size_t n_chains, std::span<const std::int64_t> checkpoints,
                                      const GibbsGrid& grid, std::size_t threads = 1);

void write_curve_csv(std::span<const MixingPoint> curve, std::ostream& out);

struct CheegerEstimate {
  double rho = 0.0;
  /// d = 1: cut point t. d = 2: unused (0).
  double cut = 0.0;
  std::string cut_kind;
  /// d = 2 searches a cut dictionary (halfspaces and disks), so the value
  /// bounds the true constant from above; cell-centre quadrature pulls it a
  /// few percent low when the density varies on the scale of a cell.
  bool upper_bound = false;
};

CheegerEstimate cheeger_estimate(const GibbsGrid& grid);

/// max over cells of μ0/π, μ0 the N(0, (2Lβ)⁻¹ I) law truncated to the domain
/// and normalized on the same grid.
double warm_start_lambda(const GibbsGrid& grid, double lipschitz, double beta);

/// ∫ F dπ by quadrature on the grid.
double gibbs_expected_loss(const GibbsGrid& grid, const Problem& problem);

/// F(z) = ‖z‖²: identity generator, A = I_d, z* = 0.
Problem quadratic_problem(int d, double radius);

/// 1-d double well F(z) = (G(z) − G(2))² with G(z) = s·(σ(z − 1) + σ(−z − 1)),
/// a 1→2→1 sigmoid net. Minima at ±2, barrier at 0.
Problem double_well_problem(double scale = 5.0, double radius = 3.0);

}  // namespace cssgld
