#include "cssgld/chain_lab.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "cssgld/parallel.hpp"

namespace cssgld {
namespace {

void require_small_dim(Eigen::Index d, const char* what) {
  if (d < 1 || d > 2) {
    throw UnsupportedDimension(std::string(what) + ": latent dimension " + std::to_string(d) +
                               " unsupported (quadrature diagnostics need d <= 2)");
  }
}

double log_sum_exp(const std::vector<double>& xs) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : xs) top = std::max(top, x);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - top);
  return top + std::log(s);
}

}  // namespace

Vector GibbsGrid::center(std::size_t cell) const {
  Vector c(dim);
  if (dim == 1) {
    c[0] = -radius + (static_cast<double>(cell) + 0.5) * spacing;
  } else {
    const std::size_t i = cell % static_cast<std::size_t>(resolution);
    const std::size_t j = cell / static_cast<std::size_t>(resolution);
    c[0] = -radius + (static_cast<double>(i) + 0.5) * spacing;
    c[1] = -radius + (static_cast<double>(j) + 0.5) * spacing;
  }
  return c;
}

std::size_t GibbsGrid::cell_of(const Vector& z) const {
  if (z.size() != dim) throw DimensionError("grid: sample dimension does not match grid");
  auto index = [&](double x) {
    const double t = std::floor((x + radius) / spacing);
    return static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(resolution - 1)));
  };
  if (dim == 1) return index(z[0]);
  return index(z[0]) + static_cast<std::size_t>(resolution) * index(z[1]);
}

GibbsGrid gibbs_grid(const Problem& problem, double beta, std::optional<int> resolution) {
  const Eigen::Index d = problem.latent_dim();
  require_small_dim(d, "gibbs_grid");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("gibbs_grid: beta must be finite and >= 0");
  GibbsGrid grid;
  grid.dim = static_cast<int>(d);
  grid.resolution = resolution.value_or(d == 1 ? kDefaultGridResolution1d : kDefaultGridResolution2d);
  if (grid.resolution < 2) throw InvalidArgument("gibbs_grid: resolution must be >= 2");
  grid.radius = problem.radius();
  grid.beta = beta;
  grid.spacing = 2.0 * grid.radius / grid.resolution;
  grid.cell_volume = std::pow(grid.spacing, grid.dim);

  const std::size_t n = d == 1 ? grid.resolution : static_cast<std::size_t>(grid.resolution) * grid.resolution;
  grid.density.assign(n, 0.0);
  grid.in_domain.assign(n, false);

  LossEvaluator eval(problem);
  std::vector<double> log_weight;
  std::vector<std::size_t> cells;
  log_weight.reserve(n);
  cells.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    const Vector z = grid.center(c);
    if (z.norm() > grid.radius) continue;
    grid.in_domain[c] = true;
    const double energy = beta == 0.0 ? 0.0 : beta * eval.value(z);
    log_weight.push_back(-energy);
    cells.push_back(c);
  }
  grid.log_partition = log_sum_exp(log_weight) + std::log(grid.cell_volume);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    grid.density[cells[i]] = std::exp(log_weight[i] - grid.log_partition);
  }
  return grid;
}

void write_grid_csv(const GibbsGrid& grid, std::ostream& out) {
  out << (grid.dim == 1 ? "z_0,density\n" : "z_0,z_1,density\n") << std::setprecision(17);
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    if (!grid.in_domain[c]) continue;
    const Vector z = grid.center(c);
    for (Eigen::Index i = 0; i < z.size(); ++i) out << z[i] << ',';
    out << grid.density[c] << '\n';
  }
}

TvEstimate tv_from_counts(std::span<const std::size_t> counts, const GibbsGrid& grid) {
  if (counts.size() != grid.n_cells()) throw DimensionError("tv: count vector does not match grid");
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total == 0) throw InvalidArgument("tv_distance: empty sample set");
  const double n = static_cast<double>(total);
  double tv = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double hist = static_cast<double>(counts[c]) / n;
    const double diff = hist - grid.mass(c);
    tv += std::abs(diff);
    const double sign = diff > 0.0 ? 1.0 : diff < 0.0 ? -1.0 : 0.0;
    first += sign * hist;
    second += sign * sign * hist;
  }
  TvEstimate est;
  est.tv = 0.5 * tv;
  est.mc_stderr = 0.5 * std::sqrt(std::max(0.0, second - first * first) / n);
  est.n_samples = total;
  return est;
}

TvEstimate tv_distance(std::span<const Vector> samples, const GibbsGrid& grid) {
  if (samples.empty()) throw InvalidArgument("tv_distance: empty sample set");
  std::vector<std::size_t> counts(grid.n_cells(), 0);
  for (const Vector& z : samples) ++counts[grid.cell_of(z)];
  return tv_from_counts(counts, grid);
}

std::vector<MixingPoint> mixing_curve(const Problem& problem, const SamplerConfig& config, Method method,
                                      std::size_t n_chains, std::span<const std::int64_t> checkpoints,
                                      const GibbsGrid& grid, std::size_t threads) {
  require_small_dim(problem.latent_dim(), "mixing_curve");
  config.validate();
  if (n_chains == 0) throw InvalidArgument("mixing_curve: need at least one chain");
  if (grid.dim != problem.latent_dim()) throw DimensionError("mixing_curve: grid dimension mismatch");
  std::vector<std::int64_t> ks(checkpoints.begin(), checkpoints.end());
  if (ks.empty()) throw InvalidArgument("mixing_curve: no checkpoints");
  if (!std::is_sorted(ks.begin(), ks.end()) || ks.front() < 0) {
    throw InvalidArgument("mixing_curve: checkpoints must be sorted and nonnegative");
  }

  const std::size_t n_ck = ks.size();
  // cell index of every chain at every checkpoint
  std::vector<std::size_t> cells(n_chains * n_ck);
  parallel_for(n_chains, threads, [&](std::size_t chain) {
    RngStream init(config.seed, 2 * chain);
    RngStream noise(config.seed, 2 * chain + 1);
    ChainStepper stepper(problem, config, method);
    ChainState state;
    state.z = warm_start(problem, config.beta, config.lipschitz, init);
    for (std::size_t c = 0; c < n_ck; ++c) {
      while (state.k < ks[c]) stepper.step(state, noise);
      cells[chain * n_ck + c] = grid.cell_of(state.z);
    }
  });

  std::vector<MixingPoint> curve;
  curve.reserve(n_ck);
  std::vector<std::size_t> counts(grid.n_cells());
  for (std::size_t c = 0; c < n_ck; ++c) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t chain = 0; chain < n_chains; ++chain) ++counts[cells[chain * n_ck + c]];
    const TvEstimate est = tv_from_counts(counts, grid);
    curve.push_back({ks[c], est.tv, est.mc_stderr});
  }
  return curve;
}

void write_curve_csv(std::span<const MixingPoint> curve, std::ostream& out) {
  out << "k,tv,mc_stderr\n" << std::setprecision(17);
  for (const MixingPoint& p : curve) out << p.k << ',' << p.tv << ',' << p.mc_stderr << '\n';
}

namespace {

struct SweepResult {
  double rho = std::numeric_limits<double>::infinity();
  double cut = 0.0;
};

/// Sweeps cuts between consecutive bins of a 1-d mass profile. The boundary
/// density at cut j is the mass of the `half_band` bins on each side over the
/// band width. Cuts whose band holds a bin with no grid cell (a lattice gap,
/// not zero density) are skipped when `occupancy` is given.
SweepResult sweep_cuts(const std::vector<double>& bin_mass, double width, double origin, std::size_t half_band = 1,
                       const std::vector<std::size_t>& occupancy = {}) {
  SweepResult best;
  const std::size_t n = bin_mass.size();
  // tail masses summed from each end so small tails keep full precision
  std::vector<double> right(n + 1, 0.0);
  for (std::size_t j = n; j-- > 0;) right[j] = right[j + 1] + bin_mass[j];
  double cumulative = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    cumulative += bin_mass[j - 1];
    const double smaller = std::min(cumulative, right[j]);
    if (!(smaller > 0.0)) continue;
    if (j < half_band || j + half_band > n) continue;
    double band = 0.0;
    bool gap = false;
    for (std::size_t b = j - half_band; b < j + half_band; ++b) {
      band += bin_mass[b];
      if (!occupancy.empty() && occupancy[b] == 0) gap = true;
    }
    if (gap) continue;
    const double boundary = band / (2.0 * static_cast<double>(half_band) * width);
    const double ratio = boundary / smaller;
    if (ratio < best.rho) {
      best.rho = ratio;
      best.cut = origin + static_cast<double>(j) * width;
    }
  }
  return best;
}

}  // namespace

CheegerEstimate cheeger_estimate(const GibbsGrid& grid) {
  if (grid.dim < 1 || grid.dim > 2) throw UnsupportedDimension("cheeger_estimate: d must be 1 or 2");
  CheegerEstimate est;
  if (grid.dim == 1) {
    std::vector<double> mass(grid.n_cells());
    for (std::size_t c = 0; c < mass.size(); ++c) mass[c] = grid.mass(c);
    const SweepResult r = sweep_cuts(mass, grid.spacing, -grid.radius);
    est.rho = r.rho;
    est.cut = r.cut;
    est.cut_kind = "point";
    return est;
  }

  // each cell is split into kSubsamples² points so projected bins see no lattice aliasing
  constexpr int kSubsamples = 8;
  constexpr std::size_t kBand2d = 1;
  std::vector<Vector> centers;
  std::vector<double> masses;
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    if (!grid.in_domain[c]) continue;
    const Vector centre = grid.center(c);
    for (int a = 0; a < kSubsamples; ++a) {
      for (int b = 0; b < kSubsamples; ++b) {
        const double dx = ((a + 0.5) / kSubsamples - 0.5) * grid.spacing;
        const double dy = ((b + 0.5) / kSubsamples - 0.5) * grid.spacing;
        centers.push_back(centre + Eigen::Vector2d(dx, dy));
        masses.push_back(grid.mass(c) / (kSubsamples * kSubsamples));
      }
    }
  }
  const double h = grid.spacing;
  const auto n_bins = static_cast<std::size_t>(std::ceil(2.0 * grid.radius / h)) + 1;
  est.rho = std::numeric_limits<double>::infinity();
  est.upper_bound = true;

  constexpr int kDirections = 64;
  for (int k = 0; k < kDirections; ++k) {
    const double theta = M_PI * k / kDirections;
    const Eigen::Vector2d normal(std::cos(theta), std::sin(theta));
    std::vector<double> bins(n_bins, 0.0);
    std::vector<std::size_t> occupancy(n_bins, 0);
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double s = centers[i].dot(normal) + grid.radius;
      const std::size_t b = std::min(n_bins - 1, static_cast<std::size_t>(std::max(0.0, s / h)));
      bins[b] += masses[i];
      ++occupancy[b];
    }
    const SweepResult r = sweep_cuts(bins, h, -grid.radius, kBand2d, occupancy);
    if (r.rho < est.rho) {
      est.rho = r.rho;
      est.cut_kind = "halfspace";
    }
  }

  std::vector<Eigen::Vector2d> disk_centers{Eigen::Vector2d::Zero()};
  for (int k = 0; k < 8; ++k) {
    const double theta = 2.0 * M_PI * k / 8;
    disk_centers.emplace_back(0.5 * grid.radius * std::cos(theta), 0.5 * grid.radius * std::sin(theta));
  }
  for (const Eigen::Vector2d& o : disk_centers) {
    const auto n_shells = static_cast<std::size_t>(std::ceil(2.0 * grid.radius / h)) + 1;
    std::vector<double> shells(n_shells, 0.0);
    std::vector<std::size_t> occupancy(n_shells, 0);
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const std::size_t b = std::min(n_shells - 1, static_cast<std::size_t>((centers[i] - o).norm() / h));
      shells[b] += masses[i];
      ++occupancy[b];
    }
    const SweepResult r = sweep_cuts(shells, h, 0.0, kBand2d, occupancy);
    if (r.rho < est.rho) {
      est.rho = r.rho;
      est.cut_kind = "disk";
    }
  }
  return est;
}

double warm_start_lambda(const GibbsGrid& grid, double lipschitz, double beta) {
  if (grid.dim < 1 || grid.dim > 2) throw UnsupportedDimension("warm_start_lambda: d must be 1 or 2");
  if (!(lipschitz > 0.0) || !(beta >= 0.0)) throw InvalidArgument("warm_start_lambda: need L > 0, beta >= 0");
  const double precision = lipschitz * beta;  // exponent −Lβ‖z‖²
  std::vector<double> log_mu;
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    if (!grid.in_domain[c]) continue;
    log_mu.push_back(-precision * grid.center(c).squaredNorm());
    cells.push_back(c);
  }
  const double log_norm = log_sum_exp(log_mu) + std::log(grid.cell_volume);
  double lambda = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double mu = std::exp(log_mu[i] - log_norm);
    const double pi = grid.density[cells[i]];
    if (pi == 0.0) {
      if (mu > 0.0) throw NumericError("warm_start_lambda: target density vanishes where the warm start does not");
      continue;
    }
    lambda = std::max(lambda, mu / pi);
  }
  return lambda;
}

double gibbs_expected_loss(const GibbsGrid& grid, const Problem& problem) {
  if (grid.dim != problem.latent_dim()) throw DimensionError("gibbs_expected_loss: grid dimension mismatch");
  LossEvaluator eval(problem);
  double total = 0.0;
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    if (!grid.in_domain[c] || grid.density[c] == 0.0) continue;
    total += eval.value(grid.center(c)) * grid.mass(c);
  }
  return total;
}

Problem quadratic_problem(int d, double radius) {
  if (d < 1) throw InvalidArgument("quadratic_problem: d must be >= 1");
  auto g = std::make_shared<const GeneratorNet>(linear_net(Matrix::Identity(d, d), radius));
  return make_problem(std::move(g), SensingMatrix::from_matrix(Matrix::Identity(d, d)), Vector::Zero(d));
}

Problem double_well_problem(double scale, double radius) {
  std::vector<Layer> layers;
  Layer hidden;
  hidden.weight = Matrix(2, 1);
  hidden.weight << 1.0, -1.0;
  hidden.bias = Vector::Constant(2, -1.0);
  hidden.activation = Activation{ActivationKind::sigmoid};
  Layer out;
  out.weight = Matrix::Constant(1, 2, scale);
  out.bias = Vector::Zero(1);
  out.activation = Activation{ActivationKind::identity};
  layers.push_back(std::move(hidden));
  layers.push_back(std::move(out));
  auto g = std::make_shared<const GeneratorNet>(std::move(layers), radius);
  return make_problem(std::move(g), SensingMatrix::from_matrix(Matrix::Identity(1, 1)), Vector::Constant(1, 2.0));
}

}  // namespace cssgld
