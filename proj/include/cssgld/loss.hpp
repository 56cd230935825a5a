#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cssgld/generator.hpp"
#include "cssgld/sensing.hpp"

namespace cssgld {

/// Recovery instance: measurements y = A G(z*) + ε of an unknown latent z*.
struct Problem {
  std::shared_ptr<const GeneratorNet> generator;
  SensingMatrix sensing;
  Vector y;
  std::optional<Vector> z_star;
  std::optional<Vector> noise;

  Eigen::Index latent_dim() const { return generator->input_dim(); }
  Eigen::Index signal_dim() const { return generator->output_dim(); }
  Eigen::Index measurement_dim() const { return sensing.m(); }
  double radius() const { return generator->radius(); }
};

/// Builds y = A G(z*) + noise and checks dimensions.
Problem make_problem(std::shared_ptr<const GeneratorNet> generator, SensingMatrix sensing, Vector z_star,
                     std::optional<Vector> noise = std::nullopt);

/// Wraps observed measurements when no ground truth is known.
Problem problem_from_measurements(std::shared_ptr<const GeneratorNet> generator, SensingMatrix sensing, Vector y);

/// F(z) = ‖y − A G(z)‖².
double loss(const Problem& problem, const Vector& z);

/// ∇F(z) = 2 (∇G(z))ᵀ Aᵀ (A G(z) − y). The factor 2 is the exact derivative of
/// the squared norm; the L and D in ConstantsReport describe the undoubled form.
Vector grad(const Problem& problem, const Vector& z);

/// Allocation-free evaluator of F and ∇F for one thread.
class LossEvaluator {
 public:
  explicit LossEvaluator(const Problem& problem);

  double value(const Vector& z);
  double value_and_gradient(const Vector& z, Vector& gradient);

  const Problem& problem() const { return *problem_; }

 private:
  void check(const Vector& z) const;

  const Problem* problem_;
  ForwardCache cache_;
  Vector measured_;
  Vector back_;
};

/// Squared signal error per coordinate, ‖G(z) − x*‖² / n.
double signal_mse(const Problem& problem, const Vector& z);

/// Latent pair (z, z′) for pairwise constant estimation.
struct LatentPair {
  Vector z;
  Vector z_prime;
};

enum class PairLaw { gaussian, uniform_ball };

/// Draws pairs from N(0, I) or uniformly from B(0, radius). With `fixed_base`
/// every z′ equals the given point.
std::vector<LatentPair> sample_latent_pairs(Eigen::Index d, std::size_t n, PairLaw law, double radius,
                                            RngStream& stream, const std::optional<Vector>& fixed_base = std::nullopt);

/// Sampled near-isometry and Jacobian-Lipschitz constants of G.
struct GeneratorConstants {
  double iota = 0.0;
  double kappa = 0.0;
  double jacobian_lipschitz = 0.0;  // M
  std::size_t n_pairs = 0;
};

/// ι = min, κ = max of ‖G(z) − G(z′)‖/‖z − z′‖; M = max ‖∇G(z) − ∇G(z′)‖/‖z − z′‖.
/// Pairs with z = z′ are skipped.
GeneratorConstants estimate_generator_constants(const GeneratorNet& generator, std::span<const LatentPair> pairs);

/// Sampled constants of F. Sample maxima and minima only bound the true
/// suprema and infima from the inside.
struct ConstantsReport {
  double B = 0.0;
  double iota = 0.0;
  double kappa = 0.0;
  double M = 0.0;
  double gram_norm = 0.0;   // ‖AᵀA‖
  double L = 0.0;           // (M B + κ²) ‖AᵀA‖
  double D = 0.0;           // κ² ‖AᵀA‖
  double D_diameter = 0.0;  // D · 2R
  std::size_t n_points = 0;
  std::size_t n_pairs = 0;
  std::string method = "sampled";
  std::string convention = "undoubled gradient (paper); implementation gradient is 2x";
};

ConstantsReport compose_constants(double B, const GeneratorConstants& g, double gram_norm, double radius);

/// B from n_samples draws in B(0, R) plus n_samples on its boundary sphere;
/// (ι, κ, M) from n_samples uniform-in-ball pairs.
ConstantsReport estimate_constants(const Problem& problem, std::size_t n_samples, RngStream& stream);

}  // namespace cssgld
