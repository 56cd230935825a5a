#include "cssgld/loss.hpp"

#include <algorithm>
#include <limits>

namespace cssgld {

Problem make_problem(std::shared_ptr<const GeneratorNet> generator, SensingMatrix sensing, Vector z_star,
                     std::optional<Vector> noise) {
  if (!generator) throw InvalidArgument("problem: generator is null");
  if (generator->output_dim() != sensing.n()) {
    throw DimensionError("problem: generator emits " + std::to_string(generator->output_dim()) +
                         " entries, sensing matrix expects " + std::to_string(sensing.n()));
  }
  if (z_star.size() != generator->input_dim()) throw DimensionError("problem: z_star has wrong dimension");
  Problem p;
  p.y = sensing.A * forward(*generator, z_star);
  if (noise) {
    if (noise->size() != sensing.m()) throw DimensionError("problem: noise has wrong dimension");
    p.y += *noise;
  }
  p.generator = std::move(generator);
  p.sensing = std::move(sensing);
  p.z_star = std::move(z_star);
  p.noise = std::move(noise);
  return p;
}

Problem problem_from_measurements(std::shared_ptr<const GeneratorNet> generator, SensingMatrix sensing, Vector y) {
  if (!generator) throw InvalidArgument("problem: generator is null");
  if (generator->output_dim() != sensing.n()) throw DimensionError("problem: generator/sensing mismatch");
  if (y.size() != sensing.m()) throw DimensionError("problem: measurement vector has wrong dimension");
  Problem p;
  p.generator = std::move(generator);
  p.sensing = std::move(sensing);
  p.y = std::move(y);
  return p;
}

LossEvaluator::LossEvaluator(const Problem& problem) : problem_(&problem) {
  measured_.resize(problem.measurement_dim());
  back_.resize(problem.signal_dim());
}

void LossEvaluator::check(const Vector& z) const {
  if (z.size() != problem_->latent_dim()) {
    throw DimensionError("loss: latent has " + std::to_string(z.size()) + " entries, expected " +
                         std::to_string(problem_->latent_dim()));
  }
}

double LossEvaluator::value(const Vector& z) {
  check(z);
  forward_into(*problem_->generator, z, cache_);
  measured_.noalias() = problem_->sensing.A * cache_.output();
  measured_ -= problem_->y;
  return measured_.squaredNorm();
}

double LossEvaluator::value_and_gradient(const Vector& z, Vector& gradient) {
  const double f = value(z);
  // measured_ now holds A G(z) − y
  back_.noalias() = problem_->sensing.A.transpose() * measured_;
  back_ *= 2.0;
  vjp_from_cache(*problem_->generator, cache_, back_, gradient);
  return f;
}

double loss(const Problem& problem, const Vector& z) {
  LossEvaluator eval(problem);
  return eval.value(z);
}

Vector grad(const Problem& problem, const Vector& z) {
  LossEvaluator eval(problem);
  Vector g;
  eval.value_and_gradient(z, g);
  return g;
}

double signal_mse(const Problem& problem, const Vector& z) {
  if (!problem.z_star) throw InvalidArgument("signal_mse: problem has no ground truth");
  const Vector diff = forward(*problem.generator, z) - forward(*problem.generator, *problem.z_star);
  return diff.squaredNorm() / static_cast<double>(problem.signal_dim());
}

std::vector<LatentPair> sample_latent_pairs(Eigen::Index d, std::size_t n, PairLaw law, double radius,
                                            RngStream& stream, const std::optional<Vector>& fixed_base) {
  if (fixed_base && fixed_base->size() != d) throw DimensionError("sample_latent_pairs: base point dimension");
  auto draw = [&]() {
    return law == PairLaw::gaussian ? gaussian_vector(stream, d) : uniform_in_ball(stream, d, radius);
  };
  std::vector<LatentPair> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector z = draw();
    Vector zp = fixed_base ? *fixed_base : draw();
    pairs.push_back({std::move(z), std::move(zp)});
  }
  return pairs;
}

GeneratorConstants estimate_generator_constants(const GeneratorNet& generator, std::span<const LatentPair> pairs) {
  GeneratorConstants c;
  c.iota = std::numeric_limits<double>::infinity();
  for (const LatentPair& p : pairs) {
    const double dz = (p.z - p.z_prime).norm();
    if (dz == 0.0) continue;
    const double dg = (forward(generator, p.z) - forward(generator, p.z_prime)).norm();
    const double ratio = dg / dz;
    c.iota = std::min(c.iota, ratio);
    c.kappa = std::max(c.kappa, ratio);
    const Matrix dj = jacobian(generator, p.z) - jacobian(generator, p.z_prime);
    const double jnorm = dj.isZero(0.0) ? 0.0 : spectral_norm(dj);
    c.jacobian_lipschitz = std::max(c.jacobian_lipschitz, jnorm / dz);
    ++c.n_pairs;
  }
  if (c.n_pairs == 0) throw InvalidArgument("estimate_generator_constants: no non-degenerate pairs");
  return c;
}

ConstantsReport compose_constants(double B, const GeneratorConstants& g, double gram_norm, double radius) {
  ConstantsReport r;
  r.B = B;
  r.iota = g.iota;
  r.kappa = g.kappa;
  r.M = g.jacobian_lipschitz;
  r.gram_norm = gram_norm;
  r.L = (r.M * r.B + r.kappa * r.kappa) * gram_norm;
  r.D = r.kappa * r.kappa * gram_norm;
  r.D_diameter = r.D * 2.0 * radius;
  r.n_pairs = g.n_pairs;
  return r;
}

ConstantsReport estimate_constants(const Problem& problem, std::size_t n_samples, RngStream& stream) {
  if (n_samples < 2) throw InvalidArgument("estimate_constants: need at least 2 samples");
  const GeneratorNet& g = *problem.generator;
  const Eigen::Index d = g.input_dim();
  const double radius = g.radius();

  double B = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    B = std::max(B, forward(g, uniform_in_ball(stream, d, radius)).norm());
    B = std::max(B, forward(g, uniform_on_sphere(stream, d, radius)).norm());
  }
  const auto pairs = sample_latent_pairs(d, n_samples, PairLaw::uniform_ball, radius, stream);
  ConstantsReport r = compose_constants(B, estimate_generator_constants(g, pairs), gram_norm(problem.sensing), radius);
  r.n_points = 2 * n_samples;
  return r;
}

}  // namespace cssgld
