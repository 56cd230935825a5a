#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "cssgld/errors.hpp"

namespace cssgld {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultSpectralTol = 1e-10;
inline constexpr int kSpectralMaxIterations = 10000;

/// Counter-based random stream.
///
/// Every draw is a pure function of (seed, stream_id, counter), so two streams
/// built from the same pair replay the same sequence and distinct stream ids
/// never share state. Gaussians come from Box–Muller on the uniform sequence;
/// the second value of each pair is cached.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double gaussian();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Vector gaussian_vector(RngStream& stream, Eigen::Index d);

/// Uniform draw from the closed ball B(0, radius) in R^d.
Vector uniform_in_ball(RngStream& stream, Eigen::Index d, double radius);

/// Uniform draw from the sphere of the given radius.
Vector uniform_on_sphere(RngStream& stream, Eigen::Index d, double radius);

Vector matvec(const Matrix& m, const Vector& v);
Vector matvec_transpose(const Matrix& m, const Vector& v);

/// Largest singular value by power iteration on MᵀM.
///
/// Stops once the Rayleigh quotient changes by less than tol (relative) and
/// the eigen-residual is below sqrt(tol) relative; throws ConvergenceError
/// after kSpectralMaxIterations.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& expr, double tol = kDefaultSpectralTol) {
  if (expr.rows() == 0 || expr.cols() == 0) throw DimensionError("spectral_norm: empty matrix");
  if (!(tol > 0.0)) throw InvalidArgument("spectral_norm: tol must be positive");
  const Matrix m = expr;
  if (!m.allFinite()) throw NumericError("spectral_norm: non-finite entry");

  RngStream start(0x5bd1e995u, 0);
  Vector v = gaussian_vector(start, m.cols());
  v.normalize();
  Vector w(m.rows());
  Vector x(m.cols());
  double lambda_prev = -1.0;
  double lambda = 0.0;
  for (int it = 0; it < kSpectralMaxIterations; ++it) {
    w.noalias() = m * v;
    x.noalias() = m.transpose() * w;
    lambda = v.dot(x);
    const double xnorm = x.norm();
    if (xnorm == 0.0) return 0.0;
    const double residual = (x - lambda * v).norm();
    if (std::abs(lambda - lambda_prev) <= tol * lambda && residual <= std::sqrt(tol) * lambda) {
      return std::sqrt(lambda);
    }
    lambda_prev = lambda;
    v = x / xnorm;
  }
  throw ConvergenceError("spectral_norm: power iteration did not converge in " +
                             std::to_string(kSpectralMaxIterations) + " iterations",
                         std::sqrt(std::max(lambda, 0.0)));
}

}  // namespace cssgld
