#pragma once

#include <cstdint>
#include <vector>

#include "cssgld/generator.hpp"
#include "cssgld/numerics.hpp"

namespace cssgld {

/// m x n measurement operator with i.i.d. N(0, 1/m) entries.
struct SensingMatrix {
  Matrix A;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  Eigen::Index m() const { return A.rows(); }
  Eigen::Index n() const { return A.cols(); }

  /// Wraps a hand-built operator (e.g. the identity) with no seed provenance.
  static SensingMatrix from_matrix(Matrix a);
};

SensingMatrix sample_matrix(Eigen::Index m, Eigen::Index n, RngStream& stream);

/// ‖I_n − AᵀA‖ in spectral norm.
double gram_deviation(const SensingMatrix& sensing, double tol = kDefaultSpectralTol);

/// ‖AᵀA‖ = σ_max(A)².
double gram_norm(const SensingMatrix& sensing, double tol = kDefaultSpectralTol);

struct SrecReport {
  double tau = 0.0;
  double offset = 0.0;
  std::size_t n_pairs = 0;
  std::size_t violations = 0;
  /// min over pairs of ‖AΔ‖ − (τ‖Δ‖ − o); negative iff some pair violates.
  double worst_margin = 0.0;
};

/// Pre-computed generator differences G(z) − G(z′) for a fixed pair set, so
/// several (τ, o) settings can be checked on identical data.
struct SrecSample {
  std::vector<double> diff_norm;
  std::vector<double> measured_norm;
};

SrecSample srec_sample(const SensingMatrix& sensing, const GeneratorNet& generator, std::size_t n_pairs,
                       RngStream& stream);
SrecReport srec_evaluate(const SrecSample& sample, double tau, double offset);

/// Monte-Carlo S-REC(τ, o) check over latent pairs drawn uniformly in B(0, R)².
SrecReport srec_check(const SensingMatrix& sensing, const GeneratorNet& generator, std::size_t n_pairs, double tau,
                      double offset, RngStream& stream);

}  // namespace cssgld
