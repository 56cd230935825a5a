#include "cssgld/sensing.hpp"

#include <algorithm>
#include <limits>

namespace cssgld {

SensingMatrix SensingMatrix::from_matrix(Matrix a) {
  if (a.rows() < 1 || a.cols() < 1) throw DimensionError("sensing matrix must be non-empty");
  SensingMatrix s;
  s.A = std::move(a);
  return s;
}

SensingMatrix sample_matrix(Eigen::Index m, Eigen::Index n, RngStream& stream) {
  if (m < 1 || n < 1) throw InvalidArgument("sample_matrix: m and n must be >= 1");
  SensingMatrix s;
  s.seed = stream.seed();
  s.stream_id = stream.stream_id();
  s.A.resize(m, n);
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) s.A(r, c) = sd * stream.gaussian();
  }
  return s;
}

double gram_deviation(const SensingMatrix& sensing, double tol) {
  const Eigen::Index n = sensing.n();
  const Matrix gram = sensing.A.transpose() * sensing.A;
  return spectral_norm(Matrix::Identity(n, n) - gram, tol);
}

double gram_norm(const SensingMatrix& sensing, double tol) {
  const double s = spectral_norm(sensing.A, tol);
  return s * s;
}

SrecSample srec_sample(const SensingMatrix& sensing, const GeneratorNet& generator, std::size_t n_pairs,
                       RngStream& stream) {
  if (generator.output_dim() != sensing.n()) {
    throw DimensionError("srec_check: generator emits " + std::to_string(generator.output_dim()) +
                         " entries, sensing matrix expects " + std::to_string(sensing.n()));
  }
  SrecSample sample;
  sample.diff_norm.reserve(n_pairs);
  sample.measured_norm.reserve(n_pairs);
  const Eigen::Index d = generator.input_dim();
  const double radius = generator.radius();
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const Vector z = uniform_in_ball(stream, d, radius);
    const Vector zp = uniform_in_ball(stream, d, radius);
    const Vector diff = forward(generator, z) - forward(generator, zp);
    sample.diff_norm.push_back(diff.norm());
    sample.measured_norm.push_back((sensing.A * diff).norm());
  }
  return sample;
}

SrecReport srec_evaluate(const SrecSample& sample, double tau, double offset) {
  SrecReport report;
  report.tau = tau;
  report.offset = offset;
  report.n_pairs = sample.diff_norm.size();
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < report.n_pairs; ++i) {
    const double margin = sample.measured_norm[i] - (tau * sample.diff_norm[i] - offset);
    if (margin < 0.0) ++report.violations;
    report.worst_margin = std::min(report.worst_margin, margin);
  }
  return report;
}

SrecReport srec_check(const SensingMatrix& sensing, const GeneratorNet& generator, std::size_t n_pairs, double tau,
                      double offset, RngStream& stream) {
  return srec_evaluate(srec_sample(sensing, generator, n_pairs, stream), tau, offset);
}

}  // namespace cssgld
