#include "cssgld/numerics.hpp"

#include <numbers>

namespace cssgld {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), key_(mix64(seed ^ mix64(stream_id + kGolden))) {}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t c = counter_++;
  return mix64(mix64(c * kGolden + key_) ^ key_);
}

double RngStream::uniform() {
  // 53 random bits, shifted off zero by half an ulp.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(theta);
  has_spare_ = true;
  return radius * std::cos(theta);
}

Vector gaussian_vector(RngStream& stream, Eigen::Index d) {
  if (d < 1) throw InvalidArgument("gaussian_vector: dimension must be >= 1");
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = stream.gaussian();
  return v;
}

Vector uniform_on_sphere(RngStream& stream, Eigen::Index d, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("uniform_on_sphere: radius must be nonnegative");
  Vector g = gaussian_vector(stream, d);
  double norm = g.norm();
  while (norm == 0.0) {
    g = gaussian_vector(stream, d);
    norm = g.norm();
  }
  return g * (radius / norm);
}

Vector uniform_in_ball(RngStream& stream, Eigen::Index d, double radius) {
  Vector direction = uniform_on_sphere(stream, d, 1.0);
  const double scale = radius * std::pow(stream.uniform(), 1.0 / static_cast<double>(d));
  return direction * scale;
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) {
    throw DimensionError("matvec: matrix has " + std::to_string(m.cols()) + " columns, vector has " +
                         std::to_string(v.size()) + " entries");
  }
  return m * v;
}

Vector matvec_transpose(const Matrix& m, const Vector& v) {
  if (m.rows() != v.size()) {
    throw DimensionError("matvec_transpose: matrix has " + std::to_string(m.rows()) +
                         " rows, vector has " + std::to_string(v.size()) + " entries");
  }
  return m.transpose() * v;
}

}  // namespace cssgld
