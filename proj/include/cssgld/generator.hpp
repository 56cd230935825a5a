#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cssgld/numerics.hpp"

namespace cssgld {

enum class ActivationKind { elu, sigmoid, tanh, relu, identity };

struct Activation {
  ActivationKind kind = ActivationKind::identity;
  double elu_scale = 1.0;

  double value(double x) const;
  double derivative(double x) const;
  /// relu is the only kind outside the continuously-differentiable, strictly
  /// increasing class the convergence theory covers.
  bool outside_theory() const { return kind == ActivationKind::relu; }

  std::string_view name() const;
  static Activation parse(std::string_view name, double elu_scale = 1.0);
};

/// One dense layer: act(weight * x + bias), weight stored output x input.
struct Layer {
  Matrix weight;
  Vector bias;
  Activation activation;
};

/// Feed-forward generator G: R^d -> R^n on the latent domain B(0, radius).
class GeneratorNet {
 public:
  GeneratorNet(std::vector<Layer> layers, double radius, bool enforce_nondecreasing = false);

  Eigen::Index input_dim() const { return layers_.front().weight.cols(); }
  Eigen::Index output_dim() const { return layers_.back().weight.rows(); }
  double radius() const { return radius_; }
  const std::vector<Layer>& layers() const { return layers_; }

  bool outside_theory() const;
  bool nondecreasing_widths() const;

 private:
  std::vector<Layer> layers_;
  double radius_;
};

/// Per-layer pre-activations and outputs of one forward pass. Reusable across
/// calls so hot loops never allocate.
struct ForwardCache {
  std::vector<Vector> pre;
  std::vector<Vector> post;
  Vector scratch_a;
  Vector scratch_b;

  const Vector& output() const { return post.back(); }
};

void forward_into(const GeneratorNet& net, const Vector& z, ForwardCache& cache);
/// Jᵀu using a cache filled by forward_into at the same z.
void vjp_from_cache(const GeneratorNet& net, ForwardCache& cache, const Vector& u, Vector& out);
/// Jv using a cache filled by forward_into at the same z.
void jvp_from_cache(const GeneratorNet& net, ForwardCache& cache, const Vector& v, Vector& out);

Vector forward(const GeneratorNet& net, const Vector& z);
Matrix jacobian(const GeneratorNet& net, const Vector& z);
Vector jvp(const GeneratorNet& net, const Vector& z, const Vector& v);
Vector vjp(const GeneratorNet& net, const Vector& z, const Vector& u);

struct NetSpec {
  std::vector<int> widths;                   // d_0 (latent), d_1, ..., d_L (signal)
  std::vector<ActivationKind> activations;   // one per layer, or a single kind for all
  double weight_scale = 1.0;                 // sigma_w; weights ~ N(0, sigma_w^2 / fan_in)
  double elu_scale = 1.0;
  std::uint64_t seed = 0;
  std::optional<double> radius;              // default 3 sqrt(d)
  bool enforce_nondecreasing = false;
};

double default_domain_radius(Eigen::Index latent_dim);

GeneratorNet random_net(const NetSpec& spec, RngStream& stream);

/// Single identity-activation layer G(z) = weight z.
GeneratorNet linear_net(const Matrix& weight, double radius);

void save_net(const GeneratorNet& net, const std::filesystem::path& path);
GeneratorNet load_net(const std::filesystem::path& path);
std::string net_to_json(const GeneratorNet& net);
GeneratorNet net_from_json(std::string_view text);

}  // namespace cssgld
