#include "cssgld/generator.hpp"

#include <algorithm>
#include <cmath>

namespace cssgld {

double Activation::value(double x) const {
  switch (kind) {
    case ActivationKind::elu:
      return x > 0.0 ? x : elu_scale * std::expm1(x);
    case ActivationKind::sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::tanh:
      return std::tanh(x);
    case ActivationKind::relu:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::identity:
      return x;
  }
  return x;
}

double Activation::derivative(double x) const {
  switch (kind) {
    case ActivationKind::elu:
      return x > 0.0 ? 1.0 : elu_scale * std::exp(x);
    case ActivationKind::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case ActivationKind::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::relu:
      return x > 0.0 ? 1.0 : 0.0;  // subgradient 0 at the kink
    case ActivationKind::identity:
      return 1.0;
  }
  return 1.0;
}

std::string_view Activation::name() const {
  switch (kind) {
    case ActivationKind::elu: return "elu";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::relu: return "relu";
    case ActivationKind::identity: return "identity";
  }
  return "identity";
}

Activation Activation::parse(std::string_view name, double elu_scale) {
  if (name == "elu") return {ActivationKind::elu, elu_scale};
  if (name == "sigmoid") return {ActivationKind::sigmoid, elu_scale};
  if (name == "tanh") return {ActivationKind::tanh, elu_scale};
  if (name == "relu") return {ActivationKind::relu, elu_scale};
  if (name == "identity" || name == "linear") return {ActivationKind::identity, elu_scale};
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

GeneratorNet::GeneratorNet(std::vector<Layer> layers, double radius, bool enforce_nondecreasing)
    : layers_(std::move(layers)), radius_(radius) {
  if (layers_.empty()) throw InvalidArgument("generator needs at least one layer");
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
    throw InvalidArgument("generator domain radius must be positive and finite");
  }
  Eigen::Index in = layers_.front().weight.cols();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const std::string where = "layer " + std::to_string(l);
    if (layer.weight.rows() == 0 || layer.weight.cols() == 0) throw DimensionError(where + ": empty weight");
    if (layer.weight.cols() != in) {
      throw DimensionError(where + ": weight has " + std::to_string(layer.weight.cols()) +
                           " columns but the previous layer emits " + std::to_string(in));
    }
    if (layer.bias.size() != layer.weight.rows()) {
      throw DimensionError(where + ": bias has " + std::to_string(layer.bias.size()) +
                           " entries but weight has " + std::to_string(layer.weight.rows()) + " rows");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) throw NumericError(where + ": non-finite weight");
    if (layer.activation.kind == ActivationKind::elu && !(layer.activation.elu_scale > 0.0)) {
      throw InvalidArgument(where + ": elu scale must be positive");
    }
    in = layer.weight.rows();
  }
  if (enforce_nondecreasing && !nondecreasing_widths()) {
    throw InvalidArgument("generator layer widths must be non-decreasing");
  }
}

bool GeneratorNet::outside_theory() const {
  return std::any_of(layers_.begin(), layers_.end(),
                     [](const Layer& l) { return l.activation.outside_theory(); });
}

bool GeneratorNet::nondecreasing_widths() const {
  Eigen::Index prev = input_dim();
  for (const Layer& l : layers_) {
    if (l.weight.rows() < prev) return false;
    prev = l.weight.rows();
  }
  return true;
}

void forward_into(const GeneratorNet& net, const Vector& z, ForwardCache& cache) {
  if (z.size() != net.input_dim()) {
    throw DimensionError("forward: latent has " + std::to_string(z.size()) + " entries, generator expects " +
                         std::to_string(net.input_dim()));
  }
  const auto& layers = net.layers();
  cache.pre.resize(layers.size());
  cache.post.resize(layers.size());
  const Vector* input = &z;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    Vector& pre = cache.pre[l];
    Vector& post = cache.post[l];
    pre.resize(layer.weight.rows());
    post.resize(layer.weight.rows());
    pre.noalias() = layer.weight * *input;
    pre += layer.bias;
    if (layer.activation.kind == ActivationKind::identity) {
      post = pre;
    } else {
      for (Eigen::Index i = 0; i < pre.size(); ++i) post[i] = layer.activation.value(pre[i]);
    }
    if (!post.allFinite()) throw NumericError("forward: non-finite value in layer " + std::to_string(l));
    input = &post;
  }
}

void vjp_from_cache(const GeneratorNet& net, ForwardCache& cache, const Vector& u, Vector& out) {
  const auto& layers = net.layers();
  if (u.size() != net.output_dim()) {
    throw DimensionError("vjp: cotangent has " + std::to_string(u.size()) + " entries, generator emits " +
                         std::to_string(net.output_dim()));
  }
  Vector& g = cache.scratch_a;
  Vector& next = cache.scratch_b;
  g = u;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Layer& layer = layers[l];
    if (layer.activation.kind != ActivationKind::identity) {
      const Vector& pre = cache.pre[l];
      for (Eigen::Index i = 0; i < g.size(); ++i) g[i] *= layer.activation.derivative(pre[i]);
    }
    next.resize(layer.weight.cols());
    next.noalias() = layer.weight.transpose() * g;
    g.swap(next);
  }
  out = g;
}

void jvp_from_cache(const GeneratorNet& net, ForwardCache& cache, const Vector& v, Vector& out) {
  const auto& layers = net.layers();
  if (v.size() != net.input_dim()) {
    throw DimensionError("jvp: tangent has " + std::to_string(v.size()) + " entries, generator expects " +
                         std::to_string(net.input_dim()));
  }
  Vector& t = cache.scratch_a;
  Vector& next = cache.scratch_b;
  t = v;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    next.resize(layer.weight.rows());
    next.noalias() = layer.weight * t;
    if (layer.activation.kind != ActivationKind::identity) {
      const Vector& pre = cache.pre[l];
      for (Eigen::Index i = 0; i < next.size(); ++i) next[i] *= layer.activation.derivative(pre[i]);
    }
    t.swap(next);
  }
  out = t;
}

Vector forward(const GeneratorNet& net, const Vector& z) {
  ForwardCache cache;
  forward_into(net, z, cache);
  return cache.output();
}

Matrix jacobian(const GeneratorNet& net, const Vector& z) {
  ForwardCache cache;
  forward_into(net, z, cache);
  const auto& layers = net.layers();
  Matrix j = Matrix::Identity(net.input_dim(), net.input_dim());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix next = layers[l].weight * j;
    if (layers[l].activation.kind != ActivationKind::identity) {
      for (Eigen::Index i = 0; i < next.rows(); ++i) next.row(i) *= layers[l].activation.derivative(cache.pre[l][i]);
    }
    j = std::move(next);
  }
  return j;
}

Vector jvp(const GeneratorNet& net, const Vector& z, const Vector& v) {
  ForwardCache cache;
  forward_into(net, z, cache);
  Vector out;
  jvp_from_cache(net, cache, v, out);
  return out;
}

Vector vjp(const GeneratorNet& net, const Vector& z, const Vector& u) {
  ForwardCache cache;
  forward_into(net, z, cache);
  Vector out;
  vjp_from_cache(net, cache, u, out);
  return out;
}

double default_domain_radius(Eigen::Index latent_dim) {
  return 3.0 * std::sqrt(static_cast<double>(latent_dim));
}

GeneratorNet random_net(const NetSpec& spec, RngStream& stream) {
  if (spec.widths.size() < 2) throw InvalidArgument("netspec: need at least two widths");
  for (int w : spec.widths) {
    if (w < 1) throw InvalidArgument("netspec: widths must be positive");
  }
  const std::size_t n_layers = spec.widths.size() - 1;
  if (spec.activations.size() != 1 && spec.activations.size() != n_layers) {
    throw InvalidArgument("netspec: expected 1 or " + std::to_string(n_layers) + " activations, got " +
                          std::to_string(spec.activations.size()));
  }
  if (!(spec.weight_scale > 0.0)) throw InvalidArgument("netspec: weight scale must be positive");

  std::vector<Layer> layers;
  layers.reserve(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int fan_in = spec.widths[l];
    const int fan_out = spec.widths[l + 1];
    const double sd = spec.weight_scale / std::sqrt(static_cast<double>(fan_in));
    Layer layer;
    layer.weight.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = sd * stream.gaussian();
    }
    layer.bias = Vector::Zero(fan_out);
    const ActivationKind kind = spec.activations.size() == 1 ? spec.activations.front() : spec.activations[l];
    layer.activation = Activation{kind, spec.elu_scale};
    layers.push_back(std::move(layer));
  }
  const double radius = spec.radius.value_or(default_domain_radius(spec.widths.front()));
  return GeneratorNet(std::move(layers), radius, spec.enforce_nondecreasing);
}

GeneratorNet linear_net(const Matrix& weight, double radius) {
  std::vector<Layer> layers;
  layers.push_back(Layer{weight, Vector::Zero(weight.rows()), Activation{}});
  return GeneratorNet(std::move(layers), radius);
}

}  // namespace cssgld
