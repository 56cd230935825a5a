#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cssgld/generator.hpp"

namespace cssgld {
namespace {

void write_number(std::ostream& os, double x) {
  os << std::setprecision(17) << x;
}

}  // namespace

std::string net_to_json(const GeneratorNet& net) {
  std::ostringstream os;
  os << "{\"input_dim\":" << net.input_dim() << ",\"radius\":";
  write_number(os, net.radius());
  os << ",\"layers\":[";
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    if (l > 0) os << ',';
    os << "\n{\"w\":[";
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      if (r > 0) os << ',';
      os << '[';
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        if (c > 0) os << ',';
        write_number(os, layer.weight(r, c));
      }
      os << ']';
    }
    os << "],\"b\":[";
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      if (i > 0) os << ',';
      write_number(os, layer.bias[i]);
    }
    os << "],\"act\":\"" << layer.activation.name() << '"';
    if (layer.activation.kind == ActivationKind::elu && layer.activation.elu_scale != 1.0) {
      os << ",\"elu_scale\":";
      write_number(os, layer.activation.elu_scale);
    }
    os << '}';
  }
  os << "]}\n";
  return os.str();
}

GeneratorNet net_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("weight file: parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    const auto input_dim = doc.at("input_dim").get<Eigen::Index>();
    const auto radius = doc.at("radius").get<double>();
    const auto& jlayers = doc.at("layers");
    if (!jlayers.is_array() || jlayers.empty()) throw ParseError("weight file: 'layers' must be a non-empty array");

    std::vector<Layer> layers;
    Eigen::Index in = input_dim;
    for (std::size_t l = 0; l < jlayers.size(); ++l) {
      const auto& jl = jlayers[l];
      const std::string where = "weight file: layer " + std::to_string(l);
      const auto& jw = jl.at("w");
      const auto& jb = jl.at("b");
      const auto rows = static_cast<Eigen::Index>(jw.size());
      if (rows == 0) throw DimensionError(where + ": empty weight matrix");
      Layer layer;
      layer.weight.resize(rows, in);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = jw[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != in) {
          throw DimensionError(where + ": row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                               " entries, expected " + std::to_string(in));
        }
        for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
      if (static_cast<Eigen::Index>(jb.size()) != rows) {
        throw DimensionError(where + ": bias has " + std::to_string(jb.size()) + " entries, expected " +
                             std::to_string(rows));
      }
      layer.bias.resize(rows);
      for (Eigen::Index i = 0; i < rows; ++i) layer.bias[i] = jb[static_cast<std::size_t>(i)].get<double>();
      layer.activation = Activation::parse(jl.at("act").get<std::string>(), jl.value("elu_scale", 1.0));
      layers.push_back(std::move(layer));
      in = rows;
    }
    return GeneratorNet(std::move(layers), radius);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("weight file: ") + e.what());
  }
}

void save_net(const GeneratorNet& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  out << net_to_json(net);
  if (!out) throw InvalidArgument("write to '" + path.string() + "' failed");
}

GeneratorNet load_net(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return net_from_json(buf.str());
}

}  // namespace cssgld
