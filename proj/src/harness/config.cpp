#include "cssgld/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace cssgld::harness {

namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

/// Object reader that rejects unknown keys and names fields in errors.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(field(path_) + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) && !node_.at(key).is_null();
  }
  const json& at(const std::string& key) const { return node_.at(key); }
  std::string name(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return as_number(at(key), name(key));
  }
  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return as_number(at(key), name(key));
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    return as_integer(at(key), name(key));
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    if (!at(key).is_string()) throw ConfigError(name(key) + " must be a string");
    return at(key).get<std::string>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ConfigError(name(key) + " must be true or false");
    return at(key).get<bool>();
  }
  std::vector<double> numbers(const std::string& key) {
    const json& a = at(key);
    if (!a.is_array()) throw ConfigError(name(key) + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_number(a[i], name(key) + "[" + std::to_string(i) + "]"));
    return out;
  }
  std::vector<std::int64_t> integers(const std::string& key) {
    const json& a = at(key);
    if (!a.is_array()) throw ConfigError(name(key) + " must be an array of integers");
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_integer(a[i], name(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (it.value().is_null() || seen_.count(it.key())) continue;
      throw ConfigError("unknown field " + field(join(path_, it.key())));
    }
  }

  static double as_number(const json& v, const std::string& name) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf") return std::numeric_limits<double>::infinity();
    }
    throw ConfigError(name + " must be a number");
  }
  static std::int64_t as_integer(const json& v, const std::string& name) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.0e15) return static_cast<std::int64_t>(x);
    }
    throw ConfigError(name + " must be an integer");
  }

 private:
  static std::string field(const std::string& path) { return path.empty() ? "config" : "'" + path + "'"; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<ActivationKind> parse_activations(Section& s, const std::string& key) {
  std::vector<ActivationKind> out;
  const json& a = s.at(key);
  auto one = [&](const json& v, const std::string& name) {
    if (!v.is_string()) throw ConfigError(name + " must be an activation name");
    try {
      out.push_back(Activation::parse(v.get<std::string>()).kind);
    } catch (const InvalidArgument& e) {
      throw ConfigError(name + ": " + e.what());
    }
  };
  if (a.is_array()) {
    for (std::size_t i = 0; i < a.size(); ++i) one(a[i], s.name(key) + "[" + std::to_string(i) + "]");
  } else {
    one(a, s.name(key));
  }
  return out;
}

GeneratorSource parse_generator(const json& node) {
  Section s(node, "generator");
  GeneratorSource g;
  int sources = 0;
  if (s.has("netspec")) {
    ++sources;
    Section n(s.at("netspec"), "generator.netspec");
    NetSpec spec;
    if (!n.has("widths")) throw ConfigError("generator.netspec.widths is required");
    for (std::int64_t w : n.integers("widths")) {
      if (w < 1) throw ConfigError("generator.netspec.widths entries must be >= 1");
      spec.widths.push_back(static_cast<int>(w));
    }
    if (spec.widths.size() < 2) throw ConfigError("generator.netspec.widths needs at least two entries");
    if (n.has("activations")) {
      spec.activations = parse_activations(n, "activations");
    } else {
      spec.activations = {ActivationKind::elu};
    }
    const std::size_t n_layers = spec.widths.size() - 1;
    if (spec.activations.size() != 1 && spec.activations.size() != n_layers) {
      throw ConfigError("generator.netspec.activations must have 1 or " + std::to_string(n_layers) + " entries");
    }
    spec.weight_scale = n.number("weight_scale", 1.0);
    spec.elu_scale = n.number("elu_scale", 1.0);
    spec.seed = static_cast<std::uint64_t>(n.integer("seed", 0));
    spec.radius = n.optional_number("radius");
    spec.enforce_nondecreasing = n.boolean("enforce_nondecreasing", false);
    if (!(spec.weight_scale > 0.0)) throw ConfigError("generator.netspec.weight_scale must be positive");
    if (spec.radius && !(*spec.radius > 0.0)) throw ConfigError("generator.netspec.radius must be positive");
    n.finish();
    g.netspec = spec;
  }
  if (s.has("weights")) {
    ++sources;
    g.weights = s.string("weights", "");
  }
  if (s.has("builtin")) {
    ++sources;
    g.builtin = s.string("builtin", "");
    if (*g.builtin != "identity" && *g.builtin != "double_well") {
      throw ConfigError("generator.builtin must be 'identity' or 'double_well'");
    }
    g.latent_dim = static_cast<int>(s.integer("latent_dim", 1));
    g.scale = s.number("scale", 5.0);
    g.radius = s.optional_number("radius");
    if (g.latent_dim < 1) throw ConfigError("generator.latent_dim must be >= 1");
    if (g.radius && !(*g.radius > 0.0)) throw ConfigError("generator.radius must be positive");
  }
  s.finish();
  if (sources != 1) {
    throw ConfigError("generator needs exactly one of 'netspec', 'weights', 'builtin' (got " +
                      std::to_string(sources) + ")");
  }
  return g;
}

ProblemConfig parse_problem(const json& node) {
  Section s(node, "problem");
  ProblemConfig p;
  p.f = s.optional_number("f");
  if (s.has("m")) p.m = static_cast<int>(s.integer("m", 0));
  if (p.f && p.m) throw ConfigError("problem: give either 'f' or 'm', not both");
  if (p.f && !(*p.f > 0.0 && *p.f <= 1.0)) throw ConfigError("problem.f must lie in (0, 1]");
  if (p.m && *p.m < 1) throw ConfigError("problem.m must be >= 1");
  p.sensing = s.string("sensing", "gaussian");
  if (p.sensing != "gaussian" && p.sensing != "identity") {
    throw ConfigError("problem.sensing must be 'gaussian' or 'identity'");
  }
  if (s.has("z_star")) p.z_star = s.numbers("z_star");
  p.noise_norm = s.number("noise_norm", 0.0);
  if (!(p.noise_norm >= 0.0) || !std::isfinite(p.noise_norm)) throw ConfigError("problem.noise_norm must be >= 0");
  s.finish();
  return p;
}

Method parse_method_field(const json& v, const std::string& name) {
  if (!v.is_string()) throw ConfigError(name + " must be a method name");
  try {
    return parse_method(v.get<std::string>());
  } catch (const InvalidArgument&) {
    throw ConfigError(name + " must be one of sgld, gd, mh_sgld");
  }
}

SamplerSettings parse_sampler(const json& node) {
  Section s(node, "sampler");
  SamplerSettings c;
  if (s.has("eta")) {
    const json& v = s.at("eta");
    if (!(v.is_string() && v.get<std::string>() == "theory")) c.eta = Section::as_number(v, "sampler.eta");
  }
  c.beta = s.number("beta", 1.0);
  c.proposal_radius = s.optional_number("r");
  c.k_max = s.integer("k_max", 1000);
  if (s.has("record_every")) c.record_every = s.integer("record_every", 1);
  if (s.has("lipschitz")) {
    const json& v = s.at("lipschitz");
    if (!(v.is_string() && v.get<std::string>() == "estimated")) {
      c.lipschitz = Section::as_number(v, "sampler.lipschitz");
    }
  }
  const std::int64_t samples = s.integer("constants_samples", 200);
  if (samples < 10) throw ConfigError("sampler.constants_samples must be >= 10");
  c.constants_samples = static_cast<std::size_t>(samples);
  if (s.has("methods")) {
    const json& a = s.at("methods");
    if (!a.is_array() || a.empty()) throw ConfigError("sampler.methods must be a non-empty array");
    c.methods.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      c.methods.push_back(parse_method_field(a[i], "sampler.methods[" + std::to_string(i) + "]"));
    }
  }
  s.finish();

  if (c.eta && !(*c.eta >= 0.0 && std::isfinite(*c.eta))) throw ConfigError("sampler.eta must be finite and >= 0");
  if (!(c.beta >= 0.0)) throw ConfigError("sampler.beta must be >= 0 or \"inf\"");
  if (!c.eta && !std::isfinite(c.beta)) throw ConfigError("sampler.eta: theory schedule needs a finite beta");
  if (c.proposal_radius && !(*c.proposal_radius > 0.0)) throw ConfigError("sampler.r must be positive");
  if (c.k_max < 0) throw ConfigError("sampler.k_max must be >= 0");
  if (c.record_every && *c.record_every < 1) throw ConfigError("sampler.record_every must be >= 1");
  if (c.lipschitz && !(*c.lipschitz > 0.0)) throw ConfigError("sampler.lipschitz must be positive");
  return c;
}

PhaseSettings parse_phase(const json& node) {
  Section s(node, "phase");
  PhaseSettings p;
  if (s.has("f_grid")) p.f_grid = s.numbers("f_grid");
  s.finish();
  if (p.f_grid.empty()) throw ConfigError("phase.f_grid must not be empty");
  for (double f : p.f_grid) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("phase.f_grid entries must lie in (0, 1]");
  }
  return p;
}

ValidateSettings parse_validate(const json& node) {
  Section s(node, "validate");
  ValidateSettings v;
  const std::int64_t pairs = s.integer("n_pairs", 500);
  const std::int64_t matrices = s.integer("n_matrices", 5);
  if (pairs < 10) throw ConfigError("validate.n_pairs must be >= 10");
  if (matrices < 1) throw ConfigError("validate.n_matrices must be >= 1");
  v.n_pairs = static_cast<std::size_t>(pairs);
  v.n_matrices = static_cast<std::size_t>(matrices);
  v.f = s.number("f", 0.5);
  if (!(v.f > 0.0 && v.f <= 1.0)) throw ConfigError("validate.f must lie in (0, 1]");
  const std::string law = s.string("pair_law", "gaussian");
  if (law == "gaussian") {
    v.pair_law = PairLaw::gaussian;
  } else if (law == "uniform_ball") {
    v.pair_law = PairLaw::uniform_ball;
  } else {
    throw ConfigError("validate.pair_law must be 'gaussian' or 'uniform_ball'");
  }
  if (s.has("fixed_base")) v.fixed_base = s.numbers("fixed_base");
  s.finish();
  return v;
}

ChainLabSettings parse_chain_lab(const json& node) {
  Section s(node, "chain_lab");
  ChainLabSettings c;
  const std::int64_t chains = s.integer("n_chains", 1000);
  if (chains < 0) throw ConfigError("chain_lab.n_chains must be >= 0");
  c.n_chains = static_cast<std::size_t>(chains);
  if (s.has("checkpoints")) c.checkpoints = s.integers("checkpoints");
  for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
    if (c.checkpoints[i] < 0 || (i > 0 && c.checkpoints[i] <= c.checkpoints[i - 1])) {
      throw ConfigError("chain_lab.checkpoints must be nonnegative and strictly increasing");
    }
  }
  if (s.has("resolution")) c.resolution = static_cast<int>(s.integer("resolution", 0));
  if (s.has("tv_resolution")) c.tv_resolution = static_cast<int>(s.integer("tv_resolution", 0));
  if (c.resolution && *c.resolution < 2) throw ConfigError("chain_lab.resolution must be >= 2");
  if (c.tv_resolution && *c.tv_resolution < 2) throw ConfigError("chain_lab.tv_resolution must be >= 2");
  if (s.has("betas")) c.betas = s.numbers("betas");
  for (double b : c.betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("chain_lab.betas entries must be finite and >= 0");
  }
  if (s.has("method")) c.method = parse_method_field(s.at("method"), "chain_lab.method");
  s.finish();
  return c;
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::recover: return "recover";
    case ExperimentKind::compare: return "compare";
    case ExperimentKind::phase_transition: return "phase_transition";
    case ExperimentKind::validate: return "validate";
    case ExperimentKind::chain_lab: return "chain_lab";
  }
  return "recover";
}

ExperimentKind parse_kind(std::string_view name) {
  for (ExperimentKind k : {ExperimentKind::recover, ExperimentKind::compare, ExperimentKind::phase_transition,
                           ExperimentKind::validate, ExperimentKind::chain_lab}) {
    if (kind_name(k) == name) return k;
  }
  throw ConfigError("unknown experiment kind '" + std::string(name) +
                    "' (expected recover, compare, phase_transition, validate, chain_lab)");
}

void apply_override(nlohmann::json& document, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &document;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set key '" + key + "' has an empty component");
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw ConfigError("--set key '" + key + "' descends into a non-object");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

ExperimentConfig parse_config(const nlohmann::json& document, std::optional<ExperimentKind> kind) {
  Section s(document, "");
  ExperimentConfig c;
  c.document = document;
  if (s.has("kind")) {
    const ExperimentKind declared = parse_kind(s.string("kind", ""));
    c.kind = kind.value_or(declared);
  } else if (kind) {
    c.kind = *kind;
  }
  c.document["kind"] = std::string(kind_name(c.kind));

  if (!s.has("generator")) throw ConfigError("'generator' is required");
  c.generator = parse_generator(s.at("generator"));
  if (s.has("problem")) c.problem = parse_problem(s.at("problem"));
  if (s.has("seeds")) {
    c.seeds.clear();
    for (std::int64_t seed : s.integers("seeds")) {
      if (seed < 0) throw ConfigError("seeds entries must be >= 0");
      c.seeds.push_back(static_cast<std::uint64_t>(seed));
    }
    if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  }
  if (s.has("sampler")) c.sampler = parse_sampler(s.at("sampler"));
  if (s.has("phase")) c.phase = parse_phase(s.at("phase"));
  if (s.has("validate")) c.validate = parse_validate(s.at("validate"));
  if (s.has("chain_lab")) c.chain_lab = parse_chain_lab(s.at("chain_lab"));
  c.out = s.string("out", "out");
  s.finish();
  c.document.erase("out");

  if (c.kind == ExperimentKind::compare) {
    c.sampler.methods = {Method::gd, Method::sgld};
  } else if (c.sampler.methods.empty()) {
    c.sampler.methods = c.kind == ExperimentKind::phase_transition ? std::vector<Method>{Method::gd, Method::sgld}
                                                                    : std::vector<Method>{Method::sgld};
  }
  return c;
}

nlohmann::json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON at byte " + std::to_string(e.byte));
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides,
                             std::optional<ExperimentKind> kind) {
  json document = read_config_file(path);
  for (const std::string& o : overrides) apply_override(document, o);
  return parse_config(document, kind);
}

}  // namespace cssgld::harness
