#include "cssgld/validators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include <json.hpp>

namespace cssgld {

double minimal_gamma(std::span<const ScatterPoint> scatter, double alpha) {
  double gamma = 0.0;
  for (const ScatterPoint& p : scatter) gamma = std::max(gamma, alpha * p.v - p.u);
  // rounding in alpha*v - gamma can still cross u by an ulp; step up until it cannot
  while (!check_supporting_line(scatter, alpha, gamma)) {
    gamma = std::nextafter(gamma, std::numeric_limits<double>::infinity());
  }
  return gamma;
}

bool check_supporting_line(std::span<const ScatterPoint> scatter, double alpha, double gamma) {
  return std::all_of(scatter.begin(), scatter.end(),
                     [&](const ScatterPoint& p) { return p.u >= alpha * p.v - gamma; });
}

SmoothnessEstimate fit_supporting_line(std::vector<ScatterPoint> scatter) {
  SmoothnessEstimate est;
  std::size_t skipped = 0;
  std::erase_if(scatter, [&](const ScatterPoint& p) {
    const bool degenerate = !(p.v > 0.0);
    skipped += degenerate ? 1 : 0;
    return degenerate;
  });
  if (scatter.empty()) throw InvalidArgument("supporting-line fit: every sampled pair is degenerate (z = z')");
  est.n_skipped = skipped;
  est.n_pairs = scatter.size();

  double max_ratio = -std::numeric_limits<double>::infinity();
  double mean_v = 0.0;
  for (const ScatterPoint& p : scatter) {
    max_ratio = std::max(max_ratio, p.u / p.v);
    mean_v += p.v;
  }
  mean_v /= static_cast<double>(scatter.size());
  const double upper = std::max(max_ratio, 0.0);

  const std::size_t n_grid = upper > 0.0 ? kSmoothnessGridSize : 1;
  est.curve.reserve(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double alpha = n_grid == 1 ? 0.0
                         : i + 1 == n_grid ? upper
                                           : upper * static_cast<double>(i) / static_cast<double>(n_grid - 1);
    double gamma = minimal_gamma(scatter, alpha);
    if (!est.curve.empty()) gamma = std::max(gamma, est.curve.back().gamma);
    est.curve.push_back({alpha, gamma});
  }

  std::optional<std::size_t> chosen;
  for (std::size_t i = est.curve.size(); i-- > 0;) {
    if (est.curve[i].alpha > 0.0 && est.curve[i].gamma <= kExactSupportTol) {
      chosen = i;
      break;
    }
  }
  est.exact_support = chosen.has_value();
  if (!chosen) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < est.curve.size(); ++i) {
      const double score = est.curve[i].alpha - est.curve[i].gamma / mean_v;
      if (score > best) {
        best = score;
        chosen = i;
      }
    }
  }
  est.alpha = est.curve[*chosen].alpha;
  est.gamma = est.curve[*chosen].gamma;
  est.scatter = std::move(scatter);
  return est;
}

std::vector<ScatterPoint> strong_smoothness_scatter(const GeneratorNet& generator,
                                                    std::span<const LatentPair> pairs) {
  std::vector<ScatterPoint> out;
  out.reserve(pairs.size());
  ForwardCache cache;
  Vector g_prime, jdir;
  for (const LatentPair& p : pairs) {
    const Vector dz = p.z - p.z_prime;
    g_prime = forward(generator, p.z_prime);
    forward_into(generator, p.z, cache);
    const Vector dg = cache.output() - g_prime;
    jvp_from_cache(generator, cache, dz, jdir);
    out.push_back({dg.dot(jdir), dz.dot(dz)});
  }
  return out;
}

std::vector<ScatterPoint> dissipativity_scatter(const GeneratorNet& generator, const SensingMatrix& sensing,
                                                std::span<const LatentPair> pairs) {
  if (generator.output_dim() != sensing.n()) throw DimensionError("dissipativity: generator/sensing mismatch");
  std::vector<ScatterPoint> out;
  out.reserve(pairs.size());
  ForwardCache cache;
  Vector g_prime, jdir;
  for (const LatentPair& p : pairs) {
    const Vector dz = p.z - p.z_prime;
    g_prime = forward(generator, p.z_prime);
    forward_into(generator, p.z, cache);
    const Vector dmeasured = sensing.A * cache.output() - sensing.A * g_prime;
    jvp_from_cache(generator, cache, dz, jdir);
    const Vector ajdir = sensing.A * jdir;
    out.push_back({dmeasured.dot(ajdir), dz.dot(dz)});
  }
  return out;
}

namespace {

std::vector<LatentPair> draw_pairs(const GeneratorNet& generator, std::size_t n_pairs, RngStream& stream,
                                   const PairSampling& sampling) {
  if (n_pairs < 10) throw InvalidArgument("validators: need at least 10 pairs");
  return sample_latent_pairs(generator.input_dim(), n_pairs, sampling.law, generator.radius(), stream,
                             sampling.fixed_base);
}

std::string law_tag(const PairSampling& sampling) {
  std::string tag = sampling.law == PairLaw::gaussian ? "gaussian" : "uniform_ball";
  if (sampling.fixed_base) tag += "+fixed_base";
  return tag;
}

}  // namespace

SmoothnessEstimate estimate_strong_smoothness(const GeneratorNet& generator, std::span<const LatentPair> pairs) {
  SmoothnessEstimate est = fit_supporting_line(strong_smoothness_scatter(generator, pairs));
  est.outside_theory = generator.outside_theory();
  return est;
}

SmoothnessEstimate estimate_strong_smoothness(const GeneratorNet& generator, std::size_t n_pairs, RngStream& stream,
                                              const PairSampling& sampling) {
  const auto pairs = draw_pairs(generator, n_pairs, stream, sampling);
  SmoothnessEstimate est = estimate_strong_smoothness(generator, pairs);
  est.pair_law = law_tag(sampling);
  return est;
}

SmoothnessEstimate estimate_dissipativity_sensing(const GeneratorNet& generator,
                                                  std::span<const SensingMatrix> operators, std::size_t n_pairs,
                                                  RngStream& stream, const PairSampling& sampling) {
  if (operators.empty()) throw InvalidArgument("dissipativity: need at least one sensing matrix");
  const auto pairs = draw_pairs(generator, n_pairs, stream, sampling);
  std::vector<ScatterPoint> scatter;
  for (const SensingMatrix& a : operators) {
    const auto part = dissipativity_scatter(generator, a, pairs);
    scatter.insert(scatter.end(), part.begin(), part.end());
  }
  SmoothnessEstimate est = fit_supporting_line(std::move(scatter));
  est.pair_law = law_tag(sampling);
  est.outside_theory = generator.outside_theory();
  return est;
}

SmoothnessEstimate estimate_dissipativity_sensing(const GeneratorNet& generator, const SensingMatrix& sensing,
                                                  std::size_t n_pairs, RngStream& stream,
                                                  const PairSampling& sampling) {
  return estimate_dissipativity_sensing(generator, std::span<const SensingMatrix>(&sensing, 1), n_pairs, stream,
                                        sampling);
}

Proposition1Report check_proposition1(const GeneratorNet& generator, std::span<const LatentPair> pairs) {
  const GeneratorConstants c = estimate_generator_constants(generator, pairs);
  Proposition1Report r;
  r.iota = c.iota;
  r.kappa = c.kappa;
  r.M = c.jacobian_lipschitz;
  r.condition_holds = 2.0 * r.iota * r.iota > r.M * r.kappa;
  r.implied_alpha = r.iota * r.iota - r.M * r.kappa / 2.0;
  r.outside_theory = generator.outside_theory();
  r.n_pairs = c.n_pairs;
  return r;
}

Proposition1Report check_proposition1(const GeneratorNet& generator, std::size_t n_pairs, RngStream& stream,
                                      const PairSampling& sampling) {
  const auto pairs = draw_pairs(generator, n_pairs, stream, sampling);
  return check_proposition1(generator, pairs);
}

void write_scatter_csv(const SmoothnessEstimate& estimate, std::ostream& out) {
  out << "u,v\n" << std::setprecision(17);
  for (const ScatterPoint& p : estimate.scatter) out << p.u << ',' << p.v << '\n';
}

std::string estimate_json(const SmoothnessEstimate& e) {
  nlohmann::json j;
  j["alpha"] = e.alpha;
  j["gamma"] = e.gamma;
  j["exact_support"] = e.exact_support;
  j["n_pairs"] = e.n_pairs;
  j["n_skipped"] = e.n_skipped;
  j["pair_law"] = e.pair_law;
  j["outside_theory"] = e.outside_theory;
  nlohmann::json curve = nlohmann::json::array();
  for (const CurvePoint& c : e.curve) curve.push_back({c.alpha, c.gamma});
  j["curve"] = std::move(curve);
  return j.dump(2) + "\n";
}

}  // namespace cssgld
