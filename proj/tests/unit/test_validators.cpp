#include <doctest.h>

#include <algorithm>
#include <limits>
#include <sstream>

#include "cssgld/validators.hpp"
#include "oracles.hpp"

using namespace cssgld;

namespace {

std::shared_ptr<const GeneratorNet> scaled_identity(int d, double c) {
  return std::make_shared<const GeneratorNet>(linear_net(c * Matrix::Identity(d, d), 3.0 * std::sqrt(d)));
}

void check_estimate_invariants(const SmoothnessEstimate& e) {
  CHECK(check_supporting_line(e.scatter, e.alpha, e.gamma));
  for (const ScatterPoint& p : e.scatter) REQUIRE(p.u >= e.alpha * p.v - e.gamma);
  REQUIRE(e.curve.size() >= 1);
  for (std::size_t i = 1; i < e.curve.size(); ++i) {
    CHECK(e.curve[i].alpha >= e.curve[i - 1].alpha);
    CHECK(e.curve[i].gamma >= e.curve[i - 1].gamma);
  }
  double min_u = std::numeric_limits<double>::infinity();
  for (const ScatterPoint& p : e.scatter) min_u = std::min(min_u, p.u);
  CHECK(e.curve.front().alpha == 0.0);
  CHECK(e.curve.front().gamma == doctest::Approx(std::max(0.0, -min_u)).epsilon(1e-12));
  bool on_curve = false;
  for (const CurvePoint& c : e.curve) on_curve |= (c.alpha == e.alpha && c.gamma == e.gamma);
  CHECK(on_curve);
}

}  // namespace

TEST_SUITE("validators") {

TEST_CASE("identity and scaled identity generators") {
  RngStream s(0, 10);
  const SmoothnessEstimate id = estimate_strong_smoothness(*scaled_identity(3, 1.0), 200, s);
  CHECK(id.alpha == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id.gamma == 0.0);
  CHECK(id.exact_support);
  for (const ScatterPoint& p : id.scatter) CHECK(p.u == doctest::Approx(p.v).epsilon(1e-14));
  check_estimate_invariants(id);

  RngStream t(0, 10);
  const SmoothnessEstimate sc = estimate_strong_smoothness(*scaled_identity(3, 1.7), 200, t);
  CHECK(sc.alpha == doctest::Approx(1.7 * 1.7).epsilon(1e-12));
  CHECK(sc.gamma <= kExactSupportTol);
}

TEST_CASE("random ELU nets have positive alpha") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto g = oracle::random_generator({4, 8, 16}, ActivationKind::elu, seed);
    RngStream s(seed, 10);
    const SmoothnessEstimate e = estimate_strong_smoothness(*g, 500, s);
    CHECK(e.n_pairs == 500);
    CHECK(e.alpha > 0.0);
    check_estimate_invariants(e);
  }
}

TEST_CASE("identity sensing reduces to strong smoothness bit for bit") {
  auto g = oracle::random_generator({3, 6, 12}, ActivationKind::tanh, 4);
  RngStream a(4, 10), b(4, 10);
  const SmoothnessEstimate plain = estimate_strong_smoothness(*g, 300, a);
  const SensingMatrix id = SensingMatrix::from_matrix(Matrix::Identity(12, 12));
  const SmoothnessEstimate sensed = estimate_dissipativity_sensing(*g, id, 300, b);
  CHECK(plain.alpha == sensed.alpha);
  CHECK(plain.gamma == sensed.gamma);
  REQUIRE(plain.scatter.size() == sensed.scatter.size());
  for (std::size_t i = 0; i < plain.scatter.size(); ++i) {
    CHECK(plain.scatter[i].u == sensed.scatter[i].u);
    CHECK(plain.scatter[i].v == sensed.scatter[i].v);
  }
}

TEST_CASE("tall Gaussian sensing keeps alpha near one") {
  auto g = scaled_identity(4, 1.0);
  for (int ratio : {10, 40}) {
    RngStream s(2, 20);
    const SensingMatrix a = sample_matrix(4 * ratio, 4, s);
    const double dev = gram_deviation(a);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.A.transpose() * a.A);
    const double lambda_min = es.eigenvalues()(0);
    RngStream t(2, 11);
    const SmoothnessEstimate e = estimate_dissipativity_sensing(*g, a, 300, t);
    // u_A = |A dz|^2, so the exact-support alpha is the smallest sampled Rayleigh quotient
    CHECK(e.alpha >= 1.0 - dev - 1e-9);
    CHECK(e.alpha >= lambda_min - 1e-9);
    CHECK(e.alpha <= lambda_min + 0.1);
    if (ratio == 40) CHECK(std::abs(e.alpha - 1.0) <= 0.3);
    check_estimate_invariants(e);
  }
}

TEST_CASE("compressive sensing on an ELU net reports a supporting line") {
  auto g = oracle::random_generator({4, 16, 40}, ActivationKind::elu, 1);
  std::vector<SensingMatrix> ops;
  for (std::uint64_t i = 0; i < 5; ++i) {
    RngStream s(1, 20 + i);
    ops.push_back(sample_matrix(4, 40, s));
  }
  RngStream t(1, 11);
  const SmoothnessEstimate e = estimate_dissipativity_sensing(*g, ops, 200, t);
  CHECK(e.scatter.size() == 1000);
  CHECK(std::isfinite(e.alpha));
  check_estimate_invariants(e);
}

TEST_CASE("proposition 1 closed forms") {
  RngStream s(0, 12);
  const Proposition1Report id = check_proposition1(*scaled_identity(3, 1.0), 100, s);
  CHECK(id.iota == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id.kappa == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id.M == doctest::Approx(0.0));
  CHECK(id.condition_holds);

  const Matrix w = (Eigen::Vector2d(4.0, 1.0)).asDiagonal();
  GeneratorNet lin = linear_net(w, 3.0);
  RngStream t(0, 12);
  const Proposition1Report r = check_proposition1(lin, 500, t);
  CHECK(r.iota >= 1.0 - 1e-12);
  CHECK(r.kappa <= 4.0 + 1e-12);
  CHECK(r.M == doctest::Approx(0.0));
  CHECK(r.condition_holds);
}

TEST_CASE("proposition 1 bound agrees with the direct estimate on sigmoid nets") {
  int held = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NetSpec spec;
    spec.widths = {2, 4, 8};
    spec.activations = {ActivationKind::sigmoid};
    spec.weight_scale = 0.5 + 0.25 * static_cast<double>(seed % 4);
    spec.seed = seed;
    RngStream ns(seed, 0);
    const GeneratorNet g = random_net(spec, ns);
    RngStream s(seed, 12);
    const auto pairs = sample_latent_pairs(2, 500, PairLaw::gaussian, g.radius(), s);
    const Proposition1Report r = check_proposition1(g, pairs);
    CHECK(r.iota <= r.kappa);
    CHECK(r.iota > 0.0);
    if (!r.condition_holds) continue;
    ++held;
    const SmoothnessEstimate e = estimate_strong_smoothness(g, pairs);
    CHECK(e.alpha >= r.implied_alpha - 0.05);
  }
  MESSAGE("condition held on " << held << " of 10 sigmoid nets");
}

TEST_CASE("relu nets are flagged and degenerate scatters rejected") {
  auto g = oracle::random_generator({2, 4}, ActivationKind::relu, 3);
  RngStream s(3, 10);
  CHECK(estimate_strong_smoothness(*g, 50, s).outside_theory);
  CHECK(check_proposition1(*g, 50, s).outside_theory);
  CHECK_THROWS_AS(estimate_strong_smoothness(*g, 5, s), InvalidArgument);
  std::vector<ScatterPoint> flat(5, ScatterPoint{0.0, 0.0});
  CHECK_THROWS_AS(fit_supporting_line(flat), InvalidArgument);
  std::vector<ScatterPoint> mixed = {{1.0, 1.0}, {0.0, 0.0}, {2.0, 1.0}};
  const SmoothnessEstimate e = fit_supporting_line(mixed);
  CHECK(e.n_skipped == 1);
  CHECK(e.n_pairs == 2);
}

TEST_CASE("negative scatter falls back to the documented trade-off") {
  std::vector<ScatterPoint> pts = {{-1.0, 1.0}, {3.0, 2.0}, {0.5, 4.0}};
  const SmoothnessEstimate e = fit_supporting_line(pts);
  CHECK_FALSE(e.exact_support);
  double mean_v = (1.0 + 2.0 + 4.0) / 3.0;
  double best = -1e300;
  for (const CurvePoint& c : e.curve) best = std::max(best, c.alpha - c.gamma / mean_v);
  CHECK(e.alpha - e.gamma / mean_v == best);
  check_estimate_invariants(e);
}

TEST_CASE("fixed base pairs and scatter export") {
  auto g = oracle::random_generator({2, 4, 6}, ActivationKind::elu, 8);
  PairSampling fixed;
  fixed.fixed_base = Vector::Zero(2);
  RngStream s(8, 10);
  const SmoothnessEstimate e = estimate_strong_smoothness(*g, 40, s, fixed);
  CHECK(e.pair_law == "gaussian+fixed_base");
  std::ostringstream out;
  write_scatter_csv(e, out);
  const std::string text = out.str();
  CHECK(text.rfind("u,v\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 41);
}

}
