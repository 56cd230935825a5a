#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cssgld/chain_lab.hpp"
#include "cssgld/harness/config.hpp"
#include "cssgld/harness/experiments.hpp"
#include "cssgld/harness/output.hpp"
#include "cssgld/parallel.hpp"
#include "cssgld/samplers.hpp"
#include "cssgld/validators.hpp"

using namespace cssgld;
namespace fs = std::filesystem;
namespace h = cssgld::harness;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cssgld_acceptance" / name;
  fs::remove_all(dir);
  return dir;
}

fs::path config_path(const std::string& name) { return fs::path(CSSGLD_SOURCE_DIR) / "configs" / (name + ".json"); }

h::ExperimentConfig load(const std::string& name, const fs::path& out, std::vector<std::string> overrides = {}) {
  overrides.push_back("out=\"" + out.string() + "\"");
  return h::load_config(config_path(name), overrides);
}

std::shared_ptr<const GeneratorNet> smooth_net(std::vector<int> widths, ActivationKind act, std::uint64_t seed) {
  NetSpec spec;
  spec.widths = std::move(widths);
  spec.activations = {act};
  spec.seed = seed;
  RngStream s(seed, 0);
  return std::make_shared<const GeneratorNet>(random_net(spec, s));
}

// ------------------------------------------------------------------ criteria

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  const ActivationKind kinds[] = {ActivationKind::elu, ActivationKind::sigmoid, ActivationKind::tanh};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RngStream s(seed, 100);
    const int d = 1 + static_cast<int>(s.next_u64() % 16);
    const int hidden = d + static_cast<int>(s.next_u64() % 32);
    const int n = hidden + static_cast<int>(s.next_u64() % (129 - hidden));
    const int m = 1 + static_cast<int>(s.next_u64() % n);
    auto g = smooth_net({d, hidden, n}, kinds[seed % 3], seed);
    Problem p = make_problem(g, sample_matrix(m, n, s), uniform_in_ball(s, d, g->radius() * 0.5));
    const Vector z = uniform_in_ball(s, d, g->radius() * 0.5);
    const Vector analytic = grad(p, z);
    Vector fd(d);
    const double step = 1e-5;
    for (int i = 0; i < d; ++i) {
      Vector zp = z, zm = z;
      zp[i] += step;
      zm[i] -= step;
      fd[i] = (loss(p, zp) - loss(p, zm)) / (2.0 * step);
    }
    worst = std::max(worst, (analytic - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-5 && t < 30.0, fmt("worst relative error %.3g over 100 instances (<= 1e-5), %.2fs", worst, t)};
}

Outcome convex_recovery() {
  const auto t0 = Clock::now();
  const int d = 5, n = 20, m = 20;
  const double beta = 1e4;
  RngStream ws(0, 0);
  Matrix W(n, d);
  for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = ws.gaussian();
  RngStream as(0, h::kSensingStream);
  const SensingMatrix A = sample_matrix(m, n, as);
  // scale W so the two step-size caps coincide: 1/(30 L d) = d/(25 beta L^2) with D = L for linear G
  const double target_L = 30.0 * d * d / (25.0 * beta);
  const double base_L = std::pow(Eigen::JacobiSVD<Matrix>(W).singularValues()(0), 2) * gram_norm(A);
  W *= std::sqrt(target_L / base_L);
  const double radius = 3.0 * std::sqrt(static_cast<double>(d));
  auto g = std::make_shared<const GeneratorNet>(linear_net(W, radius));
  RngStream zs(0, h::kTruthStream);
  const Problem p = make_problem(g, A, uniform_in_ball(zs, d, 0.5 * radius));

  RngStream cs(0, h::kConstantsStream);
  const ConstantsReport constants = estimate_constants(p, 200, cs);
  SamplerConfig cfg;
  cfg.beta = beta;
  cfg.eta = theory_step_size(constants, d, beta);
  cfg.lipschitz = constants.L;
  cfg.k_max = 400000;
  cfg.record_every = cfg.k_max;

  const Matrix AW = A.A * W;
  const Vector z_ls = AW.colPivHouseholderQr().solve(p.y);
  const Trajectory gd = run(p, Method::gd, cfg);
  const Trajectory sgld = run(p, Method::sgld, cfg);
  const double gd_gap = (gd.final_state.z - z_ls).norm();
  const double mse = signal_mse(p, sgld.final_state.z);
  const double warm_mse = signal_mse(p, sgld.records.front().z);
  const Matrix H = AW.transpose() * AW;
  const double stationary = (W * H.inverse() * W.transpose()).trace() / (2.0 * beta * n);
  const double t = seconds_since(t0);
  std::printf("       info: eta %.4g, L %.4g, accepted %lld/%lld, warm-start mse %.3g, stationary-law mse %.3g\n",
              cfg.eta, constants.L, static_cast<long long>(sgld.final_state.n_accepted),
              static_cast<long long>(cfg.k_max), warm_mse, stationary);
  return {mse <= 1e-3 && gd_gap <= 1e-4 && t < 10.0,
          fmt("sgld mse %.3g (<= 1e-3), |z_gd - z_ls| %.3g (<= 1e-4), %.2fs", mse, gd_gap, t)};
}

Outcome smoothness_positivity() {
  const auto t0 = Clock::now();
  int positive = 0;
  std::string alphas;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = smooth_net({4, 8, 16}, ActivationKind::elu, 1000 + seed);
    RngStream s(1000 + seed, 10);
    const SmoothnessEstimate e = estimate_strong_smoothness(*g, 500, s);
    if (e.alpha > 0.0) ++positive;
    alphas += fmt(" %.3g", e.alpha);
  }
  const double t = seconds_since(t0);
  std::printf("       info: alpha per net:%s\n", alphas.c_str());
  return {positive >= 9 && t < 60.0, fmt("alpha > 0 on %d/10 nets (>= 9), %.2fs", positive, t)};
}

Outcome supporting_line() {
  std::size_t runs = 0, points = 0, crossings = 0;
  auto audit = [&](const SmoothnessEstimate& e) {
    ++runs;
    for (const ScatterPoint& p : e.scatter) {
      ++points;
      if (!(p.u >= e.alpha * p.v - e.gamma)) ++crossings;
    }
  };
  const ActivationKind kinds[] = {ActivationKind::elu, ActivationKind::sigmoid, ActivationKind::tanh,
                                  ActivationKind::relu, ActivationKind::identity};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = smooth_net({4, 8, 16}, kinds[seed % 5], seed);
    RngStream s(seed, 10);
    audit(estimate_strong_smoothness(*g, 500, s));
    PairSampling ball;
    ball.law = PairLaw::uniform_ball;
    audit(estimate_strong_smoothness(*g, 200, s, ball));
    PairSampling fixed;
    fixed.fixed_base = Vector::Zero(4);
    audit(estimate_strong_smoothness(*g, 200, s, fixed));
    std::vector<SensingMatrix> ops;
    for (std::uint64_t i = 0; i < 5; ++i) {
      RngStream a(seed, 20 + i);
      ops.push_back(sample_matrix(2 + static_cast<int>(seed % 8), 16, a));
    }
    audit(estimate_dissipativity_sensing(*g, ops, 200, s));
  }
  for (const char* name : {"validate_elu", "validate_relu", "validate_identity"}) {
    const fs::path out = scratch(std::string("c4_") + name);
    h::run_validate(load(name, out));
    for (const char* file : {"scatter_strong_smoothness.csv", "scatter_dissipativity.csv"}) {
      const auto est = nlohmann::json::parse(
          h::read_text(out / (std::string("estimate_") + (file[8] == 's' ? "strong_smoothness" : "dissipativity") +
                              ".json")));
      const h::Table t = h::read_csv(out / file);
      const auto u = t.numbers("u"), v = t.numbers("v");
      const double alpha = est.at("alpha").get<double>(), gamma = est.at("gamma").get<double>();
      ++runs;
      for (std::size_t i = 0; i < u.size(); ++i) {
        ++points;
        if (!(u[i] >= alpha * v[i] - gamma)) ++crossings;
      }
    }
  }
  return {crossings == 0, fmt("%zu crossings over %zu pairs in %zu validator runs (must be 0)", crossings, points, runs)};
}

double truncated_gaussian_pdf(double x, double s, double R) {
  const double mass = std::erf(R / (s * std::sqrt(2.0)));
  return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * M_PI) * mass);
}

Outcome gibbs_fidelity() {
  const auto t0 = Clock::now();
  const double R = 4.0;
  const Problem q = quadratic_problem(1, R);
  double worst_sup = 0.0, worst_rel = 0.0;
  for (double beta : {1.0, 10.0, 100.0}) {
    const GibbsGrid g = gibbs_grid(q, beta, 1 << 17);
    const double s = 1.0 / std::sqrt(2.0 * beta);
    for (std::size_t c = 0; c < g.n_cells(); ++c) {
      worst_sup = std::max(worst_sup, std::abs(g.density[c] - truncated_gaussian_pdf(g.center(c)[0], s, R)));
    }
    const double e = gibbs_expected_loss(g, q);
    worst_rel = std::max(worst_rel, std::abs(e * 2.0 * beta - 1.0));
  }
  const double t = seconds_since(t0);
  return {worst_sup <= 1e-6 && worst_rel <= 0.02 && t < 5.0,
          fmt("density sup error %.3g (<= 1e-6), expected-loss rel error %.3g (<= 0.02), %.2fs", worst_sup,
              worst_rel, t)};
}

Outcome mixing() {
  const auto t0 = Clock::now();
  const Problem q = quadratic_problem(1, 3.0);
  const double beta = 4.0;
  RngStream cs(0, h::kConstantsStream);
  const ConstantsReport constants = estimate_constants(q, 200, cs);
  SamplerConfig cfg;
  cfg.beta = beta;
  cfg.eta = theory_step_size(constants, 1, beta);
  cfg.lipschitz = constants.L;
  cfg.seed = 6;
  const GibbsGrid grid = gibbs_grid(q, beta, 64);
  const std::vector<std::int64_t> ks{0, 10, 30, 100, 300, 1000, 3000, 10000, 30000, 100000};
  const auto curve = mixing_curve(q, cfg, Method::sgld, 10000, ks, grid, default_thread_count());
  bool monotone = true;
  std::string line;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    line += fmt(" %lld:%.4f", static_cast<long long>(curve[i].k), curve[i].tv);
    if (i > 0 && curve[i].tv - curve[i - 1].tv > 2.0 * std::hypot(curve[i].mc_stderr, curve[i - 1].mc_stderr)) {
      monotone = false;
    }
  }
  std::printf("       info: eta %.4g, warm-start lambda %.4f, curve%s\n", cfg.eta,
              warm_start_lambda(grid, cfg.lipschitz, beta), line.c_str());

  SamplerConfig cold = cfg;
  cold.lipschitz = 100.0;
  const std::vector<std::int64_t> cold_ks{0, 10, 100, 1000, 10000};
  const auto cold_curve = mixing_curve(q, cold, Method::sgld, 2000, cold_ks, grid, default_thread_count());
  std::string cold_line;
  for (const MixingPoint& p : cold_curve) cold_line += fmt(" %lld:%.4f", static_cast<long long>(p.k), p.tv);
  std::printf("       info: narrow warm start (L = 100, 2000 chains)%s\n", cold_line.c_str());

  const double final_tv = curve.back().tv;
  const double t = seconds_since(t0);
  return {monotone && final_tv <= 0.1 && t < 300.0,
          fmt("nonincreasing within 2 se: %s, final TV %.4f at k=1e5 (<= 0.1), %.1fs", monotone ? "yes" : "no",
              final_tv, t)};
}

Outcome metropolis() {
  const auto t0 = Clock::now();
  const Problem dw = double_well_problem();
  const double beta = 2.0;
  const GibbsGrid grid = gibbs_grid(dw, beta, 64);
  SamplerConfig cfg;
  cfg.eta = 0.25;
  cfg.beta = beta;
  cfg.seed = 7;
  ChainStepper stepper(dw, cfg, Method::mh_sgld);
  RngStream init(cfg.seed, kWarmStartStream), noise(cfg.seed, kChainNoiseStream);
  ChainState state;
  state.z = warm_start(dw, beta, cfg.lipschitz, init);
  const std::int64_t n_steps = 1000000;
  const std::size_t bins = grid.n_cells();
  std::vector<std::size_t> counts(bins, 0);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> flow;
  std::size_t cell = grid.cell_of(state.z);
  double max_norm = 0.0;
  for (std::int64_t k = 0; k < n_steps; ++k) {
    stepper.step(state, noise);
    const std::size_t next = grid.cell_of(state.z);
    if (next != cell) ++flow[{cell, next}];
    cell = next;
    ++counts[cell];
    max_norm = std::max(max_norm, state.z.norm());
  }
  const TvEstimate tv = tv_from_counts(counts, grid);

  // pairs i < j with at least 100 transitions in total
  std::size_t tested = 0, exceed = 0;
  double chi2 = 0.0;
  for (const auto& [key, c_ij] : flow) {
    const auto [i, j] = key;
    if (i > j) continue;
    const auto back = flow.find({j, i});
    const double c_ji = back == flow.end() ? 0.0 : static_cast<double>(back->second);
    const double total = static_cast<double>(c_ij) + c_ji;
    if (total < 100.0) continue;
    ++tested;
    const double diff = static_cast<double>(c_ij) - c_ji;
    chi2 += diff * diff / total;
    if (std::abs(diff) > 3.0 * std::sqrt(total)) ++exceed;
  }
  for (const auto& [key, c_ji] : flow) {
    const auto [j, i] = key;
    if (j < i || flow.count({i, j})) continue;
    if (c_ji >= 100) {
      ++tested;
      chi2 += static_cast<double>(c_ji);
      ++exceed;
    }
  }
  const double K = static_cast<double>(tested);
  const bool balance = tested > 0 && chi2 <= K + 5.0 * std::sqrt(2.0 * K);
  const double t = seconds_since(t0);
  std::printf("       info: accepted %lld, lazy %lld, rejected ball/domain/metropolis %lld/%lld/%lld, max |z| %.4f\n",
              static_cast<long long>(state.n_accepted), static_cast<long long>(state.n_lazy),
              static_cast<long long>(state.n_rejected_ball), static_cast<long long>(state.n_rejected_domain),
              static_cast<long long>(state.n_rejected_metropolis), max_norm);
  std::printf("       info: %zu of %zu bin pairs exceed 3 se individually (%.2f expected by chance alone)\n", exceed,
              tested, 0.0027 * K);
  return {tv.tv <= 0.05 && balance && max_norm <= dw.radius() && t < 120.0,
          fmt("TV %.4f (<= 0.05), flow chi-square %.1f on %zu pairs (<= %.1f), %.1fs", tv.tv, chi2, tested,
              K + 5.0 * std::sqrt(2.0 * K), t)};
}

std::map<std::string, double> mean_mse(const std::vector<h::ResultRow>& rows) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    auto& [s, n] = acc[std::string(method_name(r.method))];
    s += r.mse;
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [k, v] : acc) out[k] = v.first / v.second;
  return out;
}

Outcome sgld_vs_gd() {
  const auto t0 = Clock::now();
  const h::ExperimentConfig config = load("compare_elu", scratch("c8"));
  const auto rows = h::run_compare(config);
  const auto means = mean_mse(rows);
  const double sgld = means.at("sgld"), gd = means.at("gd");
  const double t = seconds_since(t0);
  return {sgld <= 1.05 * gd && t < 180.0,
          fmt("mean mse sgld %.4g vs gd %.4g, ratio %.3f (<= 1.05), %zu rows, %.1fs", sgld, gd, sgld / gd,
              rows.size(), t)};
}

Outcome phase_transition() {
  const auto t0 = Clock::now();
  const h::ExperimentConfig config = load("phase_transition_elu", scratch("c9"));
  const auto rows = h::run_phase_transition(config);
  std::map<std::pair<std::string, double>, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    auto& [s, n] = acc[{std::string(method_name(r.method)), r.f}];
    s += r.mse;
    ++n;
  }
  bool ok = true;
  std::string line;
  for (const char* method : {"gd", "sgld"}) {
    const auto lo = acc.at({method, 0.2}), hi = acc.at({method, 1.0});
    const double at_lo = lo.first / lo.second, at_hi = hi.first / hi.second;
    ok = ok && at_hi <= at_lo;
    line += fmt(" %s %.4g -> %.4g;", method, at_lo, at_hi);
  }
  const double t = seconds_since(t0);
  return {ok && t < 300.0, fmt("mean mse f=0.2 -> f=1.0:%s %.1fs", line.c_str(), t)};
}

Outcome domain_and_determinism() {
  const auto t0 = Clock::now();
  const char* configs[] = {"recover_identity",    "compare_elu",         "phase_transition_elu",
                           "validate_elu",        "validate_relu",       "validate_identity",
                           "chain_lab_quadratic", "chain_lab_double_well", "chain_lab_flat"};
  std::size_t files = 0, mismatched = 0, iterates = 0, outside = 0;
  for (const char* name : configs) {
    const fs::path a = scratch(std::string("c10a_") + name), b = scratch(std::string("c10b_") + name);
    const h::ExperimentConfig ca = load(name, a);
    h::run_experiment(ca);
    h::run_experiment(load(name, b));
    const double R = h::build_generator(ca)->radius();
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (entry.path().extension() != ".csv" || entry.path().filename() == "timing.csv") continue;
      ++files;
      const fs::path rel = fs::relative(entry.path(), a);
      if (!fs::exists(b / rel) || h::read_text(entry.path()) != h::read_text(b / rel)) {
        ++mismatched;
        std::printf("       mismatch: %s/%s\n", name, rel.string().c_str());
      }
      if (rel.filename().string().rfind("traj_", 0) != 0) continue;
      const h::Table t = h::read_csv(entry.path());
      const std::size_t z0 = t.column_index("z_0");
      for (const auto& row : t.rows) {
        double sq = 0.0;
        for (std::size_t j = z0; j < row.size(); ++j) sq += std::pow(std::stod(row[j]), 2);
        ++iterates;
        if (std::sqrt(sq) > R) ++outside;
      }
    }
  }
  const double t = seconds_since(t0);
  return {mismatched == 0 && outside == 0 && files > 0,
          fmt("%zu/%zu CSV files differ on rerun, %zu/%zu recorded iterates outside the domain, %.1fs", mismatched,
              files, outside, iterates, t)};
}

Outcome cheeger_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (double R : {1.0, 2.0}) {
    const GibbsGrid g = gibbs_grid(quadratic_problem(1, R), 0.0, 2048);
    worst = std::max(worst, std::abs(cheeger_estimate(g).rho * R - 1.0));
  }
  const double t = seconds_since(t0);
  return {worst <= 0.02 && t < 1.0, fmt("worst relative error vs 1/R %.3g (<= 0.02), %.3fs", worst, t)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", gradient_correctness},
      {2, "convex-case recovery", convex_recovery},
      {3, "strong-smoothness positivity", smoothness_positivity},
      {4, "supporting-line exactness", supporting_line},
      {5, "Gibbs fidelity at d=1", gibbs_fidelity},
      {6, "mixing", mixing},
      {7, "Metropolis-adjusted chain correctness", metropolis},
      {8, "SGLD-vs-GD direction", sgld_vs_gd},
      {9, "phase-transition monotonicity", phase_transition},
      {10, "domain invariant and determinism", domain_and_determinism},
      {11, "Cheeger oracle", cheeger_oracle},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
