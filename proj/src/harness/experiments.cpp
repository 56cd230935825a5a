#include "cssgld/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "cssgld/chain_lab.hpp"
#include "cssgld/harness/output.hpp"
#include "cssgld/parallel.hpp"
#include "cssgld/validators.hpp"
#include "paper_reference.inc"

namespace cssgld::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view paper_reference_csv() { return kPaperReferenceCsv; }

namespace {

json finite_or_string(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json constants_json(const ConstantsReport& c) {
  return {{"B", c.B},
          {"iota", c.iota},
          {"kappa", c.kappa},
          {"M", c.M},
          {"gram_norm", c.gram_norm},
          {"L", c.L},
          {"D", c.D},
          {"D_diameter", c.D_diameter},
          {"n_points", c.n_points},
          {"n_pairs", c.n_pairs},
          {"method", c.method},
          {"convention", c.convention}};
}

std::string f_label(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", f);
  return buf;
}

std::string color_of(std::string_view method) {
  if (method == "gd") return "#c2185b";
  if (method == "sgld") return "#1f3fbf";
  return "#2ca02c";
}

void write_fixture(const fs::path& out) { write_text(out / "fixtures" / "paper_reference.csv", paper_reference_csv()); }

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "' is not valid JSON at byte " + std::to_string(e.byte));
  }
}

struct MethodRun {
  ResultRow row;
  std::string trajectory_csv;
  std::string trajectory_json;
};

struct CellRun {
  json info;
  std::vector<MethodRun> runs;
};

double row_f(const ExperimentConfig& config, std::optional<double> f, Eigen::Index m, Eigen::Index n) {
  if (f) return *f;
  if (config.problem.f) return *config.problem.f;
  return static_cast<double>(m) / static_cast<double>(n);
}

CellRun run_cell(const ExperimentConfig& config, const std::shared_ptr<const GeneratorNet>& generator,
                 std::uint64_t seed, std::optional<double> f) {
  const Problem problem = build_problem(config, generator, seed, f);
  const ChainSetup setup = resolve_sampler(config, problem, seed);
  const double f_value = row_f(config, f, problem.measurement_dim(), problem.signal_dim());

  CellRun cell;
  cell.info = {{"seed", seed},
               {"f", f_value},
               {"m", problem.measurement_dim()},
               {"n", problem.signal_dim()},
               {"d", problem.latent_dim()},
               {"radius", problem.radius()},
               {"eta", setup.sampler.eta},
               {"beta", finite_or_string(setup.sampler.beta)},
               {"r", finite_or_string(setup.sampler.radius_for(problem.latent_dim()))},
               {"lipschitz", setup.sampler.lipschitz},
               {"k_max", setup.sampler.k_max},
               {"record_every", setup.sampler.record_every},
               {"constants", setup.constants ? constants_json(*setup.constants) : json(nullptr)}};

  for (Method method : config.sampler.methods) {
    const auto start = std::chrono::steady_clock::now();
    const Trajectory t = run(problem, method, setup.sampler);
    const auto stop = std::chrono::steady_clock::now();
    MethodRun r;
    r.row.seed = seed;
    r.row.method = method;
    r.row.f = f_value;
    r.row.m = problem.measurement_dim();
    r.row.k = t.final_state.k;
    r.row.final_f = loss(problem, t.final_state.z);
    r.row.mse = signal_mse(problem, t.final_state.z);
    r.row.wall_time = std::chrono::duration<double>(stop - start).count();
    std::ostringstream csv;
    write_trajectory_csv(t, csv);
    r.trajectory_csv = csv.str();
    r.trajectory_json = trajectory_sidecar_json(t);
    cell.runs.push_back(std::move(r));
  }
  return cell;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string s = "seed,method,f,m,k,final_f,mse\n";
  for (const ResultRow& r : rows) {
    s += std::to_string(r.seed) + "," + std::string(method_name(r.method)) + "," + format_number(r.f) + "," +
         std::to_string(r.m) + "," + std::to_string(r.k) + "," + format_number(r.final_f) + "," +
         format_number(r.mse) + "\n";
  }
  return s;
}

std::string timing_csv(const std::vector<ResultRow>& rows) {
  std::string s = "seed,method,f,wall_time_s\n";
  for (const ResultRow& r : rows) {
    s += std::to_string(r.seed) + "," + std::string(method_name(r.method)) + "," + format_number(r.f) + "," +
         format_number(r.wall_time) + "\n";
  }
  return s;
}

/// Mean MSE and final F per method over the given rows, in config method order.
json method_means(const ExperimentConfig& config, const std::vector<ResultRow>& rows) {
  json out = json::object();
  for (Method method : config.sampler.methods) {
    double mse = 0.0;
    double final_f = 0.0;
    std::size_t n = 0;
    for (const ResultRow& r : rows) {
      if (r.method != method) continue;
      mse += r.mse;
      final_f += r.final_f;
      ++n;
    }
    if (n == 0) continue;
    out[std::string(method_name(method))] = {{"mean_mse", mse / static_cast<double>(n)},
                                             {"mean_final_f", final_f / static_cast<double>(n)},
                                             {"n", n}};
  }
  return out;
}

/// Runs every (f, seed) cell in parallel, then writes results in cell order.
std::vector<ResultRow> run_grid(const ExperimentConfig& config, const std::vector<std::optional<double>>& fs_list,
                                bool subdirectories, json& summary) {
  const auto generator = build_generator(config);
  const std::size_t n_seeds = config.seeds.size();
  std::vector<CellRun> cells(fs_list.size() * n_seeds);
  parallel_for(cells.size(), default_thread_count(), [&](std::size_t i) {
    cells[i] = run_cell(config, generator, config.seeds[i % n_seeds], fs_list[i / n_seeds]);
  });

  std::vector<ResultRow> rows;
  json cell_info = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& f = fs_list[i / n_seeds];
    const fs::path dir = subdirectories && f ? config.out / ("f_" + f_label(*f)) : config.out;
    for (const MethodRun& r : cells[i].runs) {
      const std::string stem = "traj_" + std::to_string(r.row.seed) + "_" + std::string(method_name(r.row.method));
      write_text(dir / (stem + ".csv"), r.trajectory_csv);
      write_text(dir / (stem + ".json"), r.trajectory_json);
      rows.push_back(r.row);
    }
    cell_info.push_back(std::move(cells[i].info));
  }
  write_text(config.out / "results.csv", results_csv(rows));
  write_text(config.out / "timing.csv", timing_csv(rows));
  write_fixture(config.out);

  summary["kind"] = std::string(kind_name(config.kind));
  summary["config"] = config.document;
  summary["generator"] = {{"outside_theory", generator->outside_theory()},
                          {"latent_dim", generator->input_dim()},
                          {"signal_dim", generator->output_dim()},
                          {"radius", generator->radius()}};
  summary["cells"] = std::move(cell_info);
  summary["n_rows"] = rows.size();
  return rows;
}

// ---------------------------------------------------------------- plotting

void replot_loss(const fs::path& out) {
  const Table results = read_csv(out / "results.csv");
  const auto seeds = results.strings("seed");
  const auto methods = results.strings("method");
  PlotSpec spec;
  spec.title = "Objective along the chain";
  spec.x_label = "k";
  spec.y_label = "F(z_k)";
  spec.log_y = true;
  std::map<std::string, bool> labelled;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const fs::path path = out / ("traj_" + seeds[i] + "_" + methods[i] + ".csv");
    if (!fs::exists(path)) continue;
    const Table t = read_csv(path);
    Series s;
    s.label = labelled[methods[i]] ? "" : methods[i];
    labelled[methods[i]] = true;
    s.x = t.numbers("k");
    s.y = t.numbers("f_value");
    s.color = color_of(methods[i]);
    s.markers = false;
    spec.series.push_back(std::move(s));
  }
  write_text(out / "plot_loss.svg", render_plot(spec));
}

/// Per-seed MSE pairs (GD on x, SGLD on y) next to the paper's DCGAN pairs.
void replot_compare(const fs::path& out) {
  const Table results = read_csv(out / "results.csv");
  const auto seeds = results.strings("seed");
  const auto methods = results.strings("method");
  const auto mse = results.numbers("mse");
  std::map<std::string, double> gd;
  std::map<std::string, double> sgld;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (methods[i] == "gd") gd[seeds[i]] = mse[i];
    if (methods[i] == "sgld") sgld[seeds[i]] = mse[i];
  }
  Series synthetic;
  synthetic.label = "synthetic (per seed)";
  synthetic.line = false;
  synthetic.color = "#1f3fbf";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (methods[i] != "gd" || !sgld.count(seeds[i])) continue;
    synthetic.x.push_back(gd[seeds[i]]);
    synthetic.y.push_back(sgld[seeds[i]]);
  }
  PlotSpec spec;
  spec.title = "SGLD vs GD recovery MSE";
  spec.x_label = "GD MSE";
  spec.y_label = "SGLD MSE";
  spec.log_x = true;
  spec.log_y = true;
  spec.diagonal = true;
  spec.series.push_back(std::move(synthetic));

  const fs::path fixture = out / "fixtures" / "paper_reference.csv";
  if (fs::exists(fixture)) {
    const Table ref = read_csv(fixture);
    const auto figure = ref.strings("figure");
    const auto dataset = ref.strings("dataset");
    const auto method = ref.strings("method");
    const auto value = ref.numbers("mse");
    for (const std::string fig : {"fig2", "fig3"}) {
      Series s;
      s.line = false;
      s.marker = "square";
      s.color = fig == "fig2" ? "#ff7f0e" : "#8c564b";
      double x = NAN;
      double y = NAN;
      for (std::size_t i = 0; i < figure.size(); ++i) {
        if (figure[i] != fig) continue;
        s.label = "source=paper " + dataset[i];
        if (method[i] == "gd") x = value[i];
        if (method[i] == "sgld") y = value[i];
      }
      s.x = {x};
      s.y = {y};
      if (!s.label.empty()) spec.series.push_back(std::move(s));
    }
  }
  write_text(out / "plot_mse.svg", render_plot(spec));
}

void replot_phase(const fs::path& out) {
  const Table results = read_csv(out / "results.csv");
  const auto methods = results.strings("method");
  const auto f = results.numbers("f");
  const auto mse = results.numbers("mse");
  std::vector<std::string> order;
  for (const auto& m : methods) {
    if (std::find(order.begin(), order.end(), m) == order.end()) order.push_back(m);
  }
  PlotSpec spec;
  spec.title = "Phase transition";
  spec.x_label = "compression ratio f = m/n";
  spec.y_label = "mean MSE";
  spec.log_y = true;
  for (const std::string& method : order) {
    std::map<double, std::pair<double, std::size_t>> acc;
    for (std::size_t i = 0; i < methods.size(); ++i) {
      if (methods[i] != method) continue;
      acc[f[i]].first += mse[i];
      acc[f[i]].second += 1;
    }
    Series s;
    s.label = method + " (synthetic)";
    s.color = color_of(method);
    s.marker = method == "gd" ? "circle" : "square";
    for (const auto& [fv, sum] : acc) {
      s.x.push_back(fv);
      s.y.push_back(sum.first / static_cast<double>(sum.second));
    }
    spec.series.push_back(std::move(s));
  }
  const fs::path fixture = out / "fixtures" / "paper_reference.csv";
  if (fs::exists(fixture)) {
    const Table ref = read_csv(fixture);
    const auto figure = ref.strings("figure");
    const auto method = ref.strings("method");
    const auto rf = ref.numbers("f");
    const auto value = ref.numbers("mse");
    for (const std::string m : {"gd", "sgld"}) {
      Series s;
      s.label = m + " (source=paper, MNIST DCGAN)";
      s.color = color_of(m);
      s.dashed = true;
      s.marker = m == "gd" ? "circle" : "square";
      for (std::size_t i = 0; i < figure.size(); ++i) {
        if (figure[i] == "fig4" && method[i] == m) {
          s.x.push_back(rf[i]);
          s.y.push_back(value[i]);
        }
      }
      if (!s.x.empty()) spec.series.push_back(std::move(s));
    }
  }
  write_text(out / "plot_phase_transition.svg", render_plot(spec));
}

void replot_scatter(const fs::path& out, const std::string& name, const std::string& title, const json& estimate) {
  const Table t = read_csv(out / ("scatter_" + name + ".csv"));
  const auto u = t.numbers("u");
  const auto v = t.numbers("v");
  const double alpha = estimate.at("alpha").get<double>();
  const double gamma = estimate.at("gamma").get<double>();
  Series s;
  s.label = "pairs";
  s.line = false;
  s.color = "#1f3fbf";
  for (std::size_t i = 0; i < u.size(); ++i) {
    s.x.push_back(alpha * v[i] - gamma);
    s.y.push_back(u[i]);
  }
  PlotSpec spec;
  char buf[96];
  std::snprintf(buf, sizeof buf, " (alpha=%.4g, gamma=%.4g)", alpha, gamma);
  spec.title = title + buf;
  spec.x_label = "alpha v - gamma";
  spec.y_label = "u";
  spec.diagonal = true;
  spec.series.push_back(std::move(s));
  write_text(out / ("plot_" + name + ".svg"), render_plot(spec));
}

void replot_validate(const fs::path& out) {
  const json summary = read_json(out / "summary.json");
  replot_scatter(out, "strong_smoothness", "Strong smoothness", summary.at("strong_smoothness"));
  replot_scatter(out, "dissipativity", "Dissipativity under A", summary.at("dissipativity"));
}

void replot_chain_lab(const fs::path& out) {
  const json summary = read_json(out / "summary.json");
  if (fs::exists(out / "curve.csv")) {
    const Table t = read_csv(out / "curve.csv");
    const auto k = t.numbers("k");
    const auto tv = t.numbers("tv");
    const auto se = t.numbers("mc_stderr");
    PlotSpec spec;
    spec.title = "TV to the Gibbs target";
    spec.x_label = "k + 1";
    spec.y_label = "TV";
    spec.log_x = true;
    Series mean;
    mean.label = "TV";
    Series upper;
    upper.label = "TV + 2 s.e.";
    upper.dashed = true;
    upper.markers = false;
    upper.color = "#888";
    for (std::size_t i = 0; i < k.size(); ++i) {
      mean.x.push_back(k[i] + 1.0);
      mean.y.push_back(tv[i]);
      upper.x.push_back(k[i] + 1.0);
      upper.y.push_back(tv[i] + 2.0 * se[i]);
    }
    spec.series.push_back(std::move(mean));
    spec.series.push_back(std::move(upper));
    write_text(out / "plot_mixing.svg", render_plot(spec));
  }
  const Table grid = read_csv(out / "grid.csv");
  const int d = summary.at("d").get<int>();
  if (d == 1) {
    PlotSpec spec;
    spec.title = "Gibbs density";
    spec.x_label = "z";
    spec.y_label = "density";
    Series s;
    s.label = "pi";
    s.x = grid.numbers("z_0");
    s.y = grid.numbers("density");
    s.markers = false;
    spec.series.push_back(std::move(s));
    write_text(out / "plot_gibbs.svg", render_plot(spec));
  } else {
    const double radius = summary.at("radius").get<double>();
    constexpr int kBins = 64;
    std::vector<double> heat(kBins * kBins, 0.0);
    const auto x = grid.numbers("z_0");
    const auto y = grid.numbers("z_1");
    const auto p = grid.numbers("density");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const int bx = std::clamp(static_cast<int>((x[i] + radius) / (2.0 * radius) * kBins), 0, kBins - 1);
      const int by = std::clamp(static_cast<int>((y[i] + radius) / (2.0 * radius) * kBins), 0, kBins - 1);
      heat[static_cast<std::size_t>(bx) * kBins + by] += p[i];
    }
    write_text(out / "plot_gibbs.svg",
               render_heatmap("Gibbs density", heat, kBins, kBins, -radius, radius, -radius, radius));
  }
}

}  // namespace

std::shared_ptr<const GeneratorNet> build_generator(const ExperimentConfig& config) {
  const GeneratorSource& g = config.generator;
  if (g.netspec) {
    RngStream stream(g.netspec->seed, 0);
    return std::make_shared<const GeneratorNet>(random_net(*g.netspec, stream));
  }
  if (g.weights) return std::make_shared<const GeneratorNet>(load_net(*g.weights));
  if (g.builtin && *g.builtin == "identity") {
    const double radius = g.radius.value_or(default_domain_radius(g.latent_dim));
    return std::make_shared<const GeneratorNet>(linear_net(Matrix::Identity(g.latent_dim, g.latent_dim), radius));
  }
  if (g.builtin && *g.builtin == "double_well") {
    return double_well_problem(g.scale, g.radius.value_or(3.0)).generator;
  }
  throw ConfigError("generator: no source");
}

Eigen::Index measurement_count(const ExperimentConfig& config, Eigen::Index n, std::optional<double> f) {
  if (!f && config.problem.m) return *config.problem.m;
  const double ratio = f.value_or(config.problem.f.value_or(config.problem.sensing == "identity" ? 1.0 : 0.5));
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::lround(ratio * static_cast<double>(n))));
}

Problem build_problem(const ExperimentConfig& config, std::shared_ptr<const GeneratorNet> generator,
                      std::uint64_t seed, std::optional<double> f) {
  const Eigen::Index n = generator->output_dim();
  const Eigen::Index d = generator->input_dim();
  const Eigen::Index m = measurement_count(config, n, f);

  SensingMatrix sensing;
  if (config.problem.sensing == "identity") {
    if (m != n) throw ConfigError("problem.sensing 'identity' needs m = n = " + std::to_string(n));
    sensing = SensingMatrix::from_matrix(Matrix::Identity(n, n));
  } else {
    RngStream stream(seed, kSensingStream);
    sensing = sample_matrix(m, n, stream);
  }

  Vector z_star;
  if (config.problem.z_star) {
    const auto& values = *config.problem.z_star;
    if (static_cast<Eigen::Index>(values.size()) != d) {
      throw ConfigError("problem.z_star has " + std::to_string(values.size()) + " entries, latent dimension is " +
                        std::to_string(d));
    }
    z_star = Eigen::Map<const Vector>(values.data(), d);
    if (z_star.norm() > generator->radius()) throw ConfigError("problem.z_star lies outside B(0, R)");
  } else {
    RngStream stream(seed, kTruthStream);
    z_star = uniform_in_ball(stream, d, generator->radius());
  }

  std::optional<Vector> noise;
  if (config.problem.noise_norm > 0.0) {
    RngStream stream(seed, kNoiseStream);
    noise = uniform_on_sphere(stream, m, config.problem.noise_norm);
  }
  return make_problem(std::move(generator), std::move(sensing), std::move(z_star), std::move(noise));
}

ChainSetup resolve_sampler(const ExperimentConfig& config, const Problem& problem, std::uint64_t seed) {
  const SamplerSettings& s = config.sampler;
  ChainSetup setup;
  if (!s.eta || !s.lipschitz) {
    RngStream stream(seed, kConstantsStream);
    setup.constants = estimate_constants(problem, s.constants_samples, stream);
  }
  SamplerConfig& c = setup.sampler;
  c.beta = s.beta;
  c.eta = s.eta ? *s.eta : theory_step_size(*setup.constants, problem.latent_dim(), s.beta);
  c.proposal_radius = s.proposal_radius;
  c.k_max = s.k_max;
  c.record_every = s.record_every.value_or(std::max<std::int64_t>(1, s.k_max / 1000));
  c.seed = seed;
  c.lipschitz = s.lipschitz ? *s.lipschitz : setup.constants->L;
  if (!(c.lipschitz > 0.0)) {
    throw NumericError("sampled Lipschitz constant is zero; set sampler.lipschitz explicitly");
  }
  if (!std::isfinite(c.eta) || !(c.eta > 0.0)) {
    throw NumericError("theory step size is not a positive finite number; set sampler.eta explicitly");
  }
  c.validate();
  return setup;
}

std::vector<ResultRow> run_recover(const ExperimentConfig& config) {
  json summary;
  auto rows = run_grid(config, {std::nullopt}, false, summary);
  summary["methods"] = method_means(config, rows);
  write_json(config.out / "summary.json", summary);
  replot(ExperimentKind::recover, config.out);
  return rows;
}

std::vector<ResultRow> run_compare(const ExperimentConfig& config) {
  json summary;
  auto rows = run_grid(config, {std::nullopt}, false, summary);
  summary["methods"] = method_means(config, rows);
  summary["shared_warm_start"] = true;
  write_json(config.out / "summary.json", summary);
  replot(ExperimentKind::compare, config.out);
  return rows;
}

std::vector<ResultRow> run_phase_transition(const ExperimentConfig& config) {
  std::vector<std::optional<double>> grid;
  for (double f : config.phase.f_grid) grid.emplace_back(f);
  json summary;
  auto rows = run_grid(config, grid, true, summary);
  json table = json::array();
  for (double f : config.phase.f_grid) {
    std::vector<ResultRow> at_f;
    for (const ResultRow& r : rows) {
      if (r.f == f) at_f.push_back(r);
    }
    const json means = method_means(config, at_f);
    for (auto it = means.begin(); it != means.end(); ++it) {
      table.push_back({{"f", f}, {"method", it.key()}, {"mean_mse", it.value().at("mean_mse")},
                       {"n", it.value().at("n")}});
    }
  }
  summary["table"] = std::move(table);
  write_json(config.out / "summary.json", summary);
  replot(ExperimentKind::phase_transition, config.out);
  return rows;
}

nlohmann::json run_validate(const ExperimentConfig& config) {
  const auto generator = build_generator(config);
  const ValidateSettings& v = config.validate;
  const std::uint64_t seed = config.seeds.front();
  const Eigen::Index n = generator->output_dim();
  const Eigen::Index m = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::lround(v.f * static_cast<double>(n))));

  PairSampling sampling;
  sampling.law = v.pair_law;
  if (v.fixed_base) {
    if (static_cast<Eigen::Index>(v.fixed_base->size()) != generator->input_dim()) {
      throw ConfigError("validate.fixed_base must have " + std::to_string(generator->input_dim()) + " entries");
    }
    sampling.fixed_base = Eigen::Map<const Vector>(v.fixed_base->data(), generator->input_dim());
  }

  RngStream strong_stream(seed, 10);
  const SmoothnessEstimate strong = estimate_strong_smoothness(*generator, v.n_pairs, strong_stream, sampling);
  std::vector<SensingMatrix> operators;
  for (std::size_t i = 0; i < v.n_matrices; ++i) {
    RngStream stream(seed, 20 + i);
    operators.push_back(sample_matrix(m, n, stream));
  }
  RngStream sensing_stream(seed, 11);
  const SmoothnessEstimate sensed =
      estimate_dissipativity_sensing(*generator, operators, v.n_pairs, sensing_stream, sampling);
  RngStream prop_stream(seed, 12);
  const Proposition1Report prop = check_proposition1(*generator, v.n_pairs, prop_stream, sampling);

  auto brief = [](const SmoothnessEstimate& e) {
    json j = json::parse(estimate_json(e));
    j.erase("curve");
    return j;
  };
  std::ostringstream a;
  write_scatter_csv(strong, a);
  write_text(config.out / "scatter_strong_smoothness.csv", a.str());
  std::ostringstream b;
  write_scatter_csv(sensed, b);
  write_text(config.out / "scatter_dissipativity.csv", b.str());
  write_text(config.out / "estimate_strong_smoothness.json", estimate_json(strong));
  write_text(config.out / "estimate_dissipativity.json", estimate_json(sensed));
  write_fixture(config.out);

  json summary;
  summary["kind"] = "validate";
  summary["config"] = config.document;
  summary["strong_smoothness"] = brief(strong);
  json d = brief(sensed);
  d["n_matrices"] = v.n_matrices;
  d["m"] = m;
  summary["dissipativity"] = std::move(d);
  summary["proposition1"] = {{"iota", prop.iota},
                             {"kappa", prop.kappa},
                             {"M", prop.M},
                             {"condition_holds", prop.condition_holds},
                             {"implied_alpha", prop.implied_alpha},
                             {"n_pairs", prop.n_pairs}};
  summary["outside_theory"] = generator->outside_theory();
  if (generator->outside_theory()) {
    summary["warning"] = "relu activation lies outside the smooth, strictly increasing class the theory covers";
  }
  write_json(config.out / "summary.json", summary);
  replot(ExperimentKind::validate, config.out);
  return summary;
}

nlohmann::json run_chain_lab(const ExperimentConfig& config) {
  const auto generator = build_generator(config);
  const Eigen::Index d = generator->input_dim();
  if (d > 2) {
    throw UnsupportedDimension("chain_lab supports latent dimension 1 or 2 only; generator has d = " +
                               std::to_string(d));
  }
  if (!std::isfinite(config.sampler.beta)) throw ConfigError("chain_lab needs a finite sampler.beta");
  const ChainLabSettings& lab = config.chain_lab;
  const std::uint64_t seed = config.seeds.front();
  const Problem problem = build_problem(config, generator, seed);
  const ChainSetup setup = resolve_sampler(config, problem, seed);
  const double beta = setup.sampler.beta;

  std::vector<double> betas{beta};
  for (double b : lab.betas) {
    if (std::find(betas.begin(), betas.end(), b) == betas.end()) betas.push_back(b);
  }
  std::string table = "beta,log_partition,expected_loss,cheeger_rho,cheeger_upper_bound,warm_start_lambda\n";
  json quadrature = json::array();
  for (double b : betas) {
    const GibbsGrid grid = gibbs_grid(problem, b, lab.resolution);
    const double expected = gibbs_expected_loss(grid, problem);
    const CheegerEstimate cheeger = cheeger_estimate(grid);
    const double lambda = warm_start_lambda(grid, setup.sampler.lipschitz, b);
    table += format_number(b) + "," + format_number(grid.log_partition) + "," + format_number(expected) + "," +
             format_number(cheeger.rho) + "," + (cheeger.upper_bound ? "1" : "0") + "," + format_number(lambda) +
             "\n";
    quadrature.push_back({{"beta", b},
                          {"log_partition", grid.log_partition},
                          {"expected_loss", expected},
                          {"cheeger_rho", cheeger.rho},
                          {"cheeger_cut_kind", cheeger.cut_kind},
                          {"cheeger_upper_bound", cheeger.upper_bound},
                          {"warm_start_lambda", finite_or_string(lambda)},
                          {"resolution", grid.resolution}});
    if (b == beta) {
      std::ostringstream g;
      write_grid_csv(grid, g);
      write_text(config.out / "grid.csv", g.str());
    }
  }
  write_text(config.out / "quadrature.csv", table);

  json summary;
  summary["kind"] = "chain_lab";
  summary["config"] = config.document;
  summary["d"] = d;
  summary["radius"] = problem.radius();
  summary["beta"] = beta;
  summary["eta"] = setup.sampler.eta;
  summary["r"] = setup.sampler.radius_for(d);
  summary["lipschitz"] = setup.sampler.lipschitz;
  summary["constants"] = setup.constants ? constants_json(*setup.constants) : json(nullptr);
  summary["method"] = std::string(method_name(lab.method));
  summary["quadrature"] = std::move(quadrature);
  summary["outside_theory"] = generator->outside_theory();

  if (lab.n_chains > 0 && !lab.checkpoints.empty()) {
    const int tv_resolution = lab.tv_resolution.value_or(d == 1 ? 64 : 32);
    const GibbsGrid tv_grid = gibbs_grid(problem, beta, tv_resolution);
    const auto curve = mixing_curve(problem, setup.sampler, lab.method, lab.n_chains, lab.checkpoints, tv_grid,
                                    default_thread_count());
    std::ostringstream c;
    write_curve_csv(curve, c);
    write_text(config.out / "curve.csv", c.str());
    summary["mixing"] = {{"n_chains", lab.n_chains},
                         {"tv_resolution", tv_resolution},
                         {"initial_tv", curve.front().tv},
                         {"final_tv", curve.back().tv},
                         {"final_k", curve.back().k},
                         {"final_mc_stderr", curve.back().mc_stderr}};
  } else {
    fs::remove(config.out / "curve.csv");
  }
  write_fixture(config.out);
  write_json(config.out / "summary.json", summary);
  replot(ExperimentKind::chain_lab, config.out);
  return summary;
}

void run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::recover: run_recover(config); break;
    case ExperimentKind::compare: run_compare(config); break;
    case ExperimentKind::phase_transition: run_phase_transition(config); break;
    case ExperimentKind::validate: run_validate(config); break;
    case ExperimentKind::chain_lab: run_chain_lab(config); break;
  }
}

void replot(ExperimentKind kind, const std::filesystem::path& out) {
  switch (kind) {
    case ExperimentKind::recover:
      replot_loss(out);
      break;
    case ExperimentKind::compare:
      replot_loss(out);
      replot_compare(out);
      break;
    case ExperimentKind::phase_transition:
      replot_phase(out);
      break;
    case ExperimentKind::validate:
      replot_validate(out);
      break;
    case ExperimentKind::chain_lab:
      replot_chain_lab(out);
      break;
  }
}

}  // namespace cssgld::harness
