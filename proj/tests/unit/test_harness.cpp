#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cssgld/harness/config.hpp"
#include "cssgld/harness/experiments.hpp"
#include "cssgld/harness/output.hpp"

using namespace cssgld;
using namespace cssgld::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cssgld_harness_unit" / name;
  fs::remove_all(dir);
  return dir;
}

json small_recover() {
  return json::parse(R"({
    "kind": "recover",
    "generator": {"netspec": {"widths": [3, 8, 12], "activations": ["elu", "identity"], "seed": 2}},
    "problem": {"f": 0.5},
    "seeds": [0, 1],
    "sampler": {"eta": 0.002, "beta": 1000, "r": "inf", "k_max": 200, "methods": ["sgld", "gd"]}
  })");
}

ExperimentConfig with_out(json doc, const fs::path& out) {
  doc["out"] = out.string();
  return parse_config(doc);
}

std::string config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config errors name the field") {
  json doc = small_recover();
  doc["sampler"]["bogus"] = 1;
  CHECK(config_error(doc).find("sampler.bogus") != std::string::npos);

  doc = small_recover();
  doc["problem"]["f"] = 1.5;
  CHECK(config_error(doc).find("problem.f") != std::string::npos);

  doc = small_recover();
  doc["generator"]["builtin"] = "identity";
  CHECK(config_error(doc).find("generator") != std::string::npos);

  doc = small_recover();
  doc["sampler"]["eta"] = "theory";
  doc["sampler"]["beta"] = "inf";
  CHECK(config_error(doc).find("sampler.eta") != std::string::npos);

  doc = small_recover();
  doc["seeds"] = "zero";
  CHECK(config_error(doc).find("seeds") != std::string::npos);

  CHECK_THROWS_AS(parse_kind("train"), ConfigError);
}

TEST_CASE("overrides parse values as JSON with a string fallback") {
  json doc = small_recover();
  apply_override(doc, "sampler.beta=100");
  apply_override(doc, "sampler.methods=[\"gd\"]");
  apply_override(doc, "out=some/dir");
  apply_override(doc, "phase.f_grid=[0.5,1]");
  CHECK(doc["sampler"]["beta"] == 100);
  CHECK(doc["out"] == "some/dir");
  const ExperimentConfig c = parse_config(doc, ExperimentKind::phase_transition);
  CHECK(c.kind == ExperimentKind::phase_transition);
  CHECK(c.sampler.beta == 100.0);
  CHECK(c.sampler.methods == std::vector<Method>{Method::gd});
  CHECK(c.phase.f_grid == std::vector<double>{0.5, 1.0});
  CHECK(c.out == fs::path("some/dir"));
  CHECK_FALSE(c.document.contains("out"));
  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
}

TEST_CASE("config files report JSON errors with a position") {
  const fs::path dir = scratch("bad_json");
  fs::create_directories(dir);
  write_text(dir / "c.json", "{\"kind\": \"recover\",");
  try {
    read_config_file(dir / "c.json");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
  CHECK_THROWS_AS(read_config_file(dir / "missing.json"), ConfigError);
}

TEST_CASE("zero steps reports the warm-start error") {
  json doc = small_recover();
  doc["sampler"]["k_max"] = 0;
  const ExperimentConfig c = with_out(doc, scratch("k0"));
  const auto rows = run_recover(c);
  REQUIRE(rows.size() == 4);
  const auto gen = build_generator(c);
  for (const ResultRow& r : rows) {
    const Problem p = build_problem(c, gen, r.seed);
    const ChainSetup setup = resolve_sampler(c, p, r.seed);
    RngStream init(r.seed, kWarmStartStream);
    const Vector z0 = warm_start(p, setup.sampler.beta, setup.sampler.lipschitz, init);
    CHECK(r.mse == signal_mse(p, z0));
    CHECK(r.k == 0);
  }
}

TEST_CASE("reruns are byte identical and respect the domain") {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  run_experiment(with_out(small_recover(), a));
  run_experiment(with_out(small_recover(), b));
  for (const char* file : {"results.csv", "summary.json", "traj_0_sgld.csv", "traj_1_gd.csv", "traj_0_gd.json",
                           "plot_loss.svg", "fixtures/paper_reference.csv"}) {
    INFO(file);
    CHECK(read_text(a / file) == read_text(b / file));
  }
  const ExperimentConfig c = with_out(small_recover(), a);
  const double R = build_generator(c)->radius();
  for (const auto& entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("traj_", 0) != 0 || entry.path().extension() != ".csv") continue;
    const Table t = read_csv(entry.path());
    const std::size_t z0 = t.column_index("z_0");
    for (const auto& row : t.rows) {
      double sq = 0.0;
      for (std::size_t j = z0; j < row.size(); ++j) sq += std::pow(std::stod(row[j]), 2);
      CHECK(std::sqrt(sq) <= R);
    }
  }
}

TEST_CASE("summary means equal the row means") {
  const fs::path out = scratch("means");
  const auto rows = run_recover(with_out(small_recover(), out));
  const json summary = json::parse(read_text(out / "summary.json"));
  const Table results = read_csv(out / "results.csv");
  for (const std::string method : {"sgld", "gd"}) {
    double sum = 0.0;
    int n = 0;
    const auto methods = results.strings("method");
    const auto mse = results.numbers("mse");
    for (std::size_t i = 0; i < methods.size(); ++i) {
      if (methods[i] != method) continue;
      sum += mse[i];
      ++n;
    }
    CHECK(summary["methods"][method]["n"] == n);
    CHECK(summary["methods"][method]["mean_mse"].get<double>() == doctest::Approx(sum / n).epsilon(1e-15));
  }
  CHECK(summary["n_rows"] == rows.size());
  CHECK(summary["config"]["sampler"]["beta"] == 1000);
}

TEST_CASE("phase transition at f = 1 reproduces recover") {
  json rec = small_recover();
  rec["problem"]["f"] = 1.0;
  const auto rows = run_recover(with_out(rec, scratch("phase_rec")));
  json phase = small_recover();
  phase["kind"] = "phase_transition";
  phase["problem"].erase("f");
  phase["phase"] = {{"f_grid", {1.0}}};
  const fs::path out = scratch("phase");
  const auto prow = run_phase_transition(with_out(phase, out));
  REQUIRE(rows.size() == prow.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].mse == prow[i].mse);
    CHECK(rows[i].final_f == prow[i].final_f);
  }
  CHECK(fs::exists(out / "f_1" / "traj_0_sgld.csv"));
  const json summary = json::parse(read_text(out / "summary.json"));
  CHECK(summary["table"].size() == 2);
  CHECK(fs::exists(out / "plot_phase_transition.svg"));
}

TEST_CASE("compare shares the warm start and replots identically") {
  json doc = small_recover();
  doc["kind"] = "compare";
  doc.at("sampler").erase("methods");
  const fs::path out = scratch("compare");
  run_compare(with_out(doc, out));
  for (int seed : {0, 1}) {
    const Table gd = read_csv(out / ("traj_" + std::to_string(seed) + "_gd.csv"));
    const Table sgld = read_csv(out / ("traj_" + std::to_string(seed) + "_sgld.csv"));
    CHECK(gd.rows.front() == sgld.rows.front());
  }
  const std::string mse_plot = read_text(out / "plot_mse.svg");
  const std::string loss_plot = read_text(out / "plot_loss.svg");
  fs::remove(out / "plot_mse.svg");
  replot(ExperimentKind::compare, out);
  CHECK(read_text(out / "plot_mse.svg") == mse_plot);
  CHECK(read_text(out / "plot_loss.svg") == loss_plot);
  CHECK(mse_plot.find("paper") != std::string::npos);
}

TEST_CASE("validate and chain lab outputs") {
  json val = json::parse(R"({
    "generator": {"builtin": "identity", "latent_dim": 3},
    "validate": {"n_pairs": 50, "n_matrices": 2, "f": 1.0}
  })");
  const fs::path vout = scratch("validate");
  val["out"] = vout.string();
  const json vs = run_validate(parse_config(val, ExperimentKind::validate));
  CHECK(vs["strong_smoothness"]["alpha"].get<double>() == doctest::Approx(1.0));
  CHECK(fs::exists(vout / "scatter_strong_smoothness.csv"));
  CHECK(fs::exists(vout / "plot_dissipativity.svg"));

  json lab = json::parse(R"({
    "generator": {"builtin": "double_well"},
    "problem": {"sensing": "identity", "z_star": [2.0]},
    "sampler": {"eta": 0.05, "beta": 2, "lipschitz": 1},
    "chain_lab": {"n_chains": 200, "checkpoints": [0, 50], "betas": [1]}
  })");
  const fs::path lout = scratch("lab");
  lab["out"] = lout.string();
  const json ls = run_chain_lab(parse_config(lab, ExperimentKind::chain_lab));
  CHECK(ls["d"] == 1);
  CHECK(read_csv(lout / "curve.csv").rows.size() == 2);
  CHECK(read_csv(lout / "quadrature.csv").rows.size() == 2);
  const std::string svg = read_text(lout / "plot_mixing.svg");
  replot(ExperimentKind::chain_lab, lout);
  CHECK(read_text(lout / "plot_mixing.svg") == svg);

  json big = lab;
  big["generator"] = {{"builtin", "identity"}, {"latent_dim", 3}};
  big["problem"] = {{"sensing", "identity"}};
  CHECK_THROWS_AS(run_chain_lab(parse_config(big, ExperimentKind::chain_lab)), UnsupportedDimension);
}

TEST_CASE("paper fixture is embedded verbatim") {
  std::ifstream in(fs::path(CSSGLD_SOURCE_DIR) / "fixtures" / "paper_reference.csv", std::ios::binary);
  const std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(paper_reference_csv() == file);
  const Table t = parse_csv(paper_reference_csv());
  CHECK(t.rows.size() == 14);
  CHECK(t.column_index("mse") == 8);
}

TEST_CASE("number formatting and csv parsing") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(std::nan("")) == "nan");
  const Table t = parse_csv("a,b\n1,x\n2.5,y\n");
  CHECK(t.numbers("a") == std::vector<double>{1.0, 2.5});
  CHECK(t.strings("b") == std::vector<std::string>{"x", "y"});
}

}
