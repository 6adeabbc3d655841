#include <doctest.h>

#include "qmimo/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qmimo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qmimo_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string field_of(const json& j) {
  try {
    spec_from_json(j);
  } catch (const Error& e) {
    return e.field();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("spec parsing") {
  const auto spec = spec_from_json(json{{"kind", "snr-sweep"}, {"seed", 4}, {"algorithm", {{"restarts", 3}}}});
  CHECK(spec.kind == ExperimentKind::snr_sweep);
  CHECK(spec.seed == 4);
  CHECK(spec.algorithm.restarts == 3);
  CHECK(spec_from_json(to_json(spec)).algorithm.restarts == 3);

  CHECK(field_of(json{{"kind", "snr-sweep"}}) == "seed");
  CHECK(field_of(json{{"seed", 1}}) == "kind");
  CHECK(field_of(json{{"kind", "nope"}, {"seed", 1}}) == "kind");
  CHECK(field_of(json{{"kind", "snr-sweep"}, {"seed", 1}, {"bogus", 1}}) == "bogus");
  CHECK(field_of(json{{"kind", "snr-sweep"}, {"seed", 1}, {"algorithm", {{"restarts", 0}}}}) ==
        "algorithm.restarts");
  CHECK(field_of(json{{"kind", "snr-sweep"}, {"seed", 1}, {"algorithm", {{"backend", "gpu"}}}}) ==
        "algorithm.backend");
  CHECK(field_of(json{{"kind", "snr-sweep"}, {"seed", 1}, {"solver", {{"t_end", -1.0}}}}) == "solver.t_end");
  CHECK(field_of(json{{"kind", "snr-sweep"}, {"seed", 1}, {"n_tx", "two"}}) == "n_tx");
  CHECK(field_of(json{{"kind", "snr-sweep"}, {"seed", 1}, {"ensemble_size", 0}}) == "ensemble_size");
  CHECK(field_of(json{{"kind", "snr-sweep"}, {"seed", 1}, {"powers_db", json::array()}}) == "powers_db");
  CHECK(field_of(json{{"kind", "snr-sweep"}, {"seed", 1}, {"n_tx", 13}, {"n_rx", 2}}) == "n_tx");
  CHECK(field_of(json{{"kind", "gap-study"}, {"seed", 1}, {"qubits", {5, 13}}}) == "qubits");
  CHECK(field_of(json{{"kind", "companding-study"}, {"seed", 1}, {"qubo_dim", 30}}) == "qubo_dim");
  CHECK(field_of(json{{"kind", "tts-curve"}, {"seed", 1}, {"sizes", {3, 13}}}) == "sizes");
}

TEST_CASE("snr-sweep bundle") {
  auto spec = spec_from_json(json{{"kind", "snr-sweep"}, {"seed", 2}, {"ensemble_size", 100}});
  const auto bundle = run_experiment(spec);
  const auto& sweep = bundle.table("sweep");
  CHECK(sweep.columns == std::vector<std::string>{"P_dB", "snr_es", "snr_alg1", "snr_rq"});
  for (const auto& row : sweep.rows) {
    CHECK(row[1] >= row[2] * (1 - 1e-12));
    CHECK(row[2] >= row[3]);
  }
  CHECK(bundle.summary["ascent_violations"] == 0);

  const auto dir = scratch("sweep");
  const auto files = write_bundle(bundle, dir);
  CHECK(fs::exists(dir / "results.json"));
  CHECK(fs::exists(dir / "provenance.json"));
  CHECK(!read_json_file(dir / "provenance.json").contains("timestamp"));
  std::ifstream plot(dir / "plot_snr_sweep.csv");
  const Table t = read_csv(plot);
  CHECK(t.columns == std::vector<std::string>{"P_dB", "snr_es", "snr_alg1", "snr_rq"});
  CHECK(t.rows.size() == spec.powers_db.size());

  const auto stamped = scratch("stamped");
  write_bundle(bundle, stamped, true);
  CHECK(read_json_file(stamped / "provenance.json").contains("timestamp"));

  CHECK_THROWS_AS(emit_plot_data(bundle, ExperimentKind::gap_study, scratch("wrong")), Error);
  CHECK(!fs::exists(scratch("wrong") / "plot_gap_study.csv"));
}

TEST_CASE("bundles are reproducible") {
  const json spec{{"kind", "solution-histogram"}, {"seed", 9}, {"solver", {{"num_anneals", 200}}}};
  const auto a = scratch("repro_a");
  const auto b = scratch("repro_b");
  const auto files_a = write_bundle(run_experiment(spec_from_json(spec)), a);
  write_bundle(run_experiment(spec_from_json(spec)), b);
  for (const auto& f : files_a) CHECK(slurp(f) == slurp(b / f.filename()));
}

TEST_CASE("solution-histogram bundle") {
  const auto bundle =
      run_experiment(spec_from_json(json{{"kind", "solution-histogram"}, {"seed", 1}}));
  const auto& plain = bundle.table("histogram_plain");
  const auto& comp = bundle.table("histogram_companded");
  CHECK(plain.columns[0] == "rank");
  CHECK(plain.rows.size() >= 100);
  CHECK(comp.rows.size() < plain.rows.size());
  CHECK(bundle.summary["companded"]["ground_probability"].get<double>() >
        bundle.summary["plain"]["ground_probability"].get<double>());

  const auto dir = scratch("hist");
  const auto files = emit_plot_data(bundle, ExperimentKind::solution_histogram, dir);
  REQUIRE(files.size() == 2);
  std::ifstream in(files[0]);
  CHECK(read_csv(in).columns == std::vector<std::string>{"rank", "energy", "snr", "probability"});

  ResultBundle empty = bundle;
  empty.tables[1].second.rows.clear();
  const auto none = scratch("hist_empty");
  CHECK_THROWS_AS(emit_plot_data(empty, ExperimentKind::solution_histogram, none), Error);
  CHECK(!fs::exists(none));
}

TEST_CASE("tts-curve grows with size") {
  const auto bundle = run_experiment(spec_from_json(json{{"kind", "tts-curve"}, {"seed", 3}}));
  const auto& curve = bundle.table("tts");
  REQUIRE(curve.rows.size() == 4);
  for (std::size_t i = 1; i < curve.rows.size(); ++i) {
    CHECK(curve.rows[i][1] >= curve.rows[i - 1][1]);
    CHECK(curve.rows[i][2] <= curve.rows[i - 1][2]);
  }
}

TEST_CASE("gap-study and companding-study bundles") {
  const auto gap = run_experiment(
      spec_from_json(json{{"kind", "gap-study"}, {"seed", 3}, {"qubits", {2, 4}}, {"instances", 10}}));
  CHECK(gap.table("gap_summary").rows.size() == 2);
  CHECK(gap.table("gap_instances").rows.size() == 20);

  const auto comp = run_experiment(spec_from_json(json{{"kind", "companding-study"},
                                                       {"seed", 3},
                                                       {"qubo_dim", 10},
                                                       {"instances", 2},
                                                       {"target_distinct", 20},
                                                       {"solver", {{"num_anneals", 200}}}}));
  const auto& rows = comp.table("instances").rows;
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][2] >= 20);

  const auto dir = scratch("gap_schedule");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "sched.csv");
    out << "s,A,B\n0,1,0\n1,0,1\n";
  }
  const auto tab = run_experiment(spec_from_json(json{{"kind", "gap-study"},
                                                      {"seed", 3},
                                                      {"qubits", {2, 4}},
                                                      {"instances", 10},
                                                      {"schedule_csv", (dir / "sched.csv").string()}}));
  CHECK(tab.table("gap_summary") == gap.table("gap_summary"));
}
