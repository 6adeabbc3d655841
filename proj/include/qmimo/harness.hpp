#pragma once

#include "qmimo/altopt.hpp"
#include "qmimo/io.hpp"
#include "qmimo/solvers.hpp"
#include "qmimo/spectral.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qmimo {

enum class ExperimentKind { snr_sweep, solution_histogram, companding_study, gap_study, tts_curve };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& text);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::snr_sweep;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "results";

  // MIMO dimensions (snr-sweep, solution-histogram) and sizes N_T = N_R for
  // tts-curve.
  Index n_tx = 2;
  Index n_rx = 2;
  std::vector<int> sizes{3, 4, 5, 6};
  std::vector<double> powers_db{0, 5, 10, 15, 20};
  double power_db = 18.0;
  int ensemble_size = 1000;
  double noise_var = 1.0;
  int enumeration_cap = kDefaultEnumerationBits;

  AltOptConfig algorithm;
  SolverConfig solver;
  std::optional<double> compand_mu;  // snr-sweep only; studies compare both
  double mu = 255.0;

  // companding-study
  Index qubo_dim = 24;
  int instances = 50;
  // Grow the noise sigma (x1.25 per step) until the plain run returns at
  // least this many distinct solutions; 0 uses solver.noise_sigma as given.
  int target_distinct = 100;

  // gap-study
  std::vector<int> qubits{5, 8, 10};
  int grid_points = 64;
  std::optional<std::filesystem::path> schedule_csv;

  // tts-curve: seconds per anneal; T_run = num_anneals * anneal_time.
  double anneal_time = 1e-6;

  // Refuses specs that would exceed a cap or are otherwise invalid, before
  // any computation starts.
  void validate() const;
};

// Defaults for the kind, then every field present in `j`. Unknown fields and
// type errors are reported with their JSON path.
ExperimentSpec spec_from_json(const json& j);
json to_json(const ExperimentSpec& spec);

struct ResultBundle {
  ExperimentKind kind;
  json spec;
  json summary;
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<std::pair<std::string, json>> documents;
  json provenance;

  const Table& table(const std::string& name) const;
};

ResultBundle run_experiment(const ExperimentSpec& spec);

// results.json, one CSV per table, one JSON per document, plot files and
// provenance.json. Everything except a requested timestamp is a pure
// function of the spec.
std::vector<std::filesystem::path> write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir,
                                                bool stamp_time = false);

// Plot-ready CSV (x column, then one column per series) with a commented
// header that states units. Returns the files written.
std::vector<std::filesystem::path> emit_plot_data(const ResultBundle& bundle, ExperimentKind kind,
                                                  const std::filesystem::path& dir);

}  // namespace qmimo
