#include "qmimo/harness.hpp"
#include "qmimo/rng.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace qmimo;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool stamp = false;
};

// Flags are merged into the JSON document so they override the config file
// and pass through the same validation.
template <typename T>
void override(json& doc, const char* key, const std::optional<T>& value) {
  if (value) doc[key] = *value;
}

int run_spec(json doc, const Common& common) {
  if (common.seed) doc["seed"] = *common.seed;
  if (!common.out.empty()) doc["output_dir"] = common.out;
  const ExperimentSpec spec = spec_from_json(doc);
  const ResultBundle bundle = run_experiment(spec);
  const auto files = write_bundle(bundle, spec.output_dir, common.stamp);
  std::cout << json{{"kind", to_string(spec.kind)}, {"output_dir", spec.output_dir.string()},
                    {"summary", bundle.summary}}
                   .dump(2)
            << "\n";
  return 0;
}

json load_config(const std::string& path) { return path.empty() ? json::object() : read_json_file(path); }

ComplexChannel channel_arg(const std::string& path, Index n_tx, Index n_rx, std::uint64_t seed, std::uint64_t index) {
  if (!path.empty()) return channel_from_json(read_json_file(path));
  return generate_rayleigh_channel(n_tx, n_rx, seed, index);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1-bit MIMO pre/post-coder design through QUBO subproblems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(QMIMO_VERSION));

  std::function<int()> action;

  // run
  Common run_opts;
  auto* run = app.add_subcommand("run", "Run an experiment spec (JSON)");
  run->add_option("--config", run_opts.config, "Experiment spec")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_opts.out, "Output directory");
  run->add_option("--seed", run_opts.seed, "Override the spec seed");
  run->add_flag("--stamp-time", run_opts.stamp, "Record a wall-clock timestamp in provenance.json");
  run->callback([&] { action = [&] { return run_spec(load_config(run_opts.config), run_opts); }; });

  // sweep
  Common sw;
  std::optional<Index> sw_tx, sw_rx;
  std::optional<int> sw_size, sw_restarts, sw_iters;
  std::optional<std::vector<double>> sw_powers;
  std::optional<double> sw_mu, sw_noise;
  std::optional<std::string> sw_backend;
  auto* sweep = app.add_subcommand("sweep", "SNR versus transmit power over a Rayleigh ensemble");
  sweep->add_option("--config", sw.config)->check(CLI::ExistingFile);
  sweep->add_option("--out", sw.out);
  sweep->add_option("--seed", sw.seed);
  sweep->add_flag("--stamp-time", sw.stamp);
  sweep->add_option("--n-tx", sw_tx);
  sweep->add_option("--n-rx", sw_rx);
  sweep->add_option("--ensemble", sw_size);
  sweep->add_option("--powers-db", sw_powers)->delimiter(',');
  sweep->add_option("--noise-var", sw_noise);
  sweep->add_option("--restarts", sw_restarts);
  sweep->add_option("--max-iters", sw_iters);
  sweep->add_option("--backend", sw_backend);
  sweep->add_option("--compand-mu", sw_mu);
  sweep->callback([&] {
    action = [&] {
      json doc = load_config(sw.config);
      doc["kind"] = "snr-sweep";
      override(doc, "n_tx", sw_tx);
      override(doc, "n_rx", sw_rx);
      override(doc, "ensemble_size", sw_size);
      override(doc, "powers_db", sw_powers);
      override(doc, "noise_var", sw_noise);
      override(doc, "compand_mu", sw_mu);
      if (!doc.contains("algorithm")) doc["algorithm"] = json::object();
      override(doc["algorithm"], "restarts", sw_restarts);
      override(doc["algorithm"], "max_iters", sw_iters);
      override(doc["algorithm"], "backend", sw_backend);
      return run_spec(doc, sw);
    };
  });

  // histogram
  Common hi;
  std::optional<Index> hi_tx, hi_rx;
  std::optional<int> hi_anneals, hi_target, hi_sweeps;
  std::optional<double> hi_sigma, hi_mu, hi_power;
  auto* histogram = app.add_subcommand("histogram", "Annealer solution histogram, plain versus companded");
  histogram->add_option("--config", hi.config)->check(CLI::ExistingFile);
  histogram->add_option("--out", hi.out);
  histogram->add_option("--seed", hi.seed);
  histogram->add_flag("--stamp-time", hi.stamp);
  histogram->add_option("--n-tx", hi_tx);
  histogram->add_option("--n-rx", hi_rx);
  histogram->add_option("--anneals", hi_anneals);
  histogram->add_option("--sweeps", hi_sweeps);
  histogram->add_option("--noise-sigma", hi_sigma);
  histogram->add_option("--target-distinct", hi_target);
  histogram->add_option("--mu", hi_mu);
  histogram->add_option("--power-db", hi_power);
  histogram->callback([&] {
    action = [&] {
      json doc = load_config(hi.config);
      doc["kind"] = "solution-histogram";
      override(doc, "n_tx", hi_tx);
      override(doc, "n_rx", hi_rx);
      override(doc, "target_distinct", hi_target);
      override(doc, "mu", hi_mu);
      override(doc, "power_db", hi_power);
      if (!doc.contains("solver")) doc["solver"] = json::object();
      override(doc["solver"], "num_anneals", hi_anneals);
      override(doc["solver"], "sweeps_per_anneal", hi_sweeps);
      override(doc["solver"], "noise_sigma", hi_sigma);
      return run_spec(doc, hi);
    };
  });

  // companding
  Common co;
  std::optional<int> co_instances, co_target, co_anneals, co_sweeps;
  std::optional<Index> co_dim;
  std::optional<double> co_mu, co_sigma;
  auto* companding = app.add_subcommand("companding", "Companding effect on random QUBO instances");
  companding->add_option("--config", co.config)->check(CLI::ExistingFile);
  companding->add_option("--out", co.out);
  companding->add_option("--seed", co.seed);
  companding->add_flag("--stamp-time", co.stamp);
  companding->add_option("--instances", co_instances);
  companding->add_option("--dim", co_dim);
  companding->add_option("--target-distinct", co_target);
  companding->add_option("--mu", co_mu);
  companding->add_option("--anneals", co_anneals);
  companding->add_option("--sweeps", co_sweeps);
  companding->add_option("--noise-sigma", co_sigma);
  companding->callback([&] {
    action = [&] {
      json doc = load_config(co.config);
      doc["kind"] = "companding-study";
      override(doc, "instances", co_instances);
      override(doc, "qubo_dim", co_dim);
      override(doc, "target_distinct", co_target);
      override(doc, "mu", co_mu);
      if (!doc.contains("solver")) doc["solver"] = json::object();
      override(doc["solver"], "num_anneals", co_anneals);
      override(doc["solver"], "sweeps_per_anneal", co_sweeps);
      override(doc["solver"], "noise_sigma", co_sigma);
      return run_spec(doc, co);
    };
  });

  // gap
  Common ga;
  std::optional<std::vector<int>> ga_qubits;
  std::optional<int> ga_instances, ga_grid;
  std::optional<double> ga_mu;
  std::optional<std::string> ga_schedule;
  int profile_n = 0;
  std::uint64_t profile_index = 0;
  bool profile_companded = false;
  auto* gap = app.add_subcommand("gap", "Minimum spectral gap study, or one instance's profile with --profile");
  gap->add_option("--config", ga.config)->check(CLI::ExistingFile);
  gap->add_option("--out", ga.out, "Output directory (study) or CSV file (profile)");
  gap->add_option("--seed", ga.seed);
  gap->add_flag("--stamp-time", ga.stamp);
  gap->add_option("--qubits", ga_qubits)->delimiter(',');
  gap->add_option("--instances", ga_instances);
  gap->add_option("--grid", ga_grid);
  gap->add_option("--mu", ga_mu);
  gap->add_option("--schedule", ga_schedule, "CSV with columns s,A,B")->check(CLI::ExistingFile);
  gap->add_option("--profile", profile_n, "Print the gap profile of one random n-qubit instance");
  gap->add_option("--index", profile_index, "Instance index for --profile");
  gap->add_flag("--companded", profile_companded, "Compand the instance for --profile");
  gap->callback([&] {
    action = [&] {
      if (profile_n > 0) {
        if (!ga.seed) throw Error("seed", "--seed is required");
        AnnealSchedule schedule = AnnealSchedule::linear();
        if (ga_schedule) {
          std::ifstream in(*ga_schedule);
          schedule = read_schedule_csv(in);
        }
        IsingProblem problem = random_ising(profile_n, *ga.seed, profile_index);
        if (profile_companded) problem = compand(problem, ga_mu.value_or(255.0));
        const GapProfile profile = gap_profile(problem, schedule, ga_grid.value_or(64));
        std::ostringstream text;
        write_csv(text, gap_profile_table(profile),
                  {"min_gap " + format_double(profile.min_gap) + " at s " + format_double(profile.argmin_s) +
                   (profile.degenerate ? " (degenerate)" : "")});
        emit(ga.out, text.str());
        return 0;
      }
      json doc = load_config(ga.config);
      doc["kind"] = "gap-study";
      override(doc, "qubits", ga_qubits);
      override(doc, "instances", ga_instances);
      override(doc, "grid_points", ga_grid);
      override(doc, "mu", ga_mu);
      override(doc, "schedule_csv", ga_schedule);
      return run_spec(doc, ga);
    };
  });

  // tts
  Common tt;
  std::optional<std::vector<int>> tt_sizes;
  std::optional<int> tt_ensemble, tt_anneals, tt_sweeps;
  std::optional<double> tt_sigma, tt_time;
  auto* tts_cmd = app.add_subcommand("tts", "Time-to-solution versus problem size");
  tts_cmd->add_option("--config", tt.config)->check(CLI::ExistingFile);
  tts_cmd->add_option("--out", tt.out);
  tts_cmd->add_option("--seed", tt.seed);
  tts_cmd->add_flag("--stamp-time", tt.stamp);
  tts_cmd->add_option("--sizes", tt_sizes)->delimiter(',');
  tts_cmd->add_option("--ensemble", tt_ensemble);
  tts_cmd->add_option("--anneals", tt_anneals);
  tts_cmd->add_option("--sweeps", tt_sweeps);
  tts_cmd->add_option("--noise-sigma", tt_sigma);
  tts_cmd->add_option("--anneal-time", tt_time, "Seconds per anneal");
  tts_cmd->callback([&] {
    action = [&] {
      json doc = load_config(tt.config);
      doc["kind"] = "tts-curve";
      override(doc, "sizes", tt_sizes);
      override(doc, "ensemble_size", tt_ensemble);
      override(doc, "anneal_time", tt_time);
      if (!doc.contains("solver")) doc["solver"] = json::object();
      override(doc["solver"], "num_anneals", tt_anneals);
      override(doc["solver"], "sweeps_per_anneal", tt_sweeps);
      override(doc["solver"], "noise_sigma", tt_sigma);
      return run_spec(doc, tt);
    };
  });

  // design
  std::string ch_path, trace_path;
  Index de_tx = 2, de_rx = 2;
  std::optional<std::uint64_t> de_seed;
  std::uint64_t de_index = 0;
  double de_power = 18.0, de_noise = 1.0;
  AltOptConfig de_cfg;
  std::string de_backend = "exact";
  std::optional<double> de_mu;
  bool de_es = false;
  auto* design = app.add_subcommand("design", "Design a pre/post-coder pair for one channel");
  design->add_option("--channel", ch_path, "Channel JSON (otherwise generated)")->check(CLI::ExistingFile);
  design->add_option("--n-tx", de_tx);
  design->add_option("--n-rx", de_rx);
  design->add_option("--seed", de_seed);
  design->add_option("--index", de_index, "Channel index within the seeded ensemble");
  design->add_option("--power-db", de_power);
  design->add_option("--noise-var", de_noise);
  design->add_option("--restarts", de_cfg.restarts);
  design->add_option("--max-iters", de_cfg.max_iters);
  design->add_option("--rel-tol", de_cfg.rel_tol);
  design->add_option("--backend", de_backend)->check(CLI::IsMember({"exact", "annealed"}));
  design->add_option("--anneals", de_cfg.annealer.num_anneals);
  design->add_option("--noise-sigma", de_cfg.annealer.noise_sigma);
  design->add_option("--compand-mu", de_mu);
  design->add_option("--trace", trace_path, "Write the iteration trace as JSON lines");
  design->add_flag("--exhaustive", de_es, "Also run the exhaustive search");
  design->callback([&] {
    action = [&] {
      if (!de_seed) throw Error("seed", "--seed is required");
      const ComplexChannel channel = channel_arg(ch_path, de_tx, de_rx, *de_seed, de_index);
      const SnrContext ctx(db_to_linear(de_power), de_noise);
      de_cfg.backend = de_backend == "exact" ? Backend::exact : Backend::annealed;
      de_cfg.compand_mu = de_mu;
      de_cfg.seed = *de_seed;
      de_cfg.annealer.seed = *de_seed;
      const Design d = design_pair(channel, ctx, de_cfg);
      json out{{"pair", to_json(d.pair)}, {"snr", d.snr}, {"snr_db", linear_to_db(d.snr)},
               {"rq_snr", snr(channel, rq_baseline(channel), ctx)}};
      if (de_es) {
        const SearchResult es = exhaustive_search(channel, ctx, true);
        out["es_pair"] = to_json(es.pair);
        out["es_snr"] = es.snr;
      }
      if (!trace_path.empty()) {
        std::ostringstream text;
        write_trace_jsonl(text, d.trace);
        write_text_file(trace_path, text.str());
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    };
  });

  // channel
  auto* channel = app.add_subcommand("channel", "Generate or inspect channel matrices");
  channel->require_subcommand(1);
  Index cg_tx = 2, cg_rx = 2;
  std::optional<std::uint64_t> cg_seed;
  std::uint64_t cg_index = 0;
  std::string cg_out, cs_path;
  auto* gen = channel->add_subcommand("gen", "Draw a Rayleigh channel");
  gen->add_option("--n-tx", cg_tx);
  gen->add_option("--n-rx", cg_rx);
  gen->add_option("--seed", cg_seed);
  gen->add_option("--index", cg_index);
  gen->add_option("--out", cg_out, "JSON file (stdout otherwise)");
  gen->callback([&] {
    action = [&] {
      if (!cg_seed) throw Error("seed", "--seed is required");
      emit(cg_out, to_json(generate_rayleigh_channel(cg_tx, cg_rx, *cg_seed, cg_index)).dump(2) + "\n");
      return 0;
    };
  });
  auto* show = channel->add_subcommand("show", "Print a channel JSON as a matrix");
  show->add_option("path", cs_path)->required()->check(CLI::ExistingFile);
  show->callback([&] {
    action = [&] {
      const ComplexChannel ch = channel_from_json(read_json_file(cs_path));
      std::cout << "n_tx " << ch.n_tx() << " n_rx " << ch.n_rx() << "\n" << ch.entries() << "\n";
      return 0;
    };
  });

  // qubo
  std::string qu_channel, qu_json, qu_coo, qu_side = "precoder";
  Index qu_tx = 2, qu_rx = 2;
  std::optional<std::uint64_t> qu_seed;
  std::uint64_t qu_index = 0;
  std::optional<double> qu_mu;
  auto* qubo = app.add_subcommand("qubo", "Export the QUBO of one alternating subproblem");
  qubo->add_option("--channel", qu_channel)->check(CLI::ExistingFile);
  qubo->add_option("--n-tx", qu_tx);
  qubo->add_option("--n-rx", qu_rx);
  qubo->add_option("--seed", qu_seed, "Seeds the channel and the fixed random partner vector");
  qubo->add_option("--index", qu_index);
  qubo->add_option("--side", qu_side, "precoder (fixed g) or postcoder (fixed f)")
      ->check(CLI::IsMember({"precoder", "postcoder"}));
  qubo->add_option("--compand-mu", qu_mu);
  qubo->add_option("--json", qu_json, "Write the QUBO JSON here (stdout otherwise)");
  qubo->add_option("--coo", qu_coo, "Write the upper-triangular coordinate list here");
  qubo->callback([&] {
    action = [&] {
      if (!qu_seed) throw Error("seed", "--seed is required");
      const ComplexChannel ch = channel_arg(qu_channel, qu_tx, qu_rx, *qu_seed, qu_index);
      const bool pre = qu_side == "precoder";
      Rng rng(*qu_seed, {0x71756266ULL, qu_index});
      ComplexVector fixed(pre ? ch.n_rx() : ch.n_tx());
      for (Index i = 0; i < fixed.size(); ++i)
        fixed(i) = Complex(rng.coin() ? 1.0 : -1.0, rng.coin() ? 1.0 : -1.0);
      QuboProblem q = spin_form_to_qubo(pre ? real_embed_precoder(ch, fixed) : real_embed_postcoder(ch, fixed));
      if (qu_mu) q = compand(q, *qu_mu);
      json doc = to_json(q);
      doc["fixed"] = {{"re", std::vector<double>(fixed.real().begin(), fixed.real().end())},
                      {"im", std::vector<double>(fixed.imag().begin(), fixed.imag().end())}};
      emit(qu_json, doc.dump(2) + "\n");
      if (!qu_coo.empty()) {
        std::ostringstream text;
        write_qubo_coo(text, q);
        write_text_file(qu_coo, text.str());
      }
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return action ? action() : 0;
  } catch (const Error& e) {
    std::cerr << json{{"error", e.what()}, {"field", e.field()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"field", nullptr}}.dump() << "\n";
    return 1;
  }
}
