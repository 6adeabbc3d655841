#include "qmimo/harness.hpp"

#include "qmimo/parallel.hpp"
#include "qmimo/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#ifndef QMIMO_VERSION
#define QMIMO_VERSION "dev"
#endif

namespace qmimo {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::snr_sweep: return "snr-sweep";
    case ExperimentKind::solution_histogram: return "solution-histogram";
    case ExperimentKind::companding_study: return "companding-study";
    case ExperimentKind::gap_study: return "gap-study";
    case ExperimentKind::tts_curve: return "tts-curve";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& text) {
  for (auto kind : {ExperimentKind::snr_sweep, ExperimentKind::solution_histogram, ExperimentKind::companding_study,
                    ExperimentKind::gap_study, ExperimentKind::tts_curve})
    if (to_string(kind) == text) return kind;
  throw Error("kind", "unknown experiment kind '" + text + "'");
}

namespace {

ExperimentSpec defaults_for(ExperimentKind kind) {
  ExperimentSpec spec;
  spec.kind = kind;
  switch (kind) {
    case ExperimentKind::snr_sweep:
      break;
    case ExperimentKind::solution_histogram:
      spec.n_tx = spec.n_rx = 4;
      spec.target_distinct = 100;
      spec.solver.noise_sigma = 0.1;
      spec.solver.sweeps_per_anneal = 16;
      break;
    case ExperimentKind::companding_study:
      break;
    case ExperimentKind::gap_study:
      spec.instances = 2000;
      break;
    case ExperimentKind::tts_curve:
      spec.ensemble_size = 100;
      spec.solver.noise_sigma = 0.05;
      spec.solver.sweeps_per_anneal = 4;
      spec.solver.num_anneals = 100;
      break;
  }
  return spec;
}

// Reads fields of one JSON object, remembering which keys were consumed so
// leftovers can be reported as unknown.
class FieldReader {
 public:
  FieldReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw Error(path_.empty() ? "spec" : path_, "expected a JSON object");
  }

  template <typename T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    if (!object_.contains(key)) return;
    try {
      target = object_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(where(key), where(key) + ": " + e.what());
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& target) {
    seen_.insert(key);
    if (!object_.contains(key)) return;
    if (object_.at(key).is_null()) {
      target.reset();
      return;
    }
    T value{};
    read(key, value);
    target = value;
  }

  bool has(const char* key) const { return object_.contains(key); }
  const json& at(const char* key) {
    seen_.insert(key);
    return object_.at(key);
  }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void reject_unknown() const {
    for (const auto& item : object_.items())
      if (!seen_.count(item.key())) throw Error(where(item.key()), "unknown field '" + where(item.key()) + "'");
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

Backend parse_backend(const std::string& text) {
  if (text == "exact") return Backend::exact;
  if (text == "annealed") return Backend::annealed;
  throw Error("algorithm.backend", "backend must be 'exact' or 'annealed'");
}

void check_positive(bool ok, const char* field, const std::string& what) {
  if (!ok) throw Error(field, what);
}

}  // namespace

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw Error("spec", "experiment spec must be a JSON object");
  if (!j.contains("kind")) throw Error("kind", "missing field 'kind'");
  if (!j.contains("seed")) throw Error("seed", "missing field 'seed' (a seed is mandatory)");
  FieldReader top(j, "");
  std::string kind_text;
  top.read("kind", kind_text);
  ExperimentSpec spec = defaults_for(parse_kind(kind_text));

  top.read("seed", spec.seed);
  std::string out_dir = spec.output_dir.string();
  top.read("output_dir", out_dir);
  spec.output_dir = out_dir;
  top.read("n_tx", spec.n_tx);
  top.read("n_rx", spec.n_rx);
  top.read("sizes", spec.sizes);
  top.read("powers_db", spec.powers_db);
  top.read("power_db", spec.power_db);
  top.read("ensemble_size", spec.ensemble_size);
  top.read("noise_var", spec.noise_var);
  top.read("enumeration_cap", spec.enumeration_cap);
  top.read_optional("compand_mu", spec.compand_mu);
  top.read("mu", spec.mu);
  top.read("qubo_dim", spec.qubo_dim);
  top.read("instances", spec.instances);
  top.read("target_distinct", spec.target_distinct);
  top.read("qubits", spec.qubits);
  top.read("grid_points", spec.grid_points);
  std::optional<std::string> schedule;
  top.read_optional("schedule_csv", schedule);
  if (schedule) spec.schedule_csv = *schedule;
  top.read("anneal_time", spec.anneal_time);

  if (top.has("algorithm")) {
    FieldReader alg(top.at("algorithm"), "algorithm");
    alg.read("restarts", spec.algorithm.restarts);
    alg.read("max_iters", spec.algorithm.max_iters);
    alg.read("rel_tol", spec.algorithm.rel_tol);
    std::string backend = spec.algorithm.backend == Backend::exact ? "exact" : "annealed";
    alg.read("backend", backend);
    spec.algorithm.backend = parse_backend(backend);
    alg.reject_unknown();
  }
  if (top.has("solver")) {
    FieldReader sol(top.at("solver"), "solver");
    sol.read("num_anneals", spec.solver.num_anneals);
    sol.read("sweeps_per_anneal", spec.solver.sweeps_per_anneal);
    sol.read("t_start", spec.solver.schedule.start);
    sol.read("t_end", spec.solver.schedule.end);
    sol.read("noise_sigma", spec.solver.noise_sigma);
    sol.reject_unknown();
  }
  top.reject_unknown();
  spec.validate();
  return spec;
}

json to_json(const ExperimentSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind);
  j["seed"] = spec.seed;
  j["output_dir"] = spec.output_dir.string();
  j["n_tx"] = spec.n_tx;
  j["n_rx"] = spec.n_rx;
  j["sizes"] = spec.sizes;
  j["powers_db"] = spec.powers_db;
  j["power_db"] = spec.power_db;
  j["ensemble_size"] = spec.ensemble_size;
  j["noise_var"] = spec.noise_var;
  j["enumeration_cap"] = spec.enumeration_cap;
  j["compand_mu"] = spec.compand_mu ? json(*spec.compand_mu) : json(nullptr);
  j["mu"] = spec.mu;
  j["qubo_dim"] = spec.qubo_dim;
  j["instances"] = spec.instances;
  j["target_distinct"] = spec.target_distinct;
  j["qubits"] = spec.qubits;
  j["grid_points"] = spec.grid_points;
  j["schedule_csv"] = spec.schedule_csv ? json(spec.schedule_csv->string()) : json(nullptr);
  j["anneal_time"] = spec.anneal_time;
  j["algorithm"] = {{"restarts", spec.algorithm.restarts},
                    {"max_iters", spec.algorithm.max_iters},
                    {"rel_tol", spec.algorithm.rel_tol},
                    {"backend", spec.algorithm.backend == Backend::exact ? "exact" : "annealed"}};
  j["solver"] = {{"num_anneals", spec.solver.num_anneals},
                 {"sweeps_per_anneal", spec.solver.sweeps_per_anneal},
                 {"t_start", spec.solver.schedule.start},
                 {"t_end", spec.solver.schedule.end},
                 {"noise_sigma", spec.solver.noise_sigma}};
  return j;
}

void ExperimentSpec::validate() const {
  check_positive(n_tx >= 1, "n_tx", "n_tx must be >= 1");
  check_positive(n_rx >= 1, "n_rx", "n_rx must be >= 1");
  check_positive(ensemble_size >= 1, "ensemble_size", "ensemble_size must be >= 1");
  check_positive(noise_var > 0.0, "noise_var", "noise_var must be > 0");
  check_positive(mu > 0.0, "mu", "mu must be > 0");
  check_positive(enumeration_cap >= 1 && enumeration_cap <= 62, "enumeration_cap",
                 "enumeration_cap must lie in 1..62");
  check_positive(!compand_mu || *compand_mu > 0.0, "compand_mu", "compand_mu must be > 0");
  auto relabel = [](const std::string& group, const Error& e) {
    std::string field = e.field();
    if (field == "schedule.start") field = "t_start";
    if (field == "schedule.end") field = "t_end";
    return Error(group + "." + field, e.what());
  };
  try {
    solver.validate();
  } catch (const Error& e) {
    throw relabel("solver", e);
  }
  try {
    AltOptConfig alg = algorithm;
    alg.annealer = solver;
    alg.validate();
  } catch (const Error& e) {
    throw relabel("algorithm", e);
  }

  switch (kind) {
    case ExperimentKind::snr_sweep:
      check_positive(!powers_db.empty(), "powers_db", "powers_db must not be empty");
      check_positive(2 * std::max(n_tx, n_rx) <= kExactSolverCap || algorithm.backend == Backend::annealed, "n_tx",
                     "QUBO subproblems of dimension 2*max(n_tx, n_rx) exceed the exact solver cap");
      check_positive(2 * std::max(n_tx, n_rx) <= 64, "n_tx", "QUBO subproblems exceed 64 variables");
      break;
    case ExperimentKind::solution_histogram:
      check_positive(2 * n_tx <= kExactSolverCap, "n_tx", "precoder QUBO exceeds the exact solver cap");
      check_positive(target_distinct >= 0, "target_distinct", "target_distinct must be >= 0");
      break;
    case ExperimentKind::companding_study:
      check_positive(qubo_dim >= 1 && qubo_dim <= kExactSolverCap, "qubo_dim",
                     "qubo_dim must lie in 1.." + std::to_string(kExactSolverCap));
      check_positive(instances >= 1, "instances", "instances must be >= 1");
      check_positive(target_distinct >= 0, "target_distinct", "target_distinct must be >= 0");
      break;
    case ExperimentKind::gap_study:
      check_positive(!qubits.empty(), "qubits", "qubits must not be empty");
      for (int n : qubits)
        check_positive(n >= 1 && n <= kQubitCap, "qubits",
                       "qubit counts must lie in 1.." + std::to_string(kQubitCap));
      check_positive(instances >= 1, "instances", "instances must be >= 1");
      check_positive(grid_points >= 2, "grid_points", "grid_points must be >= 2");
      break;
    case ExperimentKind::tts_curve:
      check_positive(!sizes.empty(), "sizes", "sizes must not be empty");
      for (int n : sizes)
        check_positive(n >= 1 && 2 * n <= kExactSolverCap, "sizes",
                       "sizes must satisfy 1 <= n and 2n <= " + std::to_string(kExactSolverCap));
      check_positive(anneal_time > 0.0, "anneal_time", "anneal_time must be > 0");
      break;
  }
}

const Table& ResultBundle::table(const std::string& name) const {
  for (const auto& [key, t] : tables)
    if (key == name) return t;
  throw Error("table", "bundle has no table '" + name + "'");
}

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  if (std::isinf(v[mid])) return v[mid];
  return 0.5 * (v[mid - 1] + v[mid]);
}

double ground_tol(double energy) { return 1e-9 * (1.0 + std::abs(energy)); }

ComplexVector random_postcoder(Index n, std::uint64_t seed, std::uint64_t index) {
  Rng rng(seed, {0x706f7374ULL, index});
  ComplexVector g(n);
  for (Index i = 0; i < n; ++i) g(i) = Complex(rng.coin() ? 1.0 : -1.0, rng.coin() ? 1.0 : -1.0);
  return g;
}

// Noise level at which the plain ensemble returns at least `target` distinct
// solutions (or the largest level tried).
double calibrate_sigma(const QuboProblem& q, SolverConfig cfg, int target) {
  double sigma = cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 0.01;
  if (target <= 0) return cfg.noise_sigma;
  cfg.compand_mu.reset();
  for (int step = 0; step < 64 && sigma < 4.0; ++step, sigma *= 1.25) {
    cfg.noise_sigma = sigma;
    if (solve_annealed(q, cfg).distinct() >= static_cast<std::size_t>(target)) return sigma;
  }
  return sigma;
}

Table histogram_table(const SolutionHistogram& hist, const QuboProblem& q, double factor) {
  Table t{{"rank", "energy", "snr", "probability", "count"}, {}};
  for (std::size_t r = 0; r < hist.entries.size(); ++r) {
    const auto& e = hist.entries[r];
    t.add_row({static_cast<double>(r + 1), e.energy, factor * spin_objective(q, e.energy), hist.probability(r),
               static_cast<double>(e.count)});
  }
  return t;
}

AnnealSchedule load_schedule(const ExperimentSpec& spec) {
  if (!spec.schedule_csv) return AnnealSchedule::linear();
  std::ifstream in(*spec.schedule_csv);
  if (!in) throw Error("schedule_csv", "cannot open " + spec.schedule_csv->string());
  return read_schedule_csv(in);
}

ResultBundle run_sweep(const ExperimentSpec& spec, ResultBundle bundle) {
  AltOptConfig cfg = spec.algorithm;
  cfg.annealer = spec.solver;
  cfg.compand_mu = spec.compand_mu;
  cfg.seed = spec.seed;
  const EnsembleSpec ensemble{spec.n_tx, spec.n_rx, spec.ensemble_size, spec.seed};
  const SweepResult sweep = snr_sweep(ensemble, spec.powers_db, spec.noise_var, cfg, spec.enumeration_cap);

  Table rows{{"P_dB", "snr_es", "snr_alg1", "snr_rq"}, {}};
  for (const auto& r : sweep.rows) rows.add_row({r.power_db, r.snr_es, r.snr_alg1, r.snr_rq});

  const auto& g = sweep.gains;
  const bool with_es = !g.es.empty();
  Table channels{{"channel", "gain_es", "gain_alg1", "gain_rq", "iterations"}, {}};
  std::size_t attained = 0;
  for (std::size_t k = 0; k < g.alg1.size(); ++k) {
    const double es = with_es ? g.es[k] : std::numeric_limits<double>::quiet_NaN();
    if (with_es && g.alg1[k] >= es * (1.0 - 1e-9)) ++attained;
    channels.add_row({static_cast<double>(k), es, g.alg1[k], g.rq[k], static_cast<double>(g.iterations[k])});
  }

  bundle.summary = {{"mean_gain_es", with_es ? json(mean(g.es)) : json(nullptr)},
                    {"mean_gain_alg1", mean(g.alg1)},
                    {"mean_gain_rq", mean(g.rq)},
                    {"es_attained_fraction",
                     with_es ? json(static_cast<double>(attained) / static_cast<double>(g.alg1.size())) : json(nullptr)},
                    {"ascent_violations", g.ascent_violations}};
  bundle.tables.emplace_back("sweep", std::move(rows));
  bundle.tables.emplace_back("channels", std::move(channels));
  return bundle;
}

ResultBundle run_histogram(const ExperimentSpec& spec, ResultBundle bundle) {
  const ComplexChannel channel = generate_rayleigh_channel(spec.n_tx, spec.n_rx, spec.seed, 0);
  const ComplexVector g = random_postcoder(spec.n_rx, spec.seed, 0);
  const QuboProblem q = spin_form_to_qubo(real_embed_precoder(channel, g));
  const ExactSolution ground = solve_exact(q);

  SolverConfig cfg = spec.solver;
  cfg.seed = stream_key(spec.seed, {0x68697374ULL});
  cfg.noise_sigma = calibrate_sigma(q, cfg, spec.target_distinct);
  const SolutionHistogram plain = solve_annealed(q, cfg);
  cfg.compand_mu = spec.mu;
  const SolutionHistogram companded = solve_annealed(q, cfg);

  const double factor = snr_factor(spec.n_tx, spec.n_rx, SnrContext(db_to_linear(spec.power_db), spec.noise_var));
  const double tol = ground_tol(ground.energy);
  auto describe = [&](const SolutionHistogram& h) {
    return json{{"distinct", h.distinct()},
                {"top_probability", h.probability(0)},
                {"ground_probability", success_probability(h, ground.energy, tol)},
                {"best_snr", factor * spin_objective(q, h.best().energy)}};
  };
  bundle.summary = {{"noise_sigma", cfg.noise_sigma},
                    {"ground_energy", ground.energy},
                    {"ground_snr", factor * spin_objective(q, ground.energy)},
                    {"plain", describe(plain)},
                    {"companded", describe(companded)}};
  bundle.tables.emplace_back("histogram_plain", histogram_table(plain, q, factor));
  bundle.tables.emplace_back("histogram_companded", histogram_table(companded, q, factor));
  bundle.documents.emplace_back("channel", to_json(channel));
  bundle.documents.emplace_back("qubo", to_json(q));
  bundle.documents.emplace_back("histogram_plain", to_json(plain));
  bundle.documents.emplace_back("histogram_companded", to_json(companded));
  return bundle;
}

ResultBundle run_companding(const ExperimentSpec& spec, ResultBundle bundle) {
  const auto count = static_cast<std::size_t>(spec.instances);
  std::vector<std::vector<double>> rows(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng(spec.seed, {0x636f6d70ULL, i});
    RealMatrix a(spec.qubo_dim, spec.qubo_dim);
    for (Index r = 0; r < a.rows(); ++r)
      for (Index c = r; c < a.cols(); ++c) a(r, c) = a(c, r) = rng.normal();
    const QuboProblem q = calibrate(a);
    const ExactSolution ground = solve_exact(q);
    const ExactSolution companded_ground = solve_exact(compand(q, spec.mu));

    SolverConfig cfg = spec.solver;
    cfg.seed = stream_key(spec.seed, {0x616e6e6cULL, i});
    cfg.noise_sigma = calibrate_sigma(q, cfg, spec.target_distinct);
    const SolutionHistogram plain = solve_annealed(q, cfg);
    cfg.compand_mu = spec.mu;
    const SolutionHistogram comp = solve_annealed(q, cfg);

    const double tol = ground_tol(ground.energy);
    const double p_plain = success_probability(plain, ground.energy, tol);
    const double p_comp = success_probability(comp, ground.energy, tol);
    const bool fewer = comp.distinct() * 5 <= plain.distinct();
    const bool likelier = p_comp > 0.0 && p_comp >= 3.0 * p_plain;
    rows[i] = {static_cast<double>(i),
               cfg.noise_sigma,
               static_cast<double>(plain.distinct()),
               static_cast<double>(comp.distinct()),
               p_plain,
               p_comp,
               companded_ground.bits == ground.bits ? 1.0 : 0.0,
               fewer ? 1.0 : 0.0,
               likelier ? 1.0 : 0.0};
  });

  Table t{{"instance", "noise_sigma", "distinct_plain", "distinct_companded", "p_plain", "p_companded",
           "ground_preserved", "fewer_5x", "prob_3x"},
          {}};
  double fewer = 0, likelier = 0, both = 0, preserved = 0;
  for (auto& row : rows) {
    preserved += row[6];
    fewer += row[7];
    likelier += row[8];
    both += row[7] * row[8];
    t.add_row(std::move(row));
  }
  const double n = static_cast<double>(count);
  bundle.summary = {{"fraction_fewer_distinct_5x", fewer / n},
                    {"fraction_ground_probability_3x", likelier / n},
                    {"fraction_both", both / n},
                    {"fraction_ground_preserved", preserved / n}};
  bundle.tables.emplace_back("instances", std::move(t));
  return bundle;
}

ResultBundle run_gap_study(const ExperimentSpec& spec, ResultBundle bundle) {
  const AnnealSchedule schedule = load_schedule(spec);
  Table summary{{"n", "mean_gap_plain", "mean_gap_companded", "efficiency", "flagged", "mean_gap_plain_unflagged",
                 "mean_gap_companded_unflagged"},
                {}};
  Table instances{{"n", "instance", "gap_plain", "gap_companded", "flagged"}, {}};
  for (int n : spec.qubits) {
    const GapStudy study = companding_gap_study(n, spec.instances, schedule, spec.mu,
                                                stream_key(spec.seed, {static_cast<std::uint64_t>(n)}),
                                                spec.grid_points);
    summary.add_row({static_cast<double>(n), study.mean_plain, study.mean_companded, study.efficiency,
                     static_cast<double>(study.num_flagged), study.mean_plain_unflagged,
                     study.mean_companded_unflagged});
    for (std::size_t i = 0; i < study.plain.size(); ++i)
      instances.add_row({static_cast<double>(n), static_cast<double>(i), study.plain[i], study.companded[i],
                         study.flagged[i] ? 1.0 : 0.0});
  }
  json per_n = json::array();
  for (const auto& row : summary.rows)
    per_n.push_back({{"n", row[0]}, {"mean_gap_plain", row[1]}, {"mean_gap_companded", row[2]}, {"efficiency", row[3]}});
  bundle.summary = {{"per_n", per_n}};
  bundle.tables.emplace_back("gap_summary", std::move(summary));
  bundle.tables.emplace_back("gap_instances", std::move(instances));
  return bundle;
}

ResultBundle run_tts(const ExperimentSpec& spec, ResultBundle bundle) {
  const double t_run = static_cast<double>(spec.solver.num_anneals) * spec.anneal_time;
  Table per{{"size", "channel", "p", "tts"}, {}};
  Table curve{{"size", "median_tts", "mean_p", "unsolved_fraction"}, {}};
  const auto count = static_cast<std::size_t>(spec.ensemble_size);
  for (int size : spec.sizes) {
    std::vector<double> ps(count), times(count);
    parallel_for(count, [&](std::size_t c) {
      const ComplexChannel channel = generate_rayleigh_channel(size, size, stream_key(spec.seed, {0x747473ULL}),
                                                               static_cast<std::uint64_t>(size) * 1000003ULL + c);
      const QuboProblem q = spin_form_to_qubo(real_embed_precoder(channel, random_postcoder(size, spec.seed, c)));
      const ExactSolution ground = solve_exact(q);
      SolverConfig cfg = spec.solver;
      cfg.seed = stream_key(spec.seed, {0x74747361ULL, static_cast<std::uint64_t>(size), c});
      const SolutionHistogram hist = solve_annealed(q, cfg);
      ps[c] = success_probability(hist, ground.energy, ground_tol(ground.energy));
      times[c] = tts(t_run, ps[c]);
    });
    double unsolved = 0;
    for (std::size_t c = 0; c < count; ++c) {
      per.add_row({static_cast<double>(size), static_cast<double>(c), ps[c], times[c]});
      if (ps[c] == 0.0) ++unsolved;
    }
    curve.add_row({static_cast<double>(size), median(times), mean(ps), unsolved / static_cast<double>(count)});
  }
  bundle.summary = {{"t_run", t_run}};
  bundle.tables.emplace_back("tts", std::move(curve));
  bundle.tables.emplace_back("tts_instances", std::move(per));
  return bundle;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ResultBundle run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ResultBundle bundle{spec.kind, to_json(spec), json::object(), {}, {}, json::object()};
  bundle.provenance = {{"version", QMIMO_VERSION}, {"seed", spec.seed}, {"kind", to_string(spec.kind)}};
  switch (spec.kind) {
    case ExperimentKind::snr_sweep: return run_sweep(spec, std::move(bundle));
    case ExperimentKind::solution_histogram: return run_histogram(spec, std::move(bundle));
    case ExperimentKind::companding_study: return run_companding(spec, std::move(bundle));
    case ExperimentKind::gap_study: return run_gap_study(spec, std::move(bundle));
    case ExperimentKind::tts_curve: return run_tts(spec, std::move(bundle));
  }
  throw Error("kind", "unhandled experiment kind");
}

namespace {

std::string csv_text(const Table& t, const std::vector<std::string>& comments = {}) {
  std::ostringstream out;
  write_csv(out, t, comments);
  return out.str();
}

Table require_rows(const ResultBundle& bundle, const std::string& name) {
  const Table& t = bundle.table(name);
  if (t.rows.empty()) throw Error(name, "table '" + name + "' is empty; nothing to plot");
  return t;
}

double to_db(double x) { return std::isnan(x) ? x : linear_to_db(x); }

}  // namespace

std::vector<std::filesystem::path> emit_plot_data(const ResultBundle& bundle, ExperimentKind kind,
                                                  const std::filesystem::path& dir) {
  if (bundle.kind != kind)
    throw Error("kind", "bundle holds '" + to_string(bundle.kind) + "' results, not '" + to_string(kind) + "'");

  // Build everything first so a failure leaves no partial output.
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  switch (kind) {
    case ExperimentKind::snr_sweep: {
      const Table src = require_rows(bundle, "sweep");
      Table plot{{"P_dB", "snr_es", "snr_alg1", "snr_rq"}, {}};
      for (const auto& r : src.rows) plot.add_row({r[0], to_db(r[1]), to_db(r[2]), to_db(r[3])});
      files.emplace_back("plot_snr_sweep.csv",
                         csv_text(plot, {"P_dB: transmit power [dB]", "snr_*: ensemble-mean received SNR [dB]"}));
      break;
    }
    case ExperimentKind::solution_histogram: {
      for (const char* name : {"histogram_plain", "histogram_companded"}) {
        const Table src = require_rows(bundle, name);
        Table plot{{"rank", "energy", "snr", "probability"}, {}};
        for (const auto& r : src.rows) plot.add_row({r[0], r[1], to_db(r[2]), r[3]});
        files.emplace_back(std::string("plot_") + name + ".csv",
                           csv_text(plot, {"rank: 1 = lowest energy", "energy: noiseless QUBO energy",
                                           "snr: received SNR [dB]", "probability: occurrence frequency [linear]"}));
      }
      break;
    }
    case ExperimentKind::companding_study: {
      const Table src = require_rows(bundle, "instances");
      Table plot{{"instance", "distinct_plain", "distinct_companded", "p_plain", "p_companded"}, {}};
      for (const auto& r : src.rows) plot.add_row({r[0], r[2], r[3], r[4], r[5]});
      files.emplace_back("plot_companding_study.csv",
                         csv_text(plot, {"distinct_*: distinct solutions per ensemble",
                                         "p_*: ground-state occurrence probability [linear]"}));
      break;
    }
    case ExperimentKind::gap_study: {
      const Table src = require_rows(bundle, "gap_summary");
      Table plot{{"n", "mean_gap_plain", "mean_gap_companded", "efficiency"}, {}};
      for (const auto& r : src.rows) plot.add_row({r[0], r[1], r[2], r[3]});
      files.emplace_back("plot_gap_study.csv",
                         csv_text(plot, {"n: qubits", "mean_gap_*: mean minimum spectral gap [Ising units]",
                                         "efficiency: P(companded gap > plain gap) [linear]"}));
      break;
    }
    case ExperimentKind::tts_curve: {
      const Table src = require_rows(bundle, "tts");
      Table plot{{"size", "median_tts", "mean_p"}, {}};
      for (const auto& r : src.rows) plot.add_row({r[0], r[1], r[2]});
      files.emplace_back("plot_tts_curve.csv", csv_text(plot, {"size: N_T = N_R", "median_tts: seconds",
                                                               "mean_p: mean success probability [linear]"}));
      break;
    }
  }

  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, text] : files) {
    write_text_file(dir / name, text);
    written.push_back(dir / name);
  }
  return written;
}

std::vector<std::filesystem::path> write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir,
                                                bool stamp_time) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    write_text_file(dir / name, text);
    written.push_back(dir / name);
  };

  json results{{"spec", bundle.spec}, {"summary", bundle.summary}, {"tables", json::object()}};
  for (const auto& [name, table] : bundle.tables) {
    results["tables"][name] = to_json(table);
    put(name + ".csv", csv_text(table));
  }
  for (const auto& [name, doc] : bundle.documents) put(name + ".json", doc.dump(2) + "\n");
  put("results.json", results.dump(2) + "\n");

  json provenance = bundle.provenance;
  if (stamp_time) provenance["timestamp"] = utc_timestamp();
  put("provenance.json", provenance.dump(2) + "\n");

  auto plots = emit_plot_data(bundle, bundle.kind, dir);
  written.insert(written.end(), plots.begin(), plots.end());
  return written;
}

}  // namespace qmimo
