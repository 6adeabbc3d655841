// Acceptance gate: one PASS/FAIL line per criterion. Runs every criterion, or
// a single one with --criterion N. Exit status is non-zero if any line fails.

#include "qmimo/harness.hpp"
#include "qmimo/rng.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

using namespace qmimo;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

ComplexVector random_symbols(Index n, Rng& rng) {
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(rng.coin() ? 1.0 : -1.0, rng.coin() ? 1.0 : -1.0);
  return v;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Outcome embedding_correctness() {
  Rng rng(kSeed, {1});
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const Index nt = 1 + static_cast<Index>(rng.below(3));
    const Index nr = 1 + static_cast<Index>(rng.below(3));
    const auto h = generate_rayleigh_channel(nt, nr, kSeed, 1000 + static_cast<std::uint64_t>(trial));
    const ComplexVector f = random_symbols(nt, rng);
    const ComplexVector g = random_symbols(nr, rng);
    const double direct = std::norm(g.dot(h.entries() * f));
    const double pre = real_embed_precoder(h, g).evaluate(stack_coding_vector(f));
    const double post = real_embed_postcoder(h, f).evaluate(stack_coding_vector(g));
    worst = std::max({worst, rel_err(pre, direct), rel_err(post, direct)});
  }
  return {worst <= 1e-9, "500 instances, worst relative error " + fmt(worst)};
}

Outcome qubo_equivalence() {
  Rng rng(kSeed, {2});
  int agree = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(12));
    RealMatrix v(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = r; c < n; ++c) v(r, c) = v(c, r) = rng.normal();
    const SpinQuadraticForm form{v};
    const QuboProblem q = spin_form_to_qubo(form);

    double max_spin = -std::numeric_limits<double>::infinity();
    double min_qubo = std::numeric_limits<double>::infinity();
    Bits arg_qubo = 0;
    const Bits total = Bits{1} << n;
    for (Bits b = 0; b < total; ++b) {
      const double s = form.evaluate(bits_to_spins(b, n));
      const double e = qubo_energy(q, b);
      worst = std::max(worst, std::abs(spin_objective(q, e) - s) / std::max(1.0, std::abs(s)));
      max_spin = std::max(max_spin, s);
      if (e < min_qubo) {
        min_qubo = e;
        arg_qubo = b;
      }
    }
    const double at_argmin = form.evaluate(bits_to_spins(arg_qubo, n));
    if (std::abs(at_argmin - max_spin) <= 1e-9 * std::max(1.0, std::abs(max_spin))) ++agree;
  }
  return {agree == 200 && worst <= 1e-9,
          std::to_string(agree) + "/200 argmin==argmax, worst reconstruction error " + fmt(worst)};
}

struct EnsembleRun {
  int size;
  EnsembleGains gains;
  std::vector<SweepRow> rows;
};

const std::vector<EnsembleRun>& criterion3_runs() {
  static const std::vector<EnsembleRun> runs = [] {
    std::vector<EnsembleRun> out;
    AltOptConfig cfg;
    cfg.restarts = 8;
    cfg.max_iters = 8;
    cfg.rel_tol = 0.01;
    cfg.backend = Backend::exact;
    cfg.seed = kSeed;
    for (int n : {2, 3, 4}) {
      const EnsembleSpec ensemble{n, n, 1000, stream_key(kSeed, {3, static_cast<std::uint64_t>(n)})};
      auto result = snr_sweep(ensemble, {0, 5, 10, 15, 20}, 1.0, cfg);
      out.push_back({n, std::move(result.gains), std::move(result.rows)});
    }
    return out;
  }();
  return runs;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Outcome near_optimality() {
  bool pass = true;
  std::string detail;
  for (const auto& run : criterion3_runs()) {
    const double es = mean(run.gains.es);
    const double alg = mean(run.gains.alg1);
    std::size_t attained = 0;
    for (std::size_t k = 0; k < run.gains.alg1.size(); ++k)
      if (run.gains.alg1[k] >= run.gains.es[k] * (1.0 - 1e-9)) ++attained;
    const double shortfall = 1.0 - alg / es;
    const double fraction = static_cast<double>(attained) / static_cast<double>(run.gains.alg1.size());
    const bool ok = shortfall <= 0.005 && fraction >= 0.95;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::to_string(run.size) + "x" + std::to_string(run.size) +
              ": mean shortfall " + fmt(100 * shortfall, 3) + "% (<=0.5%), ES attained " +
              fmt(100 * fraction, 3) + "% (>=95%)" + (ok ? "" : " [miss]");
  }
  return {pass, detail};
}

Outcome monotone_ascent() {
  std::uint64_t violations = 0;
  for (const auto& run : criterion3_runs()) violations += run.gains.ascent_violations;
  return {violations == 0, std::to_string(violations) + " violations over 3000 designs"};
}

Outcome baseline_ordering() {
  bool pass = true;
  std::string detail;
  for (const auto& run : criterion3_runs()) {
    for (const auto& row : run.rows) pass = pass && row.snr_rq < row.snr_alg1;
    detail += (detail.empty() ? "" : "; ") + std::to_string(run.size) + "x" + std::to_string(run.size) +
              ": RQ/Alg1 mean SNR ratio " + fmt(mean(run.gains.rq) / mean(run.gains.alg1));
  }
  return {pass, detail + " (every power level checked)"};
}

Outcome companding_effect() {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::companding_study;
  spec.seed = kSeed;
  spec.qubo_dim = 24;
  spec.instances = 50;
  spec.target_distinct = 100;
  spec.solver.num_anneals = 1000;
  const auto bundle = run_experiment(spec);
  const auto& s = bundle.summary;
  const double fewer = s["fraction_fewer_distinct_5x"];
  const double likelier = s["fraction_ground_probability_3x"];
  const double both = s["fraction_both"];
  const double preserved = s["fraction_ground_preserved"];
  return {both >= 0.8, "(a) >=5x fewer distinct in " + fmt(100 * fewer, 3) + "%, (b) >=3x ground probability in " +
                           fmt(100 * likelier, 3) + "%, both in " + fmt(100 * both, 3) +
                           "% (need >=80%); companding kept the ground state in " + fmt(100 * preserved, 3) +
                           "% of instances"};
}

Outcome spectral_gap_study() {
  bool pass = true;
  std::string detail;
  for (int n : {5, 8, 10}) {
    const auto study = companding_gap_study(n, 2000, AnnealSchedule::linear(), 255.0,
                                            stream_key(kSeed, {7, static_cast<std::uint64_t>(n)}), 64);
    const bool ok = study.mean_companded > study.mean_plain && study.efficiency > 0.5;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::string("n=") + std::to_string(n) + ": mean gap " +
              fmt(study.mean_plain) + " -> " + fmt(study.mean_companded) + ", efficiency " +
              fmt(100 * study.efficiency, 3) + "%" + (study.num_flagged ? ", flagged " +
                                                                           std::to_string(study.num_flagged)
                                                                     : "");
  }
  return {pass, detail};
}

Outcome closed_form_gap() {
  IsingProblem p;
  p.h = RealVector::Constant(1, 1.0);
  p.j = RealMatrix::Zero(1, 1);
  const auto profile = gap_profile(p, AnnealSchedule::linear(), 10000);
  const double err = std::abs(profile.min_gap - std::sqrt(0.5));
  const bool at_half = std::abs(profile.argmin_s - 0.5) <= 1.0 / 9999.0;
  return {err <= 1e-6 && at_half,
          "min gap " + fmt(profile.min_gap, 10) + " at s=" + fmt(profile.argmin_s, 6) + ", error " + fmt(err)};
}

Outcome tts_formula() {
  const double t = 3.7e-4;
  const double exact = tts(t, 0.99);
  const double half = tts(1.0, 0.5);
  const double expected = std::log(0.01) / std::log(0.5);
  return {exact == t && std::abs(half - expected) <= 1e-12,
          "tts(T,0.99)==T " + std::string(exact == t ? "exactly" : "NOT exactly") + ", tts(1,0.5)=" +
              fmt(half, 15)};
}

Outcome mu_law_checks() {
  const double mu = 255.0;
  bool fixed = mu_law(0.0, mu) == 0.0 && mu_law(1.0, mu) == 1.0 && mu_law(-1.0, mu) == -1.0;
  const double quarter = mu_law(1.0 / 255.0, mu);
  bool monotone = true, odd = true;
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const double x = -1.0 + 2.0 * i / 9999.0;
    const double y = mu_law(x, mu);
    monotone = monotone && y > prev;
    odd = odd && mu_law(-x, mu) == -y;
    prev = y;
  }
  return {fixed && std::abs(quarter - 0.125) <= 1e-12 && monotone && odd,
          "C(1/255)=" + fmt(quarter, 15) + ", fixed points " + (fixed ? "ok" : "broken") + ", monotone " +
              (monotone ? "ok" : "broken") + ", odd " + (odd ? "ok" : "broken")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome reproducibility() {
  const std::vector<json> specs = {
      {{"kind", "snr-sweep"}, {"seed", 11}, {"ensemble_size", 50}, {"n_tx", 3}, {"n_rx", 2}},
      {{"kind", "solution-histogram"}, {"seed", 12}, {"solver", {{"num_anneals", 300}}}},
      {{"kind", "companding-study"},
       {"seed", 13},
       {"qubo_dim", 12},
       {"instances", 3},
       {"target_distinct", 30},
       {"solver", {{"num_anneals", 300}}}},
      {{"kind", "gap-study"}, {"seed", 14}, {"qubits", {3, 8}}, {"instances", 4}, {"grid_points", 16}},
      {{"kind", "tts-curve"}, {"seed", 15}, {"sizes", {2, 3}}, {"ensemble_size", 10}},
  };
  const fs::path root = fs::temp_directory_path() / "qmimo_acceptance_repro";
  std::size_t compared = 0, differing = 0;
  for (const auto& j : specs) {
    const ExperimentSpec spec = spec_from_json(j);
    const fs::path a = root / (to_string(spec.kind) + "_a");
    const fs::path b = root / (to_string(spec.kind) + "_b");
    fs::remove_all(a);
    fs::remove_all(b);
    const auto files = write_bundle(run_experiment(spec), a);
    write_bundle(run_experiment(spec_from_json(j)), b);
    for (const auto& f : files) {
      ++compared;
      if (!fs::exists(b / f.filename()) || slurp(f) != slurp(b / f.filename())) ++differing;
    }
  }
  fs::remove_all(root);
  return {differing == 0 && compared > 0, std::to_string(compared) + " files over 5 experiment kinds, " +
                                              std::to_string(differing) + " differ"};
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<Outcome()>>> table = {
      {1, {"embedding correctness", embedding_correctness}},
      {2, {"QUBO equivalence", qubo_equivalence}},
      {3, {"alternating design near-optimality", near_optimality}},
      {4, {"monotone ascent", monotone_ascent}},
      {5, {"baseline ordering", baseline_ordering}},
      {6, {"companding solver effect", companding_effect}},
      {7, {"spectral gap study", spectral_gap_study}},
      {8, {"closed-form gap", closed_form_gap}},
      {9, {"TTS formula", tts_formula}},
      {10, {"mu-law", mu_law_checks}},
      {11, {"reproducibility", reproducibility}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (only && !criteria().count(*only)) {
    std::cerr << "no criterion " << *only << "\n";
    return 2;
  }

  int failures = 0;
  for (const auto& [id, entry] : criteria()) {
    if (only && id != *only) continue;
    Outcome outcome{false, ""};
    try {
      outcome = entry.second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << "criterion " << id << " [" << entry.first << "]: " << (outcome.pass ? "PASS" : "FAIL") << " - "
              << outcome.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
