#include "qmimo/altopt.hpp"

#include "qmimo/parallel.hpp"
#include "qmimo/qubo.hpp"
#include "qmimo/rng.hpp"

#include <limits>
#include <numeric>

namespace qmimo {

namespace {

ComplexVector random_coding_vector(Index n, Rng& rng) {
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(rng.coin() ? 1.0 : -1.0, rng.coin() ? 1.0 : -1.0);
  return v;
}

enum class Side : std::uint64_t { precoder = 0, postcoder = 1 };

// Maximizes the spin form over 1-bit vectors via its QUBO; keeps `previous`
// when the form carries no information (zero matrix after calibration).
ComplexVector solve_subproblem(const SpinQuadraticForm& form, const ComplexVector& previous, const AltOptConfig& cfg,
                               int restart, int iteration, Side side) {
  QuboProblem q = spin_form_to_qubo(form);
  if (q.matrix.isZero(0.0)) return previous;

  Bits bits = 0;
  if (cfg.backend == Backend::exact) {
    bits = solve_exact(cfg.compand_mu ? compand(q, *cfg.compand_mu) : q).bits;
  } else {
    SolverConfig sc = cfg.annealer;
    sc.compand_mu = cfg.compand_mu;
    sc.seed = stream_key(cfg.seed, {0x73756270ULL, static_cast<std::uint64_t>(restart),
                                    static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(side)});
    bits = solve_annealed(q, sc).best().bits;
  }
  return spins_to_coding_vector(bits_to_spins(bits, q.dim()));
}

}  // namespace

void AltOptConfig::validate() const {
  if (restarts < 1) throw Error("restarts", "restarts (L) must be >= 1");
  if (max_iters < 1) throw Error("max_iters", "max_iters (K) must be >= 1");
  if (!(rel_tol > 0.0)) throw Error("rel_tol", "rel_tol must be > 0");
  if (compand_mu && !(*compand_mu > 0.0)) throw Error("compand_mu", "mu must be > 0");
  if (backend == Backend::annealed) annealer.validate();
}

Design design_pair(const ComplexChannel& channel, const SnrContext& ctx, const AltOptConfig& cfg) {
  cfg.validate();
  AltOptTrace trace;
  trace.records.resize(static_cast<std::size_t>(cfg.restarts));

  for (int l = 0; l < cfg.restarts; ++l) {
    auto& records = trace.records[static_cast<std::size_t>(l)];
    Rng rng(cfg.seed, {0x72657374ULL, static_cast<std::uint64_t>(l)});
    ComplexVector g = random_coding_vector(channel.n_rx(), rng);
    ComplexVector f = random_coding_vector(channel.n_tx(), rng);
    double rho_new = snr(channel, CodingPair(f, g), ctx);
    records.push_back({l, 0, f, g, rho_new});

    for (int k = 1;; ++k) {
      const double rho_old = rho_new;
      f = solve_subproblem(real_embed_precoder(channel, g), f, cfg, l, k, Side::precoder);
      g = solve_subproblem(real_embed_postcoder(channel, f), g, cfg, l, k, Side::postcoder);
      rho_new = snr(channel, CodingPair(f, g), ctx);
      records.push_back({l, k, f, g, rho_new});

      // A zero previous SNR gives no scale for the relative test; keep going.
      const bool converged = rho_old != 0.0 && std::abs(rho_new - rho_old) / std::abs(rho_old) < cfg.rel_tol;
      if (converged || k >= cfg.max_iters) break;
    }
  }

  for (int l = 1; l < cfg.restarts; ++l) {
    if (trace.records[static_cast<std::size_t>(l)].back().snr >
        trace.records[static_cast<std::size_t>(trace.best_restart)].back().snr)
      trace.best_restart = l;
  }
  const auto& winner = trace.records[static_cast<std::size_t>(trace.best_restart)].back();
  return Design{CodingPair(winner.f, winner.g), winner.snr, std::move(trace)};
}

std::uint64_t count_ascent_violations(const AltOptTrace& trace) {
  std::uint64_t violations = 0;
  for (const auto& records : trace.records)
    for (std::size_t k = 1; k < records.size(); ++k)
      if (records[k].snr < records[k - 1].snr * (1.0 - 1e-12)) ++violations;
  return violations;
}

EnsembleGains ensemble_gains(const EnsembleSpec& ensemble, const AltOptConfig& cfg, int bit_cap) {
  if (ensemble.size < 1) throw Error("ensemble.size", "ensemble must contain at least one channel");
  cfg.validate();
  const auto n = static_cast<std::size_t>(ensemble.size);
  const bool with_es = 2 * (ensemble.n_tx + ensemble.n_rx) <= bit_cap;
  const SnrContext unit(1.0, 1.0);

  EnsembleGains out;
  out.alg1.resize(n);
  out.rq.resize(n);
  out.iterations.resize(n);
  if (with_es) out.es.resize(n);
  std::vector<std::uint64_t> violations(n, 0);

  parallel_for(n, [&](std::size_t k) {
    const ComplexChannel channel = generate_rayleigh_channel(ensemble.n_tx, ensemble.n_rx, ensemble.seed, k);
    AltOptConfig per_channel = cfg;
    per_channel.seed = stream_key(cfg.seed, {0x63686eULL, k});
    const Design design = design_pair(channel, unit, per_channel);
    out.alg1[k] = beam_gain(channel, design.pair);
    out.iterations[k] =
        static_cast<int>(design.trace.records[static_cast<std::size_t>(design.trace.best_restart)].size()) - 1;
    if (cfg.backend == Backend::exact && !cfg.compand_mu) violations[k] = count_ascent_violations(design.trace);
    out.rq[k] = beam_gain(channel, rq_baseline(channel));
    if (with_es) out.es[k] = beam_gain(channel, exhaustive_search(channel, unit, true, bit_cap).pair);
  });
  out.ascent_violations = std::accumulate(violations.begin(), violations.end(), std::uint64_t{0});
  return out;
}

SweepResult snr_sweep(const EnsembleSpec& ensemble, const std::vector<double>& powers_db, double noise_var,
                      const AltOptConfig& cfg, int bit_cap) {
  if (powers_db.empty()) throw Error("powers_db", "power grid must not be empty");
  SweepResult result;
  result.gains = ensemble_gains(ensemble, cfg, bit_cap);
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  const double es = mean(result.gains.es);
  const double alg1 = mean(result.gains.alg1);
  const double rq = mean(result.gains.rq);
  for (double p_db : powers_db) {
    const double factor = snr_factor(ensemble.n_tx, ensemble.n_rx, SnrContext(db_to_linear(p_db), noise_var));
    result.rows.push_back({p_db, factor * es, factor * alg1, factor * rq});
  }
  return result;
}

}  // namespace qmimo
