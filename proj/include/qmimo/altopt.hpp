#pragma once

#include "qmimo/mimo.hpp"
#include "qmimo/solvers.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace qmimo {

enum class Backend { exact, annealed };

struct AltOptConfig {
  int restarts = 8;     // L
  int max_iters = 8;    // K
  double rel_tol = 0.01;
  Backend backend = Backend::exact;
  SolverConfig annealer;  // used by Backend::annealed
  std::optional<double> compand_mu;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationRecord {
  int restart = 0;
  int iteration = 0;  // 0 is the random starting pair
  ComplexVector f;
  ComplexVector g;
  double snr = 0.0;
};

struct AltOptTrace {
  // records[l] holds iterations 0..k of restart l.
  std::vector<std::vector<IterationRecord>> records;
  int best_restart = 0;
};

struct Design {
  CodingPair pair;
  double snr;
  AltOptTrace trace;
};

// Alternating 1-bit pre/post-coder design with restarts: each iteration
// solves the precoder QUBO for the current g, then the postcoder QUBO for the
// new f, until the relative SNR change drops below rel_tol or max_iters is hit.
Design design_pair(const ComplexChannel& channel, const SnrContext& ctx, const AltOptConfig& cfg);

// Channel k of the ensemble is generate_rayleigh_channel(n_tx, n_rx, seed, k).
struct EnsembleSpec {
  Index n_tx = 2;
  Index n_rx = 2;
  int size = 100;
  std::uint64_t seed = 0;
};

struct SweepRow {
  double power_db = 0.0;
  double snr_es = 0.0;  // NaN when the ensemble exceeds the enumeration cap
  double snr_alg1 = 0.0;
  double snr_rq = 0.0;
};

// Per-channel beam gains |g^H H f|^2 for each method; SNR at any power is the
// gain times snr_factor.
struct EnsembleGains {
  std::vector<double> es;  // empty when beyond the enumeration cap
  std::vector<double> alg1;
  std::vector<double> rq;
  std::vector<int> iterations;  // iterations used by the winning restart
  std::uint64_t ascent_violations = 0;
};

EnsembleGains ensemble_gains(const EnsembleSpec& ensemble, const AltOptConfig& cfg,
                             int bit_cap = kDefaultEnumerationBits);

struct SweepResult {
  EnsembleGains gains;
  std::vector<SweepRow> rows;
};

// Mean linear SNR per power level for Algorithm-1 design, exhaustive search
// (where within the cap) and the Rayleigh-quotient baseline.
SweepResult snr_sweep(const EnsembleSpec& ensemble, const std::vector<double>& powers_db, double noise_var,
                      const AltOptConfig& cfg, int bit_cap = kDefaultEnumerationBits);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// Iterations at which the SNR dropped below its predecessor by more than a
// relative 1e-12.
std::uint64_t count_ascent_violations(const AltOptTrace& trace);

}  // namespace qmimo
