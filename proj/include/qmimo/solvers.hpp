#pragma once

#include "qmimo/core.hpp"
#include "qmimo/mimo.hpp"
#include "qmimo/qubo.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qmimo {

// Geometric cooling between start and end temperatures, both expressed as
// multiples of the max-norm of the matrix being annealed.
struct TemperatureSchedule {
  double start = 2.0;
  double end = 0.01;

  double at(int sweep, int sweeps, double matrix_norm) const;
};

struct SolverConfig {
  int num_anneals = 1000;
  int sweeps_per_anneal = 64;
  TemperatureSchedule schedule;
  double noise_sigma = 0.0;
  // When set, every anneal runs on C(Q) + E instead of Q + E.
  std::optional<double> compand_mu;
  std::uint64_t seed = 0;

  void validate() const;
};

struct HistogramEntry {
  Bits bits = 0;
  double energy = 0.0;
  std::uint64_t count = 0;
};

// Distinct final states of an anneal ensemble, ascending by energy (ties in
// lexicographic bit order). Counts sum to total_anneals.
struct SolutionHistogram {
  Index dim = 0;
  std::vector<HistogramEntry> entries;
  std::uint64_t total_anneals = 0;

  std::size_t distinct() const { return entries.size(); }
  double probability(std::size_t rank) const {
    return static_cast<double>(entries.at(rank).count) / static_cast<double>(total_anneals);
  }
  const HistogramEntry& best() const { return entries.front(); }
};

// Builds a well-formed histogram from raw final states, scoring each distinct
// state on `judge`.
SolutionHistogram make_histogram(const std::vector<Bits>& finals, const RealMatrix& judge);

// Order-independent merge of two histograms over the same problem.
SolutionHistogram merge(const SolutionHistogram& a, const SolutionHistogram& b);

struct ExactSolution {
  Bits bits = 0;
  double energy = 0.0;
};

inline constexpr int kExactSolverCap = 24;

// Global minimum of b^T Q b by Gray-code enumeration; ties resolve to the
// lexicographically smallest bitstring.
ExactSolution solve_exact(const QuboProblem& q, int cap = kExactSolverCap);

// num_anneals independent single-flip Metropolis chains from random starts.
// With noise_sigma > 0 each anneal draws its own ICE matrix. Reported energies
// are always those of the noiseless, uncompanded q.
SolutionHistogram solve_annealed(const QuboProblem& q, const SolverConfig& cfg);

// Fraction of anneals that ended within tol of ground_energy.
double success_probability(const SolutionHistogram& hist, double ground_energy, double tol);

// Sign-quantized dominant singular vectors of H.
CodingPair rq_baseline(const ComplexChannel& channel);

}  // namespace qmimo
