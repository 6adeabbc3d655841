#pragma once

#include "qmimo/core.hpp"
#include "qmimo/qubo.hpp"

#include <cstdint>
#include <vector>

namespace qmimo {

// Envelopes A(s) (driver) and B(s) (problem) over the anneal fraction s.
class AnnealSchedule {
 public:
  struct Sample {
    double s;
    double a;
    double b;
  };

  // A = 1 - s, B = s
  static AnnealSchedule linear();
  // Piecewise-linear interpolation through samples sorted by s, covering
  // [0, 1]. Values are taken as given (a GHz table keeps GHz units).
  static AnnealSchedule tabulated(std::vector<Sample> samples);

  double a(double s) const;
  double b(double s) const;
  bool is_linear() const { return samples_.empty(); }
  const std::vector<Sample>& samples() const { return samples_; }

 private:
  std::vector<Sample> samples_;
};

inline constexpr int kQubitCap = 12;

// Classical Ising energies sum_i h_i z_i + sum_{i<j} J_ij z_i z_j (offset
// excluded) of every computational basis state; qubit i is bit i of the
// index, with z_i = +1 for |0> and -1 for |1>.
RealVector ising_diagonal(const IsingProblem& problem);

void check_hamiltonian_args(const IsingProblem& problem, double s, int qubit_cap);

// H(s) = -A(s)/2 sum_i X_i + B(s)/2 (sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j)
template <typename Scalar = double>
Matrix<Scalar> build_hamiltonian(const IsingProblem& problem, const AnnealSchedule& schedule, double s,
                                 int qubit_cap = kQubitCap) {
  check_hamiltonian_args(problem, s, qubit_cap);
  const Index n = problem.dim();
  const Index size = Index{1} << n;
  const RealVector diag = ising_diagonal(problem);
  const Scalar driver(-schedule.a(s) / 2.0);
  const double target = schedule.b(s) / 2.0;

  Matrix<Scalar> h = Matrix<Scalar>::Zero(size, size);
  for (Index state = 0; state < size; ++state) {
    h(state, state) = Scalar(target * diag(state));
    for (Index q = 0; q < n; ++q) h(state ^ (Index{1} << q), state) += driver;
  }
  return h;
}

struct LowestPair {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
};

enum class EigenMethod { automatic, dense, krylov };

// Lowest two eigenvalues of H(s). `krylov` is a matrix-free block Davidson
// iteration (diagonal preconditioner, thick restart) converged to a residual
// of 1e-8 relative to the operator scale;
// `automatic` picks dense up to 7 qubits and krylov beyond.
LowestPair lowest_two(const IsingProblem& problem, const AnnealSchedule& schedule, double s,
                      EigenMethod method = EigenMethod::automatic, int qubit_cap = kQubitCap);

inline constexpr double kDegenerateGap = 1e-10;

struct GapProfile {
  std::vector<double> s_grid;
  std::vector<double> lambda0;
  std::vector<double> lambda1;
  std::vector<double> gap;
  double min_gap = 0.0;
  double argmin_s = 0.0;
  // Set when the minimum sits on a degenerate ground level (gap recorded as 0).
  bool degenerate = false;
};

GapProfile gap_profile(const IsingProblem& problem, const AnnealSchedule& schedule, int grid_points,
                       EigenMethod method = EigenMethod::automatic, int qubit_cap = kQubitCap);

// Gaussian h and J (all i < j couplers), jointly divided by their max-norm.
IsingProblem random_ising(Index n, std::uint64_t seed, std::uint64_t index);

struct GapStudy {
  std::vector<double> plain;
  std::vector<double> companded;
  std::vector<bool> flagged;  // either variant degenerate
  double mean_plain = 0.0;
  double mean_companded = 0.0;
  double efficiency = 0.0;  // fraction of instances with companded gap > plain gap
  double mean_plain_unflagged = 0.0;
  double mean_companded_unflagged = 0.0;
  std::size_t num_flagged = 0;
};

GapStudy companding_gap_study(Index n, int num_instances, const AnnealSchedule& schedule, double mu,
                              std::uint64_t seed, int grid_points = 64,
                              EigenMethod method = EigenMethod::automatic);

// Time to reach the ground state with the given confidence:
// total_time * log(1 - confidence) / log(1 - p), i.e. log(0.01) / log(1 - p)
// at the default 99%. p = 1 gives total_time, p = 0 gives +infinity.
double tts(double total_time, double p, double confidence = 0.99);

}  // namespace qmimo
