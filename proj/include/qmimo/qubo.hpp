#pragma once

#include "qmimo/core.hpp"
#include "qmimo/mimo.hpp"

#include <cmath>
#include <cstdint>
#include <optional>

namespace qmimo {

// Real quadratic form s^T M s over spin vectors s in {-1, +1}^dim. M is a
// Gram matrix, hence symmetric positive semidefinite.
struct SpinQuadraticForm {
  RealMatrix matrix;

  Index dim() const { return matrix.rows(); }
  double evaluate(const RealVector& spins) const { return spins.dot(matrix * spins); }
};

// Minimize b^T Q b over b in {0, 1}^dim. A problem built from a spin form
// keeps what is needed to map energies back: s^T V s = offset - scale * b^T Q b.
// `mu` is set when the matrix has been passed through the mu-law compander.
struct QuboProblem {
  RealMatrix matrix;
  double scale = 1.0;
  double offset = 0.0;
  std::optional<double> mu;

  Index dim() const { return matrix.rows(); }
  bool companded() const { return mu.has_value(); }
};

// E(sigma) = sum_i h_i sigma_i + sum_{i<j} J_ij sigma_i sigma_j + offset.
struct IsingProblem {
  RealVector h;
  RealMatrix j;  // strictly upper triangular
  double offset = 0.0;

  Index dim() const { return h.size(); }
};

template <typename Derived>
typename Derived::PlainObject binary_to_spin(const Eigen::MatrixBase<Derived>& b) {
  using Scalar = typename Derived::Scalar;
  for (Index i = 0; i < b.size(); ++i)
    if (b(i) != Scalar(0) && b(i) != Scalar(1)) throw Error("binary", "binary entries must be 0 or 1");
  return (Scalar(2) * b.derived().array() - Scalar(1)).matrix();
}

template <typename Derived>
typename Derived::PlainObject spin_to_binary(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) != Scalar(1) && s(i) != Scalar(-1)) throw Error("spin", "spin entries must be -1 or +1");
  return ((s.derived().array() + Scalar(1)) / Scalar(2)).matrix();
}

// Bits <-> dense 0/1 and +-1 vectors of length dim.
RealVector bits_to_binary(Bits bits, Index dim);
RealVector bits_to_spins(Bits bits, Index dim);
Bits spins_to_bits(const RealVector& spins);

// [Re v; Im v]
RealVector stack_coding_vector(const ComplexVector& v);
// Inverse of stack_coding_vector; entry k is s[k] + j s[N + k].
ComplexVector spins_to_coding_vector(const RealVector& spins);

// Form V with f_r^T V f_r = |g^H H f|^2 for every 1-bit precoder f.
SpinQuadraticForm real_embed_precoder(const ComplexChannel& channel, const ComplexVector& g);
// Form R with g_r^T R g_r = |g^H H f|^2 for every 1-bit postcoder g.
SpinQuadraticForm real_embed_postcoder(const ComplexChannel& channel, const ComplexVector& f);

// Substitutes s = 2b - 1, folds the linear term onto the diagonal, divides by
// the max-norm and negates, so maximizing the spin form is minimizing the QUBO.
QuboProblem spin_form_to_qubo(const SpinQuadraticForm& form);

// Max-norm calibration of an arbitrary symmetric matrix (scale = ||Q||_max,
// offset 0). A zero matrix is kept with scale 1.
QuboProblem calibrate(const RealMatrix& q);

// Spin objective value s^T V s for a binary assignment with the given energy.
inline double spin_objective(const QuboProblem& q, double energy) { return q.offset - q.scale * energy; }

template <typename Derived>
double qubo_energy(const Eigen::MatrixBase<Derived>& q, Bits bits) {
  double e = 0.0;
  const Index n = q.rows();
  for (Index i = 0; i < n; ++i) {
    if (!((bits >> i) & 1U)) continue;
    e += q(i, i);
    for (Index k = i + 1; k < n; ++k)
      if ((bits >> k) & 1U) e += q(i, k) + q(k, i);
  }
  return e;
}

inline double qubo_energy(const QuboProblem& q, Bits bits) { return qubo_energy(q.matrix, bits); }

double ising_energy(const IsingProblem& problem, const RealVector& spins);

// C(x) = log(1 + mu |x|) / log(1 + mu) sgn(x)
template <typename Scalar>
Scalar mu_law(Scalar x, Scalar mu) {
  using std::abs;
  using std::log1p;
  if (x == Scalar(0)) return Scalar(0);
  const Scalar magnitude = log1p(mu * abs(x)) / log1p(mu);
  return x < Scalar(0) ? -magnitude : magnitude;
}

template <typename Derived>
typename Derived::PlainObject mu_law(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  return x.derived().unaryExpr([mu](Scalar v) { return mu_law(v, mu); });
}

// Elementwise mu-law of the calibrated matrix; scale/offset carried over.
QuboProblem compand(const QuboProblem& q, double mu);

// Companding of the Ising coefficients (h and the couplers); offset kept.
IsingProblem compand(const IsingProblem& problem, double mu);

// Exact rewrite under b = (sigma + 1) / 2: b^T Q b equals the Ising energy
// of the corresponding spins (conversion constant folded into offset).
IsingProblem qubo_to_ising(const QuboProblem& q);

// Symmetric noise with i.i.d. N(0, sigma^2) entries on and above the diagonal.
RealMatrix ice_noise(Index dim, double sigma, std::uint64_t key);

// Q + E with E from ice_noise; sigma = 0 returns q unchanged.
QuboProblem inject_ice_noise(const QuboProblem& q, double sigma, std::uint64_t seed);

}  // namespace qmimo
