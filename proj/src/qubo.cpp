#include "qmimo/qubo.hpp"

#include "qmimo/rng.hpp"

namespace qmimo {

namespace {

void require_coding_vector(const ComplexVector& v, Index expected, const char* field) {
  if (v.size() != expected)
    throw Error(field, std::string(field) + " has length " + std::to_string(v.size()) + ", expected " +
                           std::to_string(expected));
  if (!on_alphabet(v)) throw Error(field, std::string(field) + " entries must lie in {+-1 +-1j}");
}

// Gram matrix of the 2 x 2n map x_r -> [Re(w^H x); Im(w^H x)] where
// x_r = [Re x; Im x], i.e. rows [Re w, Im w] and [-Im w, Re w].
RealMatrix conjugate_inner_gram(const ComplexVector& w) {
  const Index n = w.size();
  RealMatrix rows(2, 2 * n);
  rows.row(0) << w.real().transpose(), w.imag().transpose();
  rows.row(1) << -w.imag().transpose(), w.real().transpose();
  return rows.transpose() * rows;
}

}  // namespace

RealVector bits_to_binary(Bits bits, Index dim) {
  RealVector b(dim);
  for (Index i = 0; i < dim; ++i) b(i) = ((bits >> i) & 1U) ? 1.0 : 0.0;
  return b;
}

RealVector bits_to_spins(Bits bits, Index dim) {
  RealVector s(dim);
  for (Index i = 0; i < dim; ++i) s(i) = ((bits >> i) & 1U) ? 1.0 : -1.0;
  return s;
}

Bits spins_to_bits(const RealVector& spins) {
  if (spins.size() > 64) throw Error("spin", "more than 64 spins");
  Bits bits = 0;
  for (Index i = 0; i < spins.size(); ++i) {
    if (spins(i) == 1.0) {
      bits |= Bits{1} << i;
    } else if (spins(i) != -1.0) {
      throw Error("spin", "spin entries must be -1 or +1");
    }
  }
  return bits;
}

RealVector stack_coding_vector(const ComplexVector& v) {
  RealVector out(2 * v.size());
  out << v.real(), v.imag();
  return out;
}

ComplexVector spins_to_coding_vector(const RealVector& spins) {
  if (spins.size() % 2 != 0) throw Error("spin", "spin vector length must be even");
  for (Index i = 0; i < spins.size(); ++i)
    if (spins(i) != 1.0 && spins(i) != -1.0) throw Error("spin", "spin entries must be -1 or +1");
  const Index n = spins.size() / 2;
  ComplexVector v(n);
  for (Index k = 0; k < n; ++k) v(k) = Complex(spins(k), spins(n + k));
  return v;
}

// g^H H f = (H^H g)^H f
SpinQuadraticForm real_embed_precoder(const ComplexChannel& channel, const ComplexVector& g) {
  require_coding_vector(g, channel.n_rx(), "g");
  const ComplexVector effective = channel.entries().adjoint() * g;
  return SpinQuadraticForm{conjugate_inner_gram(effective)};
}

// g^H (H f): the rows for x = g are [Re c, Im c] and [Im c, -Re c] with c = H f,
// which has the same Gram matrix as [Re c, Im c] and [-Im c, Re c].
SpinQuadraticForm real_embed_postcoder(const ComplexChannel& channel, const ComplexVector& f) {
  require_coding_vector(f, channel.n_tx(), "f");
  const ComplexVector received = channel.entries() * f;
  return SpinQuadraticForm{conjugate_inner_gram(received)};
}

QuboProblem spin_form_to_qubo(const SpinQuadraticForm& form) {
  const RealMatrix& v = form.matrix;
  if (v.rows() != v.cols()) throw Error("form", "spin form must be square");
  const RealVector row_sums = v.rowwise().sum();

  RealMatrix folded = 4.0 * v;
  folded.diagonal() -= 4.0 * row_sums;

  QuboProblem q;
  q.offset = row_sums.sum();
  const double norm = max_norm(folded);
  // Cancellation can leave rounding dust where the exact result is zero
  // (e.g. V proportional to the identity).
  if (norm <= 1e-14 * max_norm(v)) {
    q.matrix = RealMatrix::Zero(v.rows(), v.cols());
    q.scale = 1.0;
  } else {
    q.matrix = -folded / norm;
    q.scale = norm;
  }
  return q;
}

QuboProblem calibrate(const RealMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) throw Error("matrix", "QUBO matrix must be square");
  QuboProblem q;
  const double norm = max_norm(matrix);
  if (norm == 0.0) {
    q.matrix = matrix;
  } else {
    q.matrix = matrix / norm;
    q.scale = norm;
  }
  return q;
}

double ising_energy(const IsingProblem& problem, const RealVector& spins) {
  const RealMatrix upper = problem.j.triangularView<Eigen::StrictlyUpper>();
  return problem.h.dot(spins) + spins.dot(upper * spins) + problem.offset;
}

QuboProblem compand(const QuboProblem& q, double mu) {
  if (!(mu > 0.0)) throw Error("mu", "companding parameter mu must be > 0");
  if (max_norm(q.matrix) > 1.0 + 1e-12)
    throw Error("matrix", "companding expects a calibrated matrix with entries in [-1, 1]");
  QuboProblem out = q;
  out.matrix = mu_law(q.matrix, mu);
  out.mu = mu;
  return out;
}

IsingProblem compand(const IsingProblem& problem, double mu) {
  if (!(mu > 0.0)) throw Error("mu", "companding parameter mu must be > 0");
  IsingProblem out = problem;
  out.h = mu_law(problem.h, mu);
  out.j = mu_law(problem.j, mu);
  return out;
}

IsingProblem qubo_to_ising(const QuboProblem& q) {
  const RealMatrix& m = q.matrix;
  const Index n = m.rows();
  IsingProblem out;
  out.h = (m.rowwise().sum() + m.colwise().sum().transpose()) / 4.0;
  out.j = RealMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = i + 1; k < n; ++k) out.j(i, k) = (m(i, k) + m(k, i)) / 4.0;
  out.offset = (m.sum() + m.trace()) / 4.0;
  return out;
}

RealMatrix ice_noise(Index dim, double sigma, std::uint64_t key) {
  if (!(sigma >= 0.0)) throw Error("noise_sigma", "noise sigma must be >= 0");
  RealMatrix e = RealMatrix::Zero(dim, dim);
  if (sigma == 0.0) return e;
  Rng rng(key);
  for (Index i = 0; i < dim; ++i) {
    for (Index k = i; k < dim; ++k) {
      e(i, k) = rng.normal(0.0, sigma);
      e(k, i) = e(i, k);
    }
  }
  return e;
}

QuboProblem inject_ice_noise(const QuboProblem& q, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error("noise_sigma", "noise sigma must be >= 0");
  if (sigma == 0.0) return q;
  QuboProblem out = q;
  out.matrix += ice_noise(q.dim(), sigma, stream_key(seed, {0x696365ULL}));
  return out;
}

}  // namespace qmimo
