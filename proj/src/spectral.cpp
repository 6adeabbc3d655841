#include "qmimo/spectral.hpp"

#include "qmimo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmimo {

AnnealSchedule AnnealSchedule::linear() { return AnnealSchedule{}; }

AnnealSchedule AnnealSchedule::tabulated(std::vector<Sample> samples) {
  if (samples.size() < 2) throw Error("schedule", "a tabulated schedule needs at least two samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x = samples[i];
    if (!std::isfinite(x.s) || !std::isfinite(x.a) || !std::isfinite(x.b))
      throw Error("schedule", "schedule samples must be finite");
    if (x.a < 0.0 || x.b < 0.0) throw Error("schedule", "A(s) and B(s) must be non-negative");
    if (i > 0 && !(x.s > samples[i - 1].s)) throw Error("schedule", "schedule s values must be strictly increasing");
    if (i > 0 && x.a > samples[i - 1].a) throw Error("schedule", "A(s) must be non-increasing");
    if (i > 0 && x.b < samples[i - 1].b) throw Error("schedule", "B(s) must be non-decreasing");
  }
  if (samples.front().s > 0.0 || samples.back().s < 1.0)
    throw Error("schedule", "schedule samples must cover s in [0, 1]");
  AnnealSchedule out;
  out.samples_ = std::move(samples);
  return out;
}

namespace {

template <typename Field>
double interpolate(const std::vector<AnnealSchedule::Sample>& table, double s, Field field) {
  auto upper = std::lower_bound(table.begin(), table.end(), s,
                                [](const AnnealSchedule::Sample& x, double v) { return x.s < v; });
  if (upper == table.begin()) return field(*upper);
  if (upper == table.end()) return field(table.back());
  const auto& lo = *(upper - 1);
  const auto& hi = *upper;
  const double t = (s - lo.s) / (hi.s - lo.s);
  return field(lo) + t * (field(hi) - field(lo));
}

}  // namespace

double AnnealSchedule::a(double s) const {
  if (is_linear()) return 1.0 - s;
  return interpolate(samples_, s, [](const Sample& x) { return x.a; });
}

double AnnealSchedule::b(double s) const {
  if (is_linear()) return s;
  return interpolate(samples_, s, [](const Sample& x) { return x.b; });
}

RealVector ising_diagonal(const IsingProblem& problem) {
  const Index n = problem.dim();
  const Index size = Index{1} << n;
  RealVector diag(size);
  RealVector z(n);
  for (Index state = 0; state < size; ++state) {
    for (Index q = 0; q < n; ++q) z(q) = ((state >> q) & 1) ? -1.0 : 1.0;
    double e = problem.h.dot(z);
    for (Index i = 0; i < n; ++i)
      for (Index k = i + 1; k < n; ++k) e += problem.j(i, k) * z(i) * z(k);
    diag(state) = e;
  }
  return diag;
}

void check_hamiltonian_args(const IsingProblem& problem, double s, int qubit_cap) {
  const Index n = problem.dim();
  if (n < 1) throw Error("n", "Ising problem must have at least one qubit");
  if (n > qubit_cap)
    throw Error("n", std::to_string(n) + " qubits exceed the dense simulation cap of " + std::to_string(qubit_cap));
  if (problem.j.rows() != n || problem.j.cols() != n) throw Error("j", "coupler matrix must be n x n");
  if (!(s >= 0.0 && s <= 1.0)) throw Error("s", "anneal fraction must lie in [0, 1]");
}

namespace {

// Matrix-free H(s) acting on blocks of column vectors.
class TransverseIsing {
 public:
  TransverseIsing(const RealVector& diag, Index qubits, double a, double b)
      : diag_(b / 2.0 * diag), qubits_(qubits), driver_(-a / 2.0) {}

  Index size() const { return diag_.size(); }
  const RealVector& diagonal() const { return diag_; }
  double scale() const { return std::abs(driver_) * static_cast<double>(qubits_) + max_norm(diag_); }

  RealMatrix apply(const RealMatrix& x) const {
    RealMatrix y = diag_.asDiagonal() * x;
    if (driver_ == 0.0) return y;
    const Index size = diag_.size();
    for (Index c = 0; c < x.cols(); ++c) {
      const double* in = x.col(c).data();
      double* out = y.col(c).data();
      for (Index state = 0; state < size; ++state) {
        double acc = 0.0;
        for (Index q = 0; q < qubits_; ++q) acc += in[state ^ (Index{1} << q)];
        out[state] += driver_ * acc;
      }
    }
    return y;
  }

 private:
  RealVector diag_;
  Index qubits_;
  double driver_;
};

// Orthogonalizes `block` against the first `used` columns of `basis` and
// orthonormalizes what is left, dropping directions that vanish.
RealMatrix extend_basis(const RealMatrix& basis, Index used, RealMatrix block) {
  const auto prior = basis.leftCols(used);
  RealMatrix kept(block.rows(), 0);
  for (Index c = 0; c < block.cols(); ++c) {
    RealVector v = block.col(c);
    const double before = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      if (used > 0) v -= prior * (prior.transpose() * v);
      if (kept.cols() > 0) v -= kept * (kept.transpose() * v);
    }
    const double after = v.norm();
    if (after <= 1e-10 * std::max(before, 1e-300) || after < 1e-300) continue;
    kept.conservativeResize(Eigen::NoChange, kept.cols() + 1);
    kept.col(kept.cols() - 1) = v / after;
  }
  return kept;
}

struct RitzResult {
  LowestPair values;
  RealMatrix vectors;  // lowest two Ritz vectors
};

// Thick-restart block Davidson: each step extends the search space by the
// diagonally preconditioned residuals of the lowest Ritz pairs and restarts
// from the lowest Ritz vectors, keeping their images, once the space is full.
RitzResult krylov_lowest_two(const TransverseIsing& op, RealMatrix start) {
  constexpr Index kBlock = 3;
  constexpr Index kKeep = 6;
  const Index size = op.size();
  const double tol = 1e-8 * std::max(op.scale(), 1e-300);
  const Index max_dim = std::min<Index>(size, 24);

  RealMatrix basis(size, max_dim);
  RealMatrix image(size, max_dim);
  RealMatrix projected = RealMatrix::Zero(max_dim, max_dim);
  Index used = 0;
  RealMatrix block = extend_basis(basis, 0, std::move(start));
  if (block.cols() > max_dim) block = block.leftCols(max_dim).eval();

  for (int guard = 0; guard < 100000; ++guard) {
    const Index width = block.cols();
    basis.middleCols(used, width) = block;
    image.middleCols(used, width) = op.apply(block);
    const Index total = used + width;
    const RealMatrix cross = basis.leftCols(total).transpose() * image.middleCols(used, width);
    projected.block(0, used, total, width) = cross;
    projected.block(used, 0, width, total) = cross.transpose();
    projected.block(used, used, width, width) =
        0.5 * (cross.bottomRows(width) + cross.bottomRows(width).transpose());
    used = total;

    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(projected.topLeftCorner(used, used));
    const Index wanted = std::min(used, kBlock);
    const RealMatrix coeffs = eig.eigenvectors().leftCols(wanted);
    const RealMatrix ritz = basis.leftCols(used) * coeffs;
    const RealMatrix ritz_image = image.leftCols(used) * coeffs;
    const RealMatrix residual = ritz_image - ritz * eig.eigenvalues().head(wanted).asDiagonal();

    RitzResult result;
    result.values.lambda0 = eig.eigenvalues()(0);
    result.values.lambda1 = used > 1 ? eig.eigenvalues()(1) : eig.eigenvalues()(0);
    result.vectors = ritz.leftCols(std::min<Index>(2, used));

    const Index checked = std::min<Index>(2, used);
    const bool converged = used >= 2 && residual.leftCols(checked).colwise().norm().maxCoeff() < tol;
    if (converged || used >= size) return result;

    if (used + kBlock > max_dim && max_dim < size) {
      const Index keep = std::min(kKeep, used);
      const RealMatrix y = eig.eigenvectors().leftCols(keep);
      const RealMatrix new_basis = basis.leftCols(used) * y;
      const RealMatrix new_image = image.leftCols(used) * y;
      basis.leftCols(keep) = new_basis;
      image.leftCols(keep) = new_image;
      projected.setZero();
      projected.topLeftCorner(keep, keep) = eig.eigenvalues().head(keep).asDiagonal();
      used = keep;
    }
    // Diagonal (Davidson) preconditioning of the residual block.
    RealMatrix correction = residual;
    const double floor = 1e-2 * std::max(op.scale(), 1e-300);
    for (Index c = 0; c < wanted; ++c) {
      const double theta = eig.eigenvalues()(c);
      for (Index r = 0; r < size; ++r) {
        double d = op.diagonal()(r) - theta;
        if (std::abs(d) < floor) d = d < 0.0 ? -floor : floor;
        correction(r, c) /= d;
      }
    }
    block = extend_basis(basis, used, std::move(correction));
    if (block.cols() > max_dim - used) block = block.leftCols(max_dim - used).eval();
    if (block.cols() == 0) return result;  // invariant subspace: Ritz values are exact
  }
  throw Error("krylov", "block Krylov iteration failed to converge");
}

RealMatrix random_block(Index rows, Index cols, std::uint64_t key) {
  Rng rng(key);
  RealMatrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  return m;
}

bool use_dense(EigenMethod method, Index n) {
  return method == EigenMethod::dense || (method == EigenMethod::automatic && n <= 7);
}

LowestPair dense_lowest_two(const IsingProblem& problem, const AnnealSchedule& schedule, double s, int qubit_cap) {
  const RealMatrix h = build_hamiltonian<double>(problem, schedule, s, qubit_cap);
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(h, Eigen::EigenvaluesOnly);
  const auto& w = eig.eigenvalues();
  return {w(0), w.size() > 1 ? w(1) : w(0)};
}

}  // namespace

LowestPair lowest_two(const IsingProblem& problem, const AnnealSchedule& schedule, double s, EigenMethod method,
                      int qubit_cap) {
  check_hamiltonian_args(problem, s, qubit_cap);
  if (use_dense(method, problem.dim())) return dense_lowest_two(problem, schedule, s, qubit_cap);
  const TransverseIsing op(ising_diagonal(problem), problem.dim(), schedule.a(s), schedule.b(s));
  return krylov_lowest_two(op, random_block(op.size(), 3, 0x6b72796cULL)).values;
}

GapProfile gap_profile(const IsingProblem& problem, const AnnealSchedule& schedule, int grid_points,
                       EigenMethod method, int qubit_cap) {
  if (grid_points < 2) throw Error("grid_points", "grid_points must be >= 2");
  check_hamiltonian_args(problem, 0.0, qubit_cap);

  GapProfile out;
  const auto points = static_cast<std::size_t>(grid_points);
  out.s_grid.resize(points);
  out.lambda0.resize(points);
  out.lambda1.resize(points);
  out.gap.resize(points);

  const bool dense = use_dense(method, problem.dim());
  const RealVector diag = dense ? RealVector() : ising_diagonal(problem);
  RealMatrix warm;
  for (std::size_t k = 0; k < points; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(points - 1);
    LowestPair pair;
    if (dense) {
      pair = dense_lowest_two(problem, schedule, s, qubit_cap);
    } else {
      // Warm start from the previous grid point plus one fresh random direction.
      const TransverseIsing op(diag, problem.dim(), schedule.a(s), schedule.b(s));
      RealMatrix start(op.size(), warm.cols() + (warm.cols() == 0 ? 3 : 1));
      start.leftCols(warm.cols()) = warm;
      start.rightCols(start.cols() - warm.cols()) =
          random_block(op.size(), start.cols() - warm.cols(), stream_key(0x6b72796cULL, {k}));
      RitzResult ritz = krylov_lowest_two(op, std::move(start));
      pair = ritz.values;
      warm = std::move(ritz.vectors);
    }
    out.s_grid[k] = s;
    out.lambda0[k] = pair.lambda0;
    out.lambda1[k] = pair.lambda1;
    const double gap = pair.lambda1 - pair.lambda0;
    out.gap[k] = gap < kDegenerateGap ? 0.0 : gap;
  }

  const auto it = std::min_element(out.gap.begin(), out.gap.end());
  out.min_gap = *it;
  out.argmin_s = out.s_grid[static_cast<std::size_t>(it - out.gap.begin())];
  out.degenerate = out.min_gap == 0.0;
  return out;
}

IsingProblem random_ising(Index n, std::uint64_t seed, std::uint64_t index) {
  if (n < 1) throw Error("n", "need at least one qubit");
  Rng rng(seed, {0x6973696eULL, index});
  IsingProblem p;
  p.h.resize(n);
  for (Index i = 0; i < n; ++i) p.h(i) = rng.normal();
  p.j = RealMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = i + 1; k < n; ++k) p.j(i, k) = rng.normal();
  const double norm = std::max(max_norm(p.h), max_norm(p.j));
  if (norm > 0.0) {
    p.h /= norm;
    p.j /= norm;
  }
  return p;
}

GapStudy companding_gap_study(Index n, int num_instances, const AnnealSchedule& schedule, double mu,
                              std::uint64_t seed, int grid_points, EigenMethod method) {
  if (num_instances < 1) throw Error("num_instances", "num_instances must be >= 1");
  if (!(mu > 0.0)) throw Error("mu", "mu must be > 0");
  if (n > kQubitCap) throw Error("n", "qubit count exceeds the simulation cap");

  GapStudy out;
  const auto count = static_cast<std::size_t>(num_instances);
  out.plain.resize(count);
  out.companded.resize(count);
  out.flagged.resize(count);
  // Instances run sequentially; the Krylov warm start already keeps each
  // profile cheap and a fixed order keeps sums bit-stable.
  for (std::size_t i = 0; i < count; ++i) {
    const IsingProblem plain = random_ising(n, seed, i);
    const GapProfile a = gap_profile(plain, schedule, grid_points, method);
    const GapProfile b = gap_profile(compand(plain, mu), schedule, grid_points, method);
    out.plain[i] = a.min_gap;
    out.companded[i] = b.min_gap;
    out.flagged[i] = a.degenerate || b.degenerate;
  }

  double sum_a = 0.0, sum_b = 0.0, sum_a_ok = 0.0, sum_b_ok = 0.0;
  std::size_t wins = 0;
  for (std::size_t i = 0; i < count; ++i) {
    sum_a += out.plain[i];
    sum_b += out.companded[i];
    if (out.companded[i] > out.plain[i]) ++wins;
    if (out.flagged[i]) {
      ++out.num_flagged;
    } else {
      sum_a_ok += out.plain[i];
      sum_b_ok += out.companded[i];
    }
  }
  const double total = static_cast<double>(count);
  out.mean_plain = sum_a / total;
  out.mean_companded = sum_b / total;
  out.efficiency = static_cast<double>(wins) / total;
  const double ok = static_cast<double>(count - out.num_flagged);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.mean_plain_unflagged = ok > 0 ? sum_a_ok / ok : nan;
  out.mean_companded_unflagged = ok > 0 ? sum_b_ok / ok : nan;
  return out;
}

double tts(double total_time, double p, double confidence) {
  if (!(total_time > 0.0) || !std::isfinite(total_time)) throw Error("total_time", "total anneal time must be > 0");
  if (!(p >= 0.0 && p <= 1.0)) throw Error("p", "success probability must lie in [0, 1]");
  if (p == 1.0) return total_time;
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error("confidence", "confidence must lie in (0, 1)");
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  // Same expression for both logs, so p == confidence yields total_time exactly.
  return total_time * (std::log(1.0 - confidence) / std::log(1.0 - p));
}

}  // namespace qmimo
