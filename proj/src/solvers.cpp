#include "qmimo/solvers.hpp"

#include "qmimo/parallel.hpp"
#include "qmimo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qmimo {

namespace {

constexpr double energy_slack(double reference) { return 1e-12 * (1.0 + (reference < 0 ? -reference : reference)); }

bool better(double e, Bits bits, double best_e, Bits best_bits) {
  if (e < best_e - energy_slack(best_e)) return true;
  if (e > best_e + energy_slack(best_e)) return false;
  return lex_less(bits, best_bits);
}

void sort_entries(std::vector<HistogramEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const HistogramEntry& a, const HistogramEntry& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return lex_less(a.bits, b.bits);
  });
}

Bits anneal_once(const RealMatrix& m, const TemperatureSchedule& schedule, int sweeps, double norm, Rng& rng) {
  const Index n = m.rows();
  Bits state = 0;
  for (Index i = 0; i < n; ++i)
    if (rng.coin()) state |= Bits{1} << i;

  // field(i) = sum_{k != i} (M_ik + M_ki) b_k
  RealVector field = RealVector::Zero(n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k)
      if (k != i && ((state >> k) & 1U)) field(i) += m(i, k) + m(k, i);

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    const double temperature = schedule.at(sweep, sweeps, norm);
    for (Index i = 0; i < n; ++i) {
      const bool set = (state >> i) & 1U;
      const double delta = (set ? -1.0 : 1.0) * (m(i, i) + field(i));
      if (delta > 0.0 && rng.uniform() >= std::exp(-delta / temperature)) continue;
      state ^= Bits{1} << i;
      const double sign = set ? -1.0 : 1.0;
      for (Index k = 0; k < n; ++k)
        if (k != i) field(k) += sign * (m(k, i) + m(i, k));
    }
  }
  return state;
}

}  // namespace

double TemperatureSchedule::at(int sweep, int sweeps, double matrix_norm) const {
  const double scale = matrix_norm > 0.0 ? matrix_norm : 1.0;
  if (sweeps <= 1) return end * scale;
  const double t = static_cast<double>(sweep) / static_cast<double>(sweeps - 1);
  return scale * start * std::pow(end / start, t);
}

void SolverConfig::validate() const {
  if (num_anneals < 1) throw Error("num_anneals", "num_anneals must be >= 1");
  if (sweeps_per_anneal < 1) throw Error("sweeps_per_anneal", "sweeps_per_anneal must be >= 1");
  if (!(schedule.end > 0.0)) throw Error("schedule.end", "end temperature must be > 0");
  if (!(schedule.start > schedule.end)) throw Error("schedule.start", "start temperature must exceed end temperature");
  if (!(noise_sigma >= 0.0)) throw Error("noise_sigma", "noise_sigma must be >= 0");
  if (compand_mu && !(*compand_mu > 0.0)) throw Error("compand_mu", "mu must be > 0");
}

SolutionHistogram make_histogram(const std::vector<Bits>& finals, const RealMatrix& judge) {
  std::map<Bits, std::uint64_t> counts;
  for (Bits b : finals) ++counts[b];
  SolutionHistogram hist;
  hist.dim = judge.rows();
  hist.total_anneals = finals.size();
  hist.entries.reserve(counts.size());
  for (const auto& [bits, count] : counts) hist.entries.push_back({bits, qubo_energy(judge, bits), count});
  sort_entries(hist.entries);
  return hist;
}

SolutionHistogram merge(const SolutionHistogram& a, const SolutionHistogram& b) {
  if (a.dim != b.dim) throw Error("histogram", "cannot merge histograms of different dimension");
  std::map<Bits, HistogramEntry> merged;
  for (const auto* h : {&a, &b}) {
    for (const auto& e : h->entries) {
      auto [it, inserted] = merged.try_emplace(e.bits, e);
      if (!inserted) it->second.count += e.count;
    }
  }
  SolutionHistogram out;
  out.dim = a.dim;
  out.total_anneals = a.total_anneals + b.total_anneals;
  for (auto& [bits, entry] : merged) out.entries.push_back(entry);
  sort_entries(out.entries);
  return out;
}

ExactSolution solve_exact(const QuboProblem& q, int cap) {
  const Index n = q.dim();
  if (n < 1) throw Error("dim", "QUBO must have at least one variable");
  if (n > cap || n > 62)
    throw Error("dim", "exact QUBO solve over " + std::to_string(n) + " variables exceeds the cap of " +
                           std::to_string(cap));
  const RealMatrix& m = q.matrix;
  const RealMatrix coupling = m + m.transpose();

  ExactSolution best{0, 0.0};
  double running = 0.0;
  RealVector field = RealVector::Zero(n);
  Bits state = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  // The running energy drifts by rounding; anything close to the incumbent is
  // rescored exactly before it can win.
  constexpr double kScreen = 1e-9;
  for (std::uint64_t step = 1; step < total; ++step) {
    const Index i = static_cast<Index>(__builtin_ctzll(step));
    const bool set = (state >> i) & 1U;
    running += (set ? -1.0 : 1.0) * (m(i, i) + field(i));
    state ^= Bits{1} << i;
    const double sign = set ? -1.0 : 1.0;
    field += sign * coupling.col(i);
    field(i) -= sign * coupling(i, i);

    if (running <= best.energy + kScreen * (1.0 + std::abs(best.energy))) {
      const double exact = qubo_energy(m, state);
      if (better(exact, state, best.energy, best.bits)) best = {state, exact};
    }
  }
  return best;
}

SolutionHistogram solve_annealed(const QuboProblem& q, const SolverConfig& cfg) {
  cfg.validate();
  const Index n = q.dim();
  if (n < 1 || n > 64) throw Error("dim", "annealed solver supports 1..64 variables");

  const RealMatrix target = cfg.compand_mu ? RealMatrix(mu_law(q.matrix, *cfg.compand_mu)) : q.matrix;
  const double norm = max_norm(target);

  std::vector<Bits> finals(static_cast<std::size_t>(cfg.num_anneals));
  parallel_for(finals.size(), [&](std::size_t a) {
    Rng rng(cfg.seed, {0x616e6e65ULL, a});
    if (cfg.noise_sigma > 0.0) {
      const RealMatrix noisy = target + ice_noise(n, cfg.noise_sigma, stream_key(cfg.seed, {0x696365ULL, a}));
      finals[a] = anneal_once(noisy, cfg.schedule, cfg.sweeps_per_anneal, norm, rng);
    } else {
      finals[a] = anneal_once(target, cfg.schedule, cfg.sweeps_per_anneal, norm, rng);
    }
  });
  return make_histogram(finals, q.matrix);
}

double success_probability(const SolutionHistogram& hist, double ground_energy, double tol) {
  if (!(tol >= 0.0)) throw Error("tol", "tolerance must be >= 0");
  if (hist.total_anneals == 0) return 0.0;
  std::uint64_t hits = 0;
  for (const auto& e : hist.entries)
    if (e.energy <= ground_energy + tol) hits += e.count;
  return static_cast<double>(hits) / static_cast<double>(hist.total_anneals);
}

namespace {

ComplexVector quantize_aligned(ComplexVector v) {
  Index peak = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(peak))) peak = i;
  const double magnitude = std::abs(v(peak));
  if (magnitude > 0.0) {
    v *= std::conj(v(peak)) / magnitude;
    v(peak) = Complex(magnitude, 0.0);
  }
  auto sgn = [](double x) { return x < 0.0 ? -1.0 : 1.0; };
  ComplexVector q(v.size());
  for (Index i = 0; i < v.size(); ++i) q(i) = Complex(sgn(v(i).real()), sgn(v(i).imag()));
  return q;
}

}  // namespace

CodingPair rq_baseline(const ComplexChannel& channel) {
  Eigen::JacobiSVD<ComplexMatrix> svd(channel.entries(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  return CodingPair(quantize_aligned(svd.matrixV().col(0)), quantize_aligned(svd.matrixU().col(0)));
}

}  // namespace qmimo
