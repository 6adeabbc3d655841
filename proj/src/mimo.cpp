#include "qmimo/mimo.hpp"

#include "qmimo/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace qmimo {

namespace {

const std::array<Complex, 4> kQuarterTurns = {Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};

// Coding vector of length n whose spin stack [Re; Im], read variable 0 first,
// is the binary expansion of `index` most significant bit first.
ComplexVector vector_from_index(std::uint64_t index, Index n) {
  const Index vars = 2 * n;
  auto spin = [&](Index k) { return ((index >> (vars - 1 - k)) & 1U) ? 1.0 : -1.0; };
  ComplexVector v(n);
  for (Index m = 0; m < n; ++m) v(m) = Complex(spin(m), spin(n + m));
  return v;
}

std::uint64_t index_from_vector(const ComplexVector& v) {
  const Index n = v.size();
  const Index vars = 2 * n;
  std::uint64_t index = 0;
  for (Index m = 0; m < n; ++m) {
    if (v(m).real() > 0) index |= std::uint64_t{1} << (vars - 1 - m);
    if (v(m).imag() > 0) index |= std::uint64_t{1} << (vars - 1 - (n + m));
  }
  return index;
}

// A vector is canonical when no quarter-turn rotation of it has a smaller
// lexicographic encoding (smaller index in the MSB-first expansion above).
bool is_canonical_rotation(const ComplexVector& v) {
  const std::uint64_t own = index_from_vector(v);
  for (std::size_t r = 1; r < kQuarterTurns.size(); ++r) {
    if (index_from_vector(kQuarterTurns[r] * v) < own) return false;
  }
  return true;
}

std::vector<ComplexVector> enumerate_vectors(Index n, bool canonical_only) {
  const std::uint64_t count = std::uint64_t{1} << (2 * n);
  std::vector<ComplexVector> out;
  out.reserve(static_cast<std::size_t>(canonical_only ? count / 4 : count));
  for (std::uint64_t u = 0; u < count; ++u) {
    ComplexVector v = vector_from_index(u, n);
    if (!canonical_only || is_canonical_rotation(v)) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

ComplexChannel::ComplexChannel(ComplexMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) throw Error("channel", "channel matrix must be non-empty");
  if (!entries_.allFinite()) throw Error("channel", "channel entries must be finite");
}

bool on_alphabet(const ComplexVector& v) {
  return std::all_of(v.data(), v.data() + v.size(), [](const Complex& c) {
    return std::abs(c.real()) == 1.0 && std::abs(c.imag()) == 1.0;
  });
}

CodingPair::CodingPair(ComplexVector precoder, ComplexVector postcoder)
    : f(std::move(precoder)), g(std::move(postcoder)) {
  if (f.size() < 1 || !on_alphabet(f)) throw Error("f", "precoder entries must lie in {+-1 +-1j}");
  if (g.size() < 1 || !on_alphabet(g)) throw Error("g", "postcoder entries must lie in {+-1 +-1j}");
}

bool operator==(const CodingPair& a, const CodingPair& b) {
  return a.f.size() == b.f.size() && a.g.size() == b.g.size() && a.f == b.f && a.g == b.g;
}

SnrContext::SnrContext(double p, double sigma2) : power(p), noise_var(sigma2) {
  if (!(power >= 0.0) || !std::isfinite(power)) throw Error("power", "transmit power must be finite and >= 0");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw Error("noise_var", "noise variance must be > 0");
}

ComplexChannel generate_rayleigh_channel(Index n_tx, Index n_rx, std::uint64_t seed, std::uint64_t index) {
  if (n_tx < 1) throw Error("n_tx", "n_tx must be >= 1");
  if (n_rx < 1) throw Error("n_rx", "n_rx must be >= 1");
  Rng rng(seed, {0x6368616eULL, index});
  const double sd = std::sqrt(0.5);
  ComplexMatrix h(n_rx, n_tx);
  // Row-major draw order so the stream maps onto the JSON layout.
  for (Index i = 0; i < n_rx; ++i) {
    for (Index j = 0; j < n_tx; ++j) {
      const double re = rng.normal(0.0, sd);
      const double im = rng.normal(0.0, sd);
      h(i, j) = Complex(re, im);
    }
  }
  return ComplexChannel(std::move(h));
}

double beam_gain(const ComplexChannel& channel, const CodingPair& pair) {
  if (pair.f.size() != channel.n_tx() || pair.g.size() != channel.n_rx()) {
    std::ostringstream msg;
    msg << "coding pair (" << pair.f.size() << ", " << pair.g.size() << ") does not match a " << channel.n_rx()
        << "x" << channel.n_tx() << " channel";
    throw Error("pair", msg.str());
  }
  return std::norm(pair.g.dot(channel.entries() * pair.f));
}

double snr_factor(Index n_tx, Index n_rx, const SnrContext& ctx) {
  return ctx.power / (4.0 * static_cast<double>(n_tx) * static_cast<double>(n_rx) * ctx.noise_var);
}

double snr(const ComplexChannel& channel, const CodingPair& pair, const SnrContext& ctx) {
  return snr_factor(channel.n_tx(), channel.n_rx(), ctx) * beam_gain(channel, pair);
}

Bits encode_pair(const CodingPair& pair) {
  const Index nt = pair.f.size();
  const Index nr = pair.g.size();
  if (2 * (nt + nr) > 64) throw Error("pair", "pair encoding exceeds 64 bits");
  Bits bits = 0;
  auto put = [&](Index k, double spin) {
    if (spin > 0) bits |= Bits{1} << k;
  };
  for (Index m = 0; m < nt; ++m) {
    put(m, pair.f(m).real());
    put(nt + m, pair.f(m).imag());
  }
  const Index base = 2 * nt;
  for (Index m = 0; m < nr; ++m) {
    put(base + m, pair.g(m).real());
    put(base + nr + m, pair.g(m).imag());
  }
  return bits;
}

CodingPair decode_pair(Bits bits, Index n_tx, Index n_rx) {
  auto spin = [&](Index k) { return ((bits >> k) & 1U) ? 1.0 : -1.0; };
  ComplexVector f(n_tx);
  ComplexVector g(n_rx);
  for (Index m = 0; m < n_tx; ++m) f(m) = Complex(spin(m), spin(n_tx + m));
  const Index base = 2 * n_tx;
  for (Index m = 0; m < n_rx; ++m) g(m) = Complex(spin(base + m), spin(base + n_rx + m));
  return CodingPair(std::move(f), std::move(g));
}

std::vector<CodingPair> symmetry_orbit(const CodingPair& pair) {
  std::vector<CodingPair> orbit;
  orbit.reserve(kQuarterTurns.size() * kQuarterTurns.size());
  for (const Complex& a : kQuarterTurns) {
    for (const Complex& b : kQuarterTurns) {
      CodingPair member((a * pair.f).eval(), (b * pair.g).eval());
      if (std::find(orbit.begin(), orbit.end(), member) == orbit.end()) orbit.push_back(std::move(member));
    }
  }
  return orbit;
}

CodingPair canonical_representative(const CodingPair& pair) {
  const auto orbit = symmetry_orbit(pair);
  return *std::min_element(orbit.begin(), orbit.end(), [](const CodingPair& a, const CodingPair& b) {
    return lex_less(encode_pair(a), encode_pair(b));
  });
}

SearchResult exhaustive_search(const ComplexChannel& channel, const SnrContext& ctx, bool use_symmetry,
                               int bit_cap) {
  const Index nt = channel.n_tx();
  const Index nr = channel.n_rx();
  const Index bits = 2 * (nt + nr);
  if (bits > bit_cap || bits > 62) {
    std::ostringstream msg;
    msg << "exhaustive search over " << nt << "x" << nr << " needs 2^" << bits << " = " << std::ldexp(1.0, bits)
        << " evaluations; the enumeration cap is 2^" << bit_cap;
    throw Error("bit_cap", msg.str());
  }

  const auto precoders = enumerate_vectors(nt, use_symmetry);
  const auto postcoders = enumerate_vectors(nr, use_symmetry);
  ComplexMatrix post(nr, static_cast<Index>(postcoders.size()));
  for (std::size_t c = 0; c < postcoders.size(); ++c) post.col(static_cast<Index>(c)) = postcoders[c];

  // Both lists are in lexicographic order, so the first pair to reach the
  // maximum is the smallest optimum. Relative slack keeps rounding noise from
  // promoting a later orbit member over the earlier one.
  constexpr double kTieSlack = 1e-12;
  double best = -1.0;
  std::size_t best_f = 0;
  Index best_g = 0;
  RealVector gains(post.cols());
  for (std::size_t fi = 0; fi < precoders.size(); ++fi) {
    const ComplexVector received = channel.entries() * precoders[fi];
    gains = (post.adjoint() * received).cwiseAbs2();
    for (Index gi = 0; gi < gains.size(); ++gi) {
      if (gains(gi) > best * (1.0 + kTieSlack)) {
        best = gains(gi);
        best_f = fi;
        best_g = gi;
      }
    }
  }

  CodingPair pair(precoders[best_f], postcoders[static_cast<std::size_t>(best_g)]);
  const std::uint64_t evaluations = static_cast<std::uint64_t>(precoders.size()) * postcoders.size();
  return SearchResult{std::move(pair), snr_factor(nt, nr, ctx) * best, evaluations};
}

}  // namespace qmimo
