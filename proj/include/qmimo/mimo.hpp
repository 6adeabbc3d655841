#pragma once

#include "qmimo/core.hpp"

#include <cstdint>
#include <vector>

namespace qmimo {

// N_R x N_T complex channel matrix; entry (i, j) couples transmit antenna j to
// receive antenna i.
class ComplexChannel {
 public:
  explicit ComplexChannel(ComplexMatrix entries);

  Index n_tx() const { return entries_.cols(); }
  Index n_rx() const { return entries_.rows(); }
  const ComplexMatrix& entries() const { return entries_; }

 private:
  ComplexMatrix entries_;
};

// True when every entry is one of {+1+1j, +1-1j, -1+1j, -1-1j}.
bool on_alphabet(const ComplexVector& v);

// Unnormalized 1-bit precoder f (length N_T) and postcoder g (length N_R).
struct CodingPair {
  CodingPair(ComplexVector precoder, ComplexVector postcoder);

  ComplexVector f;
  ComplexVector g;
};

bool operator==(const CodingPair& a, const CodingPair& b);

struct SnrContext {
  SnrContext(double power, double noise_var);

  double power;
  double noise_var;
};

// Entries i.i.d. CN(0, 1); the stream is keyed by (seed, index) so channel k
// of an ensemble does not depend on how many others were drawn before it.
ComplexChannel generate_rayleigh_channel(Index n_tx, Index n_rx, std::uint64_t seed,
                                         std::uint64_t index = 0);

// |g^H H f|^2
double beam_gain(const ComplexChannel& channel, const CodingPair& pair);

// P |g^H H f|^2 / (4 N_T N_R sigma^2)
double snr(const ComplexChannel& channel, const CodingPair& pair, const SnrContext& ctx);

// Linear factor that turns beam_gain into snr.
double snr_factor(Index n_tx, Index n_rx, const SnrContext& ctx);

// Pair -> binary encoding of the spins [Re f; Im f; Re g; Im g] (spin +1 -> 1).
Bits encode_pair(const CodingPair& pair);
CodingPair decode_pair(Bits bits, Index n_tx, Index n_rx);

// All pairs reachable by multiplying f and g independently by a quarter-turn
// phase {1, j, -1, -j}. The group contains the sign flips (+-g, +-f) and both
// real/imaginary swap maps, and every member has the same SNR.
std::vector<CodingPair> symmetry_orbit(const CodingPair& pair);

// Orbit member with the lexicographically smallest encoding.
CodingPair canonical_representative(const CodingPair& pair);

struct SearchResult {
  CodingPair pair;
  double snr;
  std::uint64_t evaluations;
};

inline constexpr int kDefaultEnumerationBits = 28;

// Global SNR maximum over all 4^(N_T + N_R) pairs. With use_symmetry only one
// representative per orbit is evaluated. Either way the returned pair is the
// lexicographically smallest optimum, so both modes agree.
SearchResult exhaustive_search(const ComplexChannel& channel, const SnrContext& ctx, bool use_symmetry,
                               int bit_cap = kDefaultEnumerationBits);

}  // namespace qmimo
