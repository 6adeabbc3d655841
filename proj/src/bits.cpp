#include "qmimo/core.hpp"

namespace qmimo {

std::string bits_to_string(Bits bits, Index dim) {
  std::string out(static_cast<std::size_t>(dim), '0');
  for (Index i = 0; i < dim; ++i)
    if ((bits >> i) & 1U) out[static_cast<std::size_t>(i)] = '1';
  return out;
}

Bits bits_from_string(const std::string& text) {
  if (text.size() > 64) throw Error("bitstring", "bitstring longer than 64 variables");
  Bits bits = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      bits |= Bits{1} << i;
    } else if (text[i] != '0') {
      throw Error("bitstring", "bitstring may only contain '0' and '1'");
    }
  }
  return bits;
}

}  // namespace qmimo
