#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qmimo {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using RealMatrix = Matrix<double>;
using RealVector = Vector<double>;
using ComplexMatrix = Matrix<Complex>;
using ComplexVector = Vector<Complex>;

// Assignment of up to 64 binary variables; bit i holds variable i.
using Bits = std::uint64_t;

// Every recoverable failure in the library is reported as an Error. `field`
// names the offending input ("n_tx", "config.noise_sigma", ...) when there is
// one, so front ends can point at it.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  Error(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Lexicographic order on bitstrings written variable 0 first: the lower
// assignment is the one holding a 0 at the first differing variable.
constexpr bool lex_less(Bits a, Bits b) noexcept {
  const Bits diff = a ^ b;
  if (diff == 0) return false;
  return (a & (diff & (~diff + 1))) == 0;
}

// "0110..." with variable 0 leftmost.
std::string bits_to_string(Bits bits, Index dim);
Bits bits_from_string(const std::string& text);

template <typename Derived>
double max_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : static_cast<double>(m.cwiseAbs().maxCoeff());
}

}  // namespace qmimo
