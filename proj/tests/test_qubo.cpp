#include <doctest.h>

#include "qmimo/mimo.hpp"
#include "qmimo/qubo.hpp"
#include "qmimo/rng.hpp"

#include <cmath>
#include <limits>

using namespace qmimo;

namespace {

ComplexVector random_symbols(Index n, Rng& rng) {
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(rng.coin() ? 1.0 : -1.0, rng.coin() ? 1.0 : -1.0);
  return v;
}

RealMatrix random_psd(Index n, Rng& rng) {
  RealMatrix a(n, n + 2);
  for (Index r = 0; r < a.rows(); ++r)
    for (Index c = 0; c < a.cols(); ++c) a(r, c) = rng.normal();
  return a * a.transpose();
}

RealMatrix random_symmetric(Index n, Rng& rng) {
  RealMatrix a(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = r; c < n; ++c) a(r, c) = a(c, r) = rng.normal();
  return a;
}

// Plain double loop, independent of qubo_energy.
double brute_energy(const RealMatrix& q, const RealVector& b) {
  double e = 0.0;
  for (Index i = 0; i < q.rows(); ++i)
    for (Index k = 0; k < q.cols(); ++k) e += b(i) * q(i, k) * b(k);
  return e;
}

}  // namespace

TEST_CASE("binary and spin maps") {
  RealVector b(3);
  b << 0, 1, 0;
  RealVector expected(3);
  expected << -1, 1, -1;
  CHECK(binary_to_spin(b) == expected);
  CHECK(spin_to_binary(RealVector::Ones(4)) == RealVector::Ones(4));
  for (Bits bits = 0; bits < 256; ++bits) {
    const RealVector s = bits_to_spins(bits, 8);
    CHECK(spin_to_binary(s) == bits_to_binary(bits, 8));
    CHECK(binary_to_spin(bits_to_binary(bits, 8)) == s);
    CHECK(spins_to_bits(s) == bits);
  }
  RealVector bad(2);
  bad << 0, 2;
  CHECK_THROWS_AS(binary_to_spin(bad), Error);
  CHECK_THROWS_AS(spin_to_binary(bad), Error);
}

TEST_CASE("spin vector to coding vector") {
  RealVector s(4);
  s << 1, -1, 1, 1;
  const ComplexVector v = spins_to_coding_vector(s);
  CHECK(v(0) == Complex(1, 1));
  CHECK(v(1) == Complex(-1, 1));
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const ComplexVector x = random_symbols(3, rng);
    CHECK(spins_to_coding_vector(stack_coding_vector(x)) == x);
    CHECK(on_alphabet(spins_to_coding_vector(stack_coding_vector(x))));
  }
  CHECK_THROWS_AS(spins_to_coding_vector(RealVector::Ones(3)), Error);
}

TEST_CASE("precoder embedding") {
  SUBCASE("scalar example") {
    const ComplexChannel h(ComplexMatrix::Constant(1, 1, Complex(1, 0)));
    ComplexVector g(1), f(1);
    g << Complex(1, 1);
    f << Complex(1, 1);
    const auto form = real_embed_precoder(h, g);
    CHECK(form.evaluate(stack_coding_vector(f)) == doctest::Approx(4.0));
  }
  SUBCASE("zero channel") {
    const ComplexChannel h(ComplexMatrix::Zero(2, 2));
    ComplexVector g = ComplexVector::Constant(2, Complex(1, 1));
    CHECK(real_embed_precoder(h, g).matrix.isZero(0.0));
    CHECK(real_embed_postcoder(h, g).matrix.isZero(0.0));
  }
  SUBCASE("identity over every spin vector, symmetric and PSD") {
    Rng rng(4);
    const auto h = generate_rayleigh_channel(3, 3, 7);
    const ComplexVector g = random_symbols(3, rng);
    const auto form = real_embed_precoder(h, g);
    CHECK((form.matrix - form.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(form.matrix);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    for (Bits bits = 0; bits < 64; ++bits) {
      const RealVector fr = bits_to_spins(bits, 6);
      const Complex y = g.dot(h.entries() * spins_to_coding_vector(fr));
      CHECK(form.evaluate(fr) == doctest::Approx(std::norm(y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("postcoder embedding") {
  Rng rng(5);
  const auto h = generate_rayleigh_channel(2, 2, 8);
  const ComplexVector f = random_symbols(2, rng);
  const auto form = real_embed_postcoder(h, f);
  for (Bits bits = 0; bits < 16; ++bits) {
    const RealVector gr = bits_to_spins(bits, 4);
    const ComplexVector g = spins_to_coding_vector(gr);
    CHECK(form.evaluate(gr) == doctest::Approx(beam_gain(h, CodingPair(f, g))).epsilon(1e-12));
    CHECK(form.evaluate(gr) ==
          doctest::Approx(real_embed_precoder(h, g).evaluate(stack_coding_vector(f))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(real_embed_postcoder(h, random_symbols(3, rng)), Error);
}

TEST_CASE("spin form to QUBO") {
  SUBCASE("zero form") {
    const auto q = spin_form_to_qubo(SpinQuadraticForm{RealMatrix::Zero(3, 3)});
    CHECK(q.matrix.isZero(0.0));
    CHECK(q.scale == 1.0);
    CHECK(q.offset == 0.0);
  }
  SUBCASE("identity form folds to zero") {
    const auto q = spin_form_to_qubo(SpinQuadraticForm{RealMatrix::Identity(2, 2)});
    CHECK(q.matrix.isZero(0.0));
    CHECK(q.offset == 2.0);
    for (Bits b = 0; b < 4; ++b) CHECK(spin_objective(q, qubo_energy(q, b)) == 2.0);
  }
  SUBCASE("argmax of spins is argmin of the QUBO") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      const SpinQuadraticForm form{random_psd(6, rng)};
      const auto q = spin_form_to_qubo(form);
      CHECK(q.matrix.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
      CHECK((q.matrix - q.matrix.transpose()).isZero(1e-12));
      Bits best_s = 0, best_q = 0;
      double max_s = -std::numeric_limits<double>::infinity(), min_q = std::numeric_limits<double>::infinity();
      for (Bits b = 0; b < 64; ++b) {
        const double s = form.evaluate(bits_to_spins(b, 6));
        const double e = brute_energy(q.matrix, bits_to_binary(b, 6));
        CHECK(spin_objective(q, e) == doctest::Approx(s).epsilon(1e-9));
        if (s > max_s) max_s = s, best_s = b;
        if (e < min_q) min_q = e, best_q = b;
      }
      CHECK(form.evaluate(bits_to_spins(best_q, 6)) == doctest::Approx(max_s).epsilon(1e-12));
      CHECK(qubo_energy(q, best_s) == doctest::Approx(min_q).epsilon(1e-12));
    }
  }
}

TEST_CASE("mu-law") {
  CHECK(mu_law(0.0, 255.0) == 0.0);
  CHECK(mu_law(1.0, 255.0) == 1.0);
  CHECK(mu_law(-1.0, 255.0) == -1.0);
  CHECK(mu_law(1.0 / 255.0, 255.0) == doctest::Approx(0.125).epsilon(1e-12));
  double prev = -2.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = -1.0 + i / 1000.0;
    const double y = mu_law(x, 255.0);
    CHECK(y > prev);
    CHECK(mu_law(-x, 255.0) == -y);
    prev = y;
  }

  const QuboProblem q = calibrate(RealMatrix::Identity(2, 2) * 3.0);
  const QuboProblem c = compand(q, 255.0);
  CHECK(c.mu == 255.0);
  CHECK(c.companded());
  CHECK(c.scale == q.scale);
  CHECK_THROWS_AS(compand(q, 0.0), Error);
  QuboProblem raw;
  raw.matrix = RealMatrix::Constant(2, 2, 2.0);
  CHECK_THROWS_AS(compand(raw, 255.0), Error);
}

TEST_CASE("QUBO to Ising") {
  SUBCASE("zero") {
    QuboProblem q;
    q.matrix = RealMatrix::Zero(3, 3);
    const auto ising = qubo_to_ising(q);
    CHECK(ising.h.isZero(0.0));
    CHECK(ising.j.isZero(0.0));
    CHECK(ising.offset == 0.0);
  }
  SUBCASE("one variable") {
    QuboProblem q;
    q.matrix = RealMatrix::Constant(1, 1, -1.0);
    const auto ising = qubo_to_ising(q);
    CHECK(ising_energy(ising, bits_to_spins(0, 1)) == doctest::Approx(0.0));
    CHECK(ising_energy(ising, bits_to_spins(1, 1)) == doctest::Approx(-1.0));
  }
  SUBCASE("random asymmetric dim 5") {
    Rng rng(9);
    QuboProblem q;
    q.matrix.resize(5, 5);
    for (Index r = 0; r < 5; ++r)
      for (Index c = 0; c < 5; ++c) q.matrix(r, c) = rng.normal();
    const auto ising = qubo_to_ising(q);
    CHECK(ising.j.triangularView<Eigen::Lower>().toDenseMatrix().isZero(0.0));
    for (Bits b = 0; b < 32; ++b)
      CHECK(ising_energy(ising, bits_to_spins(b, 5)) ==
            doctest::Approx(brute_energy(q.matrix, bits_to_binary(b, 5))).epsilon(1e-12));
  }
}

TEST_CASE("ICE noise") {
  QuboProblem q = calibrate(RealMatrix::Identity(4, 4));
  CHECK(inject_ice_noise(q, 0.0, 3).matrix == q.matrix);
  const auto noisy = inject_ice_noise(q, 0.3, 3);
  CHECK((noisy.matrix - noisy.matrix.transpose()).isZero(0.0));
  CHECK(noisy.matrix != q.matrix);
  CHECK(inject_ice_noise(q, 0.3, 3).matrix == noisy.matrix);
  CHECK_THROWS_AS(inject_ice_noise(q, -1.0, 3), Error);

  const double sigma = 0.2;
  const RealMatrix e = ice_noise(447, sigma, 12);  // ~10^5 upper-triangular draws
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (Index r = 0; r < e.rows(); ++r)
    for (Index c = r; c < e.cols(); ++c) {
      sum += e(r, c);
      sq += e(r, c) * e(r, c);
      ++n;
    }
  const double mean = sum / static_cast<double>(n);
  const double var = sq / static_cast<double>(n) - mean * mean;
  CHECK(var >= 0.97 * sigma * sigma);
  CHECK(var <= 1.03 * sigma * sigma);
}
