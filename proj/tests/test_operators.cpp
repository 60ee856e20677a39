#include "pargate/operators.hpp"

#include "doctest.h"

#include <cmath>
#include <complex>

using namespace pargate;

namespace {

constexpr Complex kI{0.0, 1.0};

// Taylor series with scaling and squaring.  Works for any square A (the
// block-triangular oracle below is not Hermitian), so it shares no code path
// with expm_hermitian.
Operator expm_taylor(const Operator& A) {
  int k = 0;
  double nrm = A.norm();
  while (nrm > 0.25) {
    nrm *= 0.5;
    ++k;
  }
  const Operator S = A / std::pow(2.0, k);
  Operator term = identity(static_cast<int>(A.rows()));
  Operator sum = term;
  for (int n = 1; n < 40; ++n) {
    term = (term * S) / static_cast<double>(n);
    sum += term;
    if (term.norm() < 1e-18 * sum.norm()) break;
  }
  for (int i = 0; i < k; ++i) sum = sum * sum;
  return sum;
}

// Hermite-Genocchi integral forms of the divided differences of
// f(x) = exp(-i x dt), evaluated with composite Simpson quadrature.
Complex divdiff1_quadrature(double a, double b, double dt, int n = 2000) {
  auto f = [&](double s) { return -kI * dt * std::exp(-kI * (b + s * (a - b)) * dt); };
  Complex acc = f(0.0) + f(1.0);
  const double h = 1.0 / n;
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return acc * (h / 3.0);
}

Complex divdiff2_quadrature(double a, double b, double c, double dt, int n = 400) {
  auto fpp = [&](double x) { return -dt * dt * std::exp(-kI * x * dt); };
  const double h = 1.0 / n;
  Complex acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = i * h;
    const double ws = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    Complex inner = 0.0;
    for (int j = 0; j <= n; ++j) {
      const double t = (1.0 - s) * j * h;
      const double wt = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      inner += wt * fpp(c + s * (a - c) + t * (b - c));
    }
    acc += ws * inner * ((1.0 - s) * h / 3.0);
  }
  return acc * (h / 3.0);
}

}  // namespace

TEST_CASE("pauli matrices and tensor products") {
  const Operator x = pauli_x(), y = pauli_y(), z = pauli_z();
  CHECK((x * x - identity(2)).norm() == doctest::Approx(0.0));
  CHECK((x * y - kI * z).norm() == doctest::Approx(0.0));
  CHECK((y * z - kI * x).norm() == doctest::Approx(0.0));

  const Operator zz = tensor(z, z);
  CHECK(zz.rows() == 4);
  CHECK(zz(0, 0) == Complex(1.0));
  CHECK(zz(1, 1) == Complex(-1.0));
  CHECK(zz(3, 3) == Complex(1.0));

  // Left factor major: (A o B)[i*db+k, j*db+l] = A[i,j] B[k,l].
  const Operator a = random_hermitian(2, 1.0, 5);
  const Operator b = random_hermitian(3, 1.0, 6);
  const Operator ab = tensor(a, b);
  CHECK(ab(1 * 3 + 2, 0 * 3 + 1) == a(1, 0) * b(2, 1));
}

TEST_CASE("embedding helpers agree with explicit tensor products") {
  const std::vector<int> dims{2, 2, 2};
  const Operator x = pauli_x();
  const Operator want = tensor(identity(2), tensor(x, identity(2)));
  CHECK((embed_site(x, 1, dims) - want).norm() == doctest::Approx(0.0));

  Operator h = Operator::Zero(8, 8);
  add_embedded_site(h, x, Complex(0.5), 1, dims);
  CHECK((h - 0.5 * want).norm() == doctest::Approx(0.0));

  const Operator zz = tensor(pauli_z(), pauli_z());
  const Operator want2 = tensor(pauli_z(), tensor(identity(2), pauli_z()));
  CHECK((embed_two_site(zz, 0, 2, dims) - want2).norm() == doctest::Approx(0.0));

  Operator h2 = Operator::Zero(8, 8);
  add_embedded_two_site(h2, zz, Complex(2.0), 0, 2, dims);
  CHECK((h2 - 2.0 * want2).norm() == doctest::Approx(0.0));
}

TEST_CASE("random matrices are reproducible and well formed") {
  const Operator u1 = random_unitary(6, 42);
  const Operator u2 = random_unitary(6, 42);
  CHECK((u1 - u2).norm() == 0.0);
  CHECK(is_unitary(u1));
  CHECK((u1 - random_unitary(6, 43)).norm() > 1e-3);

  const Operator h = random_hermitian(5, 2.0, 7);
  CHECK(is_hermitian(h));
  CHECK((h - random_hermitian(5, 2.0, 7)).norm() == 0.0);
}

TEST_CASE("expm_hermitian matches the Taylor oracle") {
  for (int dim : {2, 4, 8}) {
    const Operator h = random_hermitian(dim, 1.5, 100 + dim);
    for (double dt : {1e-3, 0.3, 2.7}) {
      const Operator u = expm_hermitian(h, dt);
      CHECK(is_unitary(u));
      CHECK((u - expm_taylor(-kI * dt * h)).norm() < 1e-12 * u.norm() * dim);
    }
  }
}

TEST_CASE("propagate is time ordered with the latest slice leftmost") {
  SliceSchedule s;
  s.total_time = 0.8;
  s.generators = {random_hermitian(4, 1.0, 1), random_hermitian(4, 1.0, 2)};
  const double dt = s.dt();
  CHECK(dt == doctest::Approx(0.4));
  const Operator want = expm_hermitian(s.generators[1], dt) * expm_hermitian(s.generators[0], dt);
  CHECK((propagate(s) - want).norm() == doctest::Approx(0.0).epsilon(1e-14));

  // Trotter check against one fine-step reference: a two-slice schedule of
  // noncommuting generators is NOT exp of the average Hamiltonian.
  const Operator avg = 0.5 * (s.generators[0] + s.generators[1]);
  CHECK((propagate(s) - expm_hermitian(avg, s.total_time)).norm() > 1e-3);
}

TEST_CASE("trace fidelity invariances") {
  const Operator u = random_unitary(4, 9);
  CHECK(trace_fidelity(u, u) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(trace_fidelity(std::exp(kI * 0.7) * u, u) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(trace_fidelity(tensor(pauli_x(), identity(2)), identity(4)) ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("first divided difference matches quadrature and the defining ratio") {
  const double dt = 0.37;
  SUBCASE("well separated nodes") {
    const double a = 2.1, b = -0.4;
    const Complex direct = (std::exp(-kI * a * dt) - std::exp(-kI * b * dt)) / (a - b);
    CHECK(std::abs(expm_divdiff1(a, b, dt) - direct) < 1e-14);
  }
  SUBCASE("clustered nodes stay finite and smooth") {
    const double a = 1.0, b = 1.0 + 1e-11;
    const Complex ref = divdiff1_quadrature(a, b, dt);
    CHECK(std::abs(expm_divdiff1(a, b, dt) - ref) < 1e-12 * std::abs(ref) + 1e-15);
    CHECK(std::abs(expm_divdiff1(1.0, 1.0, dt) - (-kI * dt * std::exp(-kI * dt))) < 1e-15);
  }
  SUBCASE("symmetry") {
    CHECK(expm_divdiff1(0.3, -1.2, dt) == expm_divdiff1(-1.2, 0.3, dt));
  }
}

TEST_CASE("second divided difference matches quadrature across both branches") {
  const double dt = 0.52;
  // Spreads straddling the recurrence/series switch, including degeneracies.
  const double triples[][3] = {
      {3.0, 0.5, -2.0}, {1.0, 1.05, 1.1},    {0.0, 0.0, 0.0},
      {1.0, 1.0, 1.3},  {-0.2, -0.2, -0.2001}, {5.0, 5.19, 5.21},
  };
  for (const auto& t : triples) {
    const Complex got = expm_divdiff2(t[0], t[1], t[2], dt);
    const Complex ref = divdiff2_quadrature(t[0], t[1], t[2], dt);
    CAPTURE(t[0]);
    CAPTURE(t[1]);
    CAPTURE(t[2]);
    CHECK(std::abs(got - ref) < 1e-10 * std::abs(ref) + 1e-14);
  }
  // Permutation symmetry across the branch switch.
  CHECK(std::abs(expm_divdiff2(3.0, 0.5, -2.0, dt) - expm_divdiff2(-2.0, 3.0, 0.5, dt)) < 1e-16);
}

TEST_CASE("HermitianExp reconstructs the exponential and its eigensystem") {
  const Operator h = random_hermitian(6, 2.0, 21);
  const double dt = 0.44;
  HermitianExp e(h, dt);
  CHECK((e.unitary() - expm_hermitian(h, dt)).norm() < 1e-13);
  const Operator recon =
      e.evecs() * e.evals().cast<Complex>().asDiagonal() * e.evecs().adjoint();
  CHECK((recon - h).norm() < 1e-12 * h.norm());

  const Operator a = random_hermitian(6, 1.0, 22);
  CHECK((e.from_eigenbasis(e.to_eigenbasis(a)) - a).norm() < 1e-13);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(std::abs(e.phi1()(i, j) - expm_divdiff1(e.evals()(i), e.evals()(j), dt)) == 0.0);
}

TEST_CASE("coupling block equals the block-triangular exponential") {
  for (int dim : {2, 5}) {
    const Operator h = random_hermitian(dim, 3.0, 31 + dim);
    const Operator x = random_hermitian(dim, 1.0, 32 + dim);
    const double dt = 0.61;
    HermitianExp e(h, dt);
    const Operator got = e.coupling_block(x);

    Operator m = Operator::Zero(2 * dim, 2 * dim);
    m.topLeftCorner(dim, dim) = h;
    m.topRightCorner(dim, dim) = x;
    m.bottomRightCorner(dim, dim) = h;
    const Operator big = expm_taylor(-kI * dt * m);
    CHECK((big.topLeftCorner(dim, dim) - e.unitary()).norm() < 1e-12);
    CHECK((got - big.topRightCorner(dim, dim)).norm() < 1e-11 * got.norm());
  }
}

TEST_CASE("coupling block is the directional derivative of the slice exponential") {
  const Operator h = random_hermitian(4, 2.0, 41);
  const Operator x = random_hermitian(4, 0.8, 42);
  const double dt = 0.35, eps = 1e-6;
  HermitianExp e(h, dt);
  const Operator fd =
      (expm_hermitian(h + eps * x, dt) - expm_hermitian(h - eps * x, dt)) / (2.0 * eps);
  CHECK((e.coupling_block(x) - fd).norm() < 1e-8);
}
