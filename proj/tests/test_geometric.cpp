#include "pargate/geometric.hpp"

#include "pargate/operators.hpp"

#include "doctest.h"

#include <cmath>

using namespace pargate;

namespace {

constexpr Complex kI{0.0, 1.0};

// J0 via its integral representation, independent of the power series.
double j0_quadrature(double x, int n = 4000) {
  auto f = [&](double t) { return std::cos(x * std::sin(t)); };
  double acc = f(0.0) + f(M_PI);
  const double h = M_PI / n;
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return acc * h / (3.0 * M_PI);
}

Operator propagate_pulse(const PulseSequence& p) {
  SliceSchedule s;
  s.total_time = p.total_time;
  for (int m = 0; m < p.n_slices(); ++m)
    s.generators.push_back(p.amplitudes(m, 0) * pauli_x() / 2.0 +
                           p.amplitudes(m, 1) * pauli_y() / 2.0);
  return propagate(s);
}

}  // namespace

TEST_CASE("bessel_j0 matches quadrature over the working range") {
  for (double x : {0.0, 0.4, 1.0, 2.0, 2.404, 3.0, 4.5}) {
    CHECK(bessel_j0(x) == doctest::Approx(j0_quadrature(x)).epsilon(1e-12));
  }
}

TEST_CASE("first J0 zero") {
  const double z = bessel_j0_first_zero();
  CHECK(std::abs(z - 2.404825557695773) < 1e-12);
  CHECK(std::abs(bessel_j0(z)) < 1e-14);
  // The zero is simple: J0 changes sign across it.
  CHECK(bessel_j0(z - 1e-6) * bessel_j0(z + 1e-6) < 0.0);
}

TEST_CASE("phase-modulated trajectories end at a pi rotation about y") {
  const double T = 2.0e-6;
  const auto [ta, tb] = ry_pi_trajectories(T, 801);
  for (const GeometricTrajectory* t : {&ta, &tb}) {
    CHECK(t->theta(0) == doctest::Approx(0.0));
    CHECK(t->theta(t->n_samples() - 1) == doctest::Approx(M_PI).epsilon(1e-12));
    CHECK(t->times(0) == 0.0);
    CHECK(t->times(t->n_samples() - 1) == doctest::Approx(T));
  }
  // Opposite modulation senses: theta deviations from the linear ramp mirror.
  const int mid = ta.n_samples() / 4;
  const double ramp = M_PI * ta.times(mid) / T;
  CHECK(ta.theta(mid) - ramp == doctest::Approx(-(tb.theta(mid) - ramp)).epsilon(1e-12));
}

TEST_CASE("cross integrals of the modulated pair vanish") {
  const double T = 1.0e-6;
  const auto [ta, tb] = ry_pi_trajectories(T, 4001);
  const Eigen::Matrix3d c = cross_integral_matrix(bloch_components(ta), bloch_components(tb));
  CHECK(c.cwiseAbs().maxCoeff() < 1e-8 * T);
  // Leading-order infidelity then sits at numerical zero relative to g^2 T^2.
  const double g = 2.0 * M_PI * 1.0e5;
  CHECK(cross_integral_infidelity(c, g) < 1e-14 * g * g * T * T);
}

TEST_CASE("identical unmodulated ramps do NOT cancel the cross integrals") {
  // Sanity for the oracle itself: a plain linear ramp against a copy of
  // itself has an O(T) cross integral, so the cancellation above is real.
  const double T = 1.0e-6;
  GeometricTrajectory lin;
  lin.total_time = T;
  const int n = 2001;
  lin.times = Eigen::VectorXd::LinSpaced(n, 0.0, T);
  lin.theta = M_PI * lin.times / T;
  lin.phi = Eigen::VectorXd::Zero(n);
  lin.gamma = Eigen::VectorXd::Zero(n);
  const Eigen::Matrix3d c = cross_integral_matrix(bloch_components(lin), bloch_components(lin));
  CHECK(c.cwiseAbs().maxCoeff() > 0.1 * T);
}

TEST_CASE("cross_integral_matrix agrees with a rectangle-rule reference") {
  const double T = 3.0e-6;
  const auto [ta, tb] = ry_pi_trajectories(T, 2001);
  const BlochPath pa = bloch_components(ta), pb = bloch_components(tb);
  const double h = pa.times(1) - pa.times(0);
  Eigen::Matrix3d ref = Eigen::Matrix3d::Zero();
  for (int i = 0; i + 1 < pa.times.size(); ++i) {
    const Eigen::Vector3d ma = 0.5 * (pa.r.row(i) + pa.r.row(i + 1));
    const Eigen::Vector3d mb = 0.5 * (pb.r.row(i) + pb.r.row(i + 1));
    ref += h * ma * mb.transpose();
  }
  const Eigen::Matrix3d c = cross_integral_matrix(pa, pb);
  CHECK((c - ref).cwiseAbs().maxCoeff() < 1e-6 * T);
}

TEST_CASE("bloch components are unit vectors matching the Euler angles") {
  const auto [ta, tb] = ry_pi_trajectories(1.0e-6, 257);
  const BlochPath p = bloch_components(ta);
  for (int i = 0; i < p.times.size(); i += 16) {
    CHECK(p.r.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.r(i, 2) == doctest::Approx(std::cos(ta.theta(i))).epsilon(1e-12));
  }
}

TEST_CASE("sliced trajectory pulse reproduces the target rotation") {
  const double T = 2.0e-6;
  const auto [ta, tb] = ry_pi_trajectories(T, 4097);
  const Operator target = expm_hermitian(pauli_y() / 2.0, M_PI);  // Ry(pi)
  for (const GeometricTrajectory* t : {&ta, &tb}) {
    const PulseSequence p = trajectory_to_pulse(*t, 512);
    CHECK(p.n_channels() == 2);
    CHECK(p.total_time == doctest::Approx(T));
    const double f = trace_fidelity(propagate_pulse(p), target);
    CHECK(f > 1.0 - 1e-6);
  }
}

TEST_CASE("slice areas integrate to the full rotation angle at any resolution") {
  // The drive axis is fixed along the path, so the sliced propagator depends
  // only on the accumulated area; that area must be pi regardless of n.
  const double T = 2.0e-6;
  const auto [ta, tb] = ry_pi_trajectories(T, 8193);
  for (int n : {7, 32, 200}) {
    const PulseSequence p = trajectory_to_pulse(ta, n);
    // The rate changes sign (the modulation depth exceeds 1), so the area is
    // signed: sum the channel components vectorially before taking the norm.
    const Eigen::RowVector2d area = p.amplitudes.colwise().sum() * p.dt();
    CHECK(area.norm() == doctest::Approx(M_PI).epsilon(1e-6));
  }
}

TEST_CASE("primitive pulse is a constant-amplitude rotation") {
  const double T = 1.0e-6;
  const PulseSequence px = primitive_pulse(M_PI, 0.0, T, 16);
  CHECK((px.amplitudes.col(1).array() == 0.0).all());
  CHECK(px.amplitudes.col(0).minCoeff() == px.amplitudes.col(0).maxCoeff());
  CHECK(px.amplitudes(0, 0) == doctest::Approx(M_PI / T));
  const Operator tx = expm_hermitian(pauli_x() / 2.0, M_PI);
  CHECK(trace_fidelity(propagate_pulse(px), tx) == doctest::Approx(1.0).epsilon(1e-12));

  const PulseSequence py = primitive_pulse(M_PI, M_PI / 2.0, T, 16);
  const Operator ty = expm_hermitian(pauli_y() / 2.0, M_PI);
  CHECK(trace_fidelity(propagate_pulse(py), ty) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("drivability violations are rejected") {
  GeometricTrajectory bad;
  bad.total_time = 1.0e-6;
  const int n = 101;
  bad.times = Eigen::VectorXd::LinSpaced(n, 0.0, bad.total_time);
  bad.theta = M_PI * bad.times / bad.total_time;
  bad.phi = 2.0 * M_PI * bad.times / bad.total_time;  // phi drifts, gamma flat
  bad.gamma = Eigen::VectorXd::Zero(n);
  CHECK_THROWS_AS(trajectory_to_pulse(bad, 16), std::invalid_argument);
}
