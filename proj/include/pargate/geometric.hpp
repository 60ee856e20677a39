#pragma once

// Geometric pulse synthesis for pairs of simultaneously driven qubits.
//
// A single-qubit control unitary is tracked by its Euler-angle path
// U(t) = Rz(phi) Ry(theta) Rz(gamma), R_mu(a) = exp(-i a sigma_mu / 2).
// The toggling-frame image of sigma_z traces a Bloch path r(t); a z x z
// coupling between two driven qubits contributes, to leading order, through
// the cross integrals C[mu][nu] = \int_0^T r_mu^(a)(t) r_nu^(b)(t) dt.
// Trajectories whose cross integrals vanish suppress the coupling error.

#include "pargate/operators.hpp"

#include <Eigen/Dense>

#include <utility>

namespace pargate {

struct GeometricTrajectory {
  double total_time = 0.0;   // seconds
  Eigen::VectorXd times;     // uniform grid including both endpoints
  Eigen::VectorXd theta;
  Eigen::VectorXd phi;
  Eigen::VectorXd gamma;

  int n_samples() const { return static_cast<int>(times.size()); }
};

// Toggling-frame components of sigma_z: r_x = -cos(gamma) sin(theta),
// r_y = sin(gamma) sin(theta), r_z = cos(theta).
struct BlochPath {
  Eigen::VectorXd times;
  Eigen::MatrixXd r;  // n_samples x 3, columns (x, y, z)
};

// Power series, accurate over the bracketing range used here.
double bessel_j0(double x);

// First positive zero of J0, bisected to machine precision (~2.40482555770).
double bessel_j0_first_zero();

// Pi rotations about y for a driven pair, phase-modulated in opposite senses:
//   theta_pm(t) = pi t / T +- (A / 2) sin(2 pi t / T),  J0(A) = 0,
// which cancels every cross integral between the two paths while each
// trajectory still ends at theta = pi.
std::pair<GeometricTrajectory, GeometricTrajectory> ry_pi_trajectories(
    double total_time, int n_samples = 1024);

BlochPath bloch_components(const GeometricTrajectory& traj);

// Composite Simpson on the common grid (3/8 tail when the interval count is
// odd).  Both paths must share the same time grid.
Eigen::Matrix3d cross_integral_matrix(const BlochPath& a, const BlochPath& b);

// Leading-order pair infidelity g^2 sum_{mu,nu} C[mu][nu]^2 produced by a
// z x z coupling of strength g (rad/s) between the two driven qubits.
double cross_integral_infidelity(const Eigen::Matrix3d& integrals, double strength);

// Invert a trajectory into piecewise-constant amplitudes on the (x, y) drive
// channels (generators sigma_x/2, sigma_y/2).  Derivatives are taken on the
// sample grid; amplitudes are interpolated at slice midpoints.  Requires the
// zero-detuning condition dphi/dt = -dgamma/dt cos(theta); throws
// std::invalid_argument naming the first violating sample otherwise.
PulseSequence trajectory_to_pulse(const GeometricTrajectory& traj, int n_slices);

// Constant-amplitude rotation by `angle` about the equatorial axis at
// `axis_phase` (0 -> x, pi/2 -> y), as an (x, y)-channel pulse.
PulseSequence primitive_pulse(double angle, double axis_phase, double total_time,
                              int n_slices);

}  // namespace pargate
