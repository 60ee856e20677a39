#include "pargate/geometric.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pargate {

namespace {

constexpr double kPi = std::numbers::pi;

// Uniform grid spacing, validating the stored grid as a side effect.
double grid_step(const Eigen::VectorXd& times) {
  const int n = static_cast<int>(times.size());
  if (n < 4) throw std::invalid_argument("trajectory grid needs at least 4 samples");
  const double h = (times[n - 1] - times[0]) / static_cast<double>(n - 1);
  if (!(h > 0.0)) throw std::invalid_argument("trajectory grid must be increasing");
  for (int i = 0; i + 1 < n; ++i) {
    if (std::abs(times[i + 1] - times[i] - h) > 1e-9 * std::abs(h) + 1e-300) {
      throw std::invalid_argument("trajectory grid must be uniform");
    }
  }
  return h;
}

// Composite Simpson weights; a 3/8 block absorbs the tail when the interval
// count is odd.
Eigen::VectorXd simpson_weights(int n_samples, double h) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n_samples);
  const int n_int = n_samples - 1;
  int m = n_int;              // intervals covered by the 1/3 rule
  if (n_int % 2 != 0) m -= 3; // leave the last three for the 3/8 rule
  if (m > 0) {
    w[0] += h / 3.0;
    w[m] += h / 3.0;
    for (int i = 1; i < m; ++i) w[i] += (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  }
  if (m < n_int) {
    w[m] += 3.0 * h / 8.0;
    w[m + 1] += 9.0 * h / 8.0;
    w[m + 2] += 9.0 * h / 8.0;
    w[m + 3] += 3.0 * h / 8.0;
  }
  return w;
}

// Second-order finite differences on a uniform grid.
Eigen::VectorXd grid_derivative(const Eigen::VectorXd& f, double h) {
  const int n = static_cast<int>(f.size());
  Eigen::VectorXd d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (int i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

// Linear interpolation of sampled values at an arbitrary time in range.
double interp_at(const Eigen::VectorXd& times, const Eigen::VectorXd& f, double t) {
  const int n = static_cast<int>(times.size());
  const double h = (times[n - 1] - times[0]) / static_cast<double>(n - 1);
  int i = static_cast<int>(std::floor((t - times[0]) / h));
  if (i < 0) i = 0;
  if (i > n - 2) i = n - 2;
  const double w = (t - times[i]) / h;
  return (1.0 - w) * f[i] + w * f[i + 1];
}

}  // namespace

double bessel_j0(double x) {
  // J0(x) = sum_m (-1)^m (x/2)^(2m) / (m!)^2; term ratio -(x/2)^2 / m^2.
  const double q = -0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int m = 1; m <= 200; ++m) {
    term *= q / (static_cast<double>(m) * static_cast<double>(m));
    sum += term;
    if (std::abs(term) < 1e-18 * (std::abs(sum) + 1.0)) break;
  }
  return sum;
}

double bessel_j0_first_zero() {
  double lo = 2.0;  // J0(2) > 0
  double hi = 3.0;  // J0(3) < 0
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bessel_j0(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

std::pair<GeometricTrajectory, GeometricTrajectory> ry_pi_trajectories(
    double total_time, int n_samples) {
  if (!(total_time > 0.0)) throw std::invalid_argument("ry_pi_trajectories: total_time must be positive");
  if (n_samples < 4) throw std::invalid_argument("ry_pi_trajectories: need at least 4 samples");

  const double amp = bessel_j0_first_zero();
  GeometricTrajectory plus;
  plus.total_time = total_time;
  plus.times = Eigen::VectorXd::LinSpaced(n_samples, 0.0, total_time);
  plus.theta.resize(n_samples);
  plus.phi = Eigen::VectorXd::Zero(n_samples);
  plus.gamma = Eigen::VectorXd::Zero(n_samples);
  GeometricTrajectory minus = plus;
  for (int i = 0; i < n_samples; ++i) {
    const double s = plus.times[i] / total_time;
    const double base = kPi * s;
    const double mod = 0.5 * amp * std::sin(2.0 * kPi * s);
    plus.theta[i] = base + mod;
    minus.theta[i] = base - mod;
  }
  return {plus, minus};
}

BlochPath bloch_components(const GeometricTrajectory& traj) {
  const int n = traj.n_samples();
  if (traj.theta.size() != n || traj.phi.size() != n || traj.gamma.size() != n) {
    throw std::invalid_argument("bloch_components: angle arrays must match the time grid");
  }
  BlochPath path;
  path.times = traj.times;
  path.r.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const double st = std::sin(traj.theta[i]);
    path.r(i, 0) = -std::cos(traj.gamma[i]) * st;
    path.r(i, 1) = std::sin(traj.gamma[i]) * st;
    path.r(i, 2) = std::cos(traj.theta[i]);
  }
  return path;
}

Eigen::Matrix3d cross_integral_matrix(const BlochPath& a, const BlochPath& b) {
  if (a.times.size() != b.times.size() ||
      (a.times - b.times).cwiseAbs().maxCoeff() > 1e-9 * std::abs(a.times[a.times.size() - 1])) {
    throw std::invalid_argument("cross_integral_matrix: paths must share one time grid");
  }
  const double h = grid_step(a.times);
  const Eigen::VectorXd w = simpson_weights(static_cast<int>(a.times.size()), h);
  return a.r.transpose() * w.asDiagonal() * b.r;
}

double cross_integral_infidelity(const Eigen::Matrix3d& integrals, double strength) {
  return strength * strength * integrals.squaredNorm();
}

PulseSequence trajectory_to_pulse(const GeometricTrajectory& traj, int n_slices) {
  const int n = traj.n_samples();
  if (traj.theta.size() != n || traj.phi.size() != n || traj.gamma.size() != n) {
    throw std::invalid_argument("trajectory_to_pulse: angle arrays must match the time grid");
  }
  if (n_slices < 1) throw std::invalid_argument("trajectory_to_pulse: n_slices must be positive");
  const double h = grid_step(traj.times);
  const Eigen::VectorXd dtheta = grid_derivative(traj.theta, h);
  const Eigen::VectorXd dphi = grid_derivative(traj.phi, h);
  const Eigen::VectorXd dgamma = grid_derivative(traj.gamma, h);

  // A pulse on the equatorial channels produces no sigma_z term, so the path
  // must satisfy dphi/dt + dgamma/dt cos(theta) = 0.
  double rate_scale = 1.0 / traj.total_time;
  for (int i = 0; i < n; ++i) {
    rate_scale = std::max({rate_scale, std::abs(dtheta[i]), std::abs(dgamma[i]), std::abs(dphi[i])});
  }
  for (int i = 0; i < n; ++i) {
    const double detuning = dphi[i] + dgamma[i] * std::cos(traj.theta[i]);
    if (std::abs(detuning) > 1e-6 * rate_scale) {
      std::ostringstream msg;
      msg << "trajectory_to_pulse: dphi + dgamma cos(theta) = " << detuning
          << " at sample " << i << " (t = " << traj.times[i]
          << "); the path is not drivable without a z channel";
      throw std::invalid_argument(msg.str());
    }
  }

  // u_x + i u_y = (dgamma sin(theta) + i dtheta) e^{i phi}.
  Eigen::VectorXd ux(n), uy(n);
  for (int i = 0; i < n; ++i) {
    const double re = dgamma[i] * std::sin(traj.theta[i]);
    const double im = dtheta[i];
    const double cp = std::cos(traj.phi[i]);
    const double sp = std::sin(traj.phi[i]);
    ux[i] = re * cp - im * sp;
    uy[i] = re * sp + im * cp;
  }

  PulseSequence pulse;
  pulse.total_time = traj.total_time;
  pulse.amplitudes.resize(n_slices, 2);
  const double dt = traj.total_time / static_cast<double>(n_slices);
  for (int m = 0; m < n_slices; ++m) {
    const double t_mid = (static_cast<double>(m) + 0.5) * dt;
    pulse.amplitudes(m, 0) = interp_at(traj.times, ux, t_mid);
    pulse.amplitudes(m, 1) = interp_at(traj.times, uy, t_mid);
  }
  return pulse;
}

PulseSequence primitive_pulse(double angle, double axis_phase, double total_time,
                              int n_slices) {
  if (!(total_time > 0.0)) throw std::invalid_argument("primitive_pulse: total_time must be positive");
  if (n_slices < 1) throw std::invalid_argument("primitive_pulse: n_slices must be positive");
  const double u = angle / total_time;
  PulseSequence pulse;
  pulse.total_time = total_time;
  pulse.amplitudes.resize(n_slices, 2);
  pulse.amplitudes.col(0).setConstant(u * std::cos(axis_phase));
  pulse.amplitudes.col(1).setConstant(u * std::sin(axis_phase));
  return pulse;
}

}  // namespace pargate
