#include "pargate/deviation.hpp"

#include <cmath>
#include <stdexcept>

namespace pargate {

namespace {
constexpr Complex kI{0.0, 1.0};
}

VanLoanState::VanLoanState(int dim)
    : u_(Operator::Identity(dim, dim)), d_(Operator::Zero(dim, dim)) {}

void VanLoanState::apply_slice(const Operator& h, const Operator& x, double dt) {
  const HermitianExp slice(h, dt);
  d_ = slice.unitary() * d_ + slice.coupling_block(x) * u_;
  u_ = slice.unitary() * u_;
}

Operator VanLoanState::block_matrix() const {
  const int d = static_cast<int>(u_.rows());
  Operator v = Operator::Zero(2 * d, 2 * d);
  v.topLeftCorner(d, d) = u_;
  v.topRightCorner(d, d) = d_;
  v.bottomRightCorner(d, d) = u_;
  return v;
}

Operator vanloan_block_generator(const Operator& h, const Operator& x) {
  require_square(h, "vanloan_block_generator");
  if (x.rows() != h.rows() || x.cols() != h.cols())
    throw std::invalid_argument("vanloan_block_generator: block dims must match");
  const int d = static_cast<int>(h.rows());
  Operator g = Operator::Zero(2 * d, 2 * d);
  g.topLeftCorner(d, d) = h;
  g.topRightCorner(d, d) = x;
  g.bottomRightCorner(d, d) = h;
  return g;
}

SliceSchedule pair_schedule(const PairSpace& pair, const PulseSequence& pulse_k,
                            const PulseSequence& pulse_j) {
  if (pulse_k.n_slices() != pulse_j.n_slices() || pulse_k.total_time != pulse_j.total_time)
    throw std::invalid_argument("pair_schedule: pulses must share n_slices and total_time");
  const int n_k = pair.n_channels_k;
  const int n_j = static_cast<int>(pair.channels.size()) - n_k;
  if (pulse_k.n_channels() != n_k || pulse_j.n_channels() != n_j)
    throw std::invalid_argument("pair_schedule: pulse channel counts do not match the pair");

  SliceSchedule schedule;
  schedule.total_time = pulse_k.total_time;
  const int n_slices = pulse_k.n_slices();
  schedule.generators.reserve(n_slices);
  for (int m = 0; m < n_slices; ++m) {
    Operator h = pair.drift;
    for (int c = 0; c < n_k; ++c)
      h += pulse_k.amplitudes(m, c) * pair.channels[c].generator;
    for (int c = 0; c < n_j; ++c)
      h += pulse_j.amplitudes(m, c) * pair.channels[n_k + c].generator;
    schedule.generators.push_back(std::move(h));
  }
  return schedule;
}

DeviationResult vanloan_deviation(const PairSpace& pair, const PulseSequence& pulse_k,
                                  const PulseSequence& pulse_j) {
  require_hermitian(pair.crosstalk, "vanloan_deviation crosstalk");
  const SliceSchedule schedule = pair_schedule(pair, pulse_k, pulse_j);
  const double dt = schedule.dt();
  VanLoanState state(pair.d_pair);
  for (const Operator& h : schedule.generators) state.apply_slice(h, pair.crosstalk, dt);

  DeviationResult result;
  result.k = pair.k;
  result.j = pair.j;
  result.u_pair = state.unitary();
  result.deviation = state.deviation();
  result.f_pair = result.deviation.squaredNorm() / static_cast<double>(pair.d_pair);
  return result;
}

DeviationResult quadrature_deviation(const PairSpace& pair, const PulseSequence& pulse_k,
                                     const PulseSequence& pulse_j, int substeps) {
  if (substeps < 1) throw std::invalid_argument("quadrature_deviation: substeps must be positive");
  require_hermitian(pair.crosstalk, "quadrature_deviation crosstalk");
  const SliceSchedule schedule = pair_schedule(pair, pulse_k, pulse_j);
  const double dt = schedule.dt();
  const double h_step = dt / static_cast<double>(substeps);

  const int d = pair.d_pair;
  Operator u = Operator::Identity(d, d);
  Operator integral = Operator::Zero(d, d);  // midpoint samples of U^dag X U
  for (const Operator& h : schedule.generators) {
    const Operator e_half = expm_hermitian(h, 0.5 * h_step);
    const Operator e_full = e_half * e_half;  // exact: same generator
    Operator u_mid = e_half * u;
    for (int s = 0; s < substeps; ++s) {
      integral += h_step * (u_mid.adjoint() * pair.crosstalk * u_mid);
      if (s + 1 < substeps) u_mid = e_full * u_mid;
    }
    u = e_half * u_mid;
  }

  DeviationResult result;
  result.k = pair.k;
  result.j = pair.j;
  result.u_pair = u;
  result.deviation = -kI * (u * integral);
  result.f_pair = result.deviation.squaredNorm() / static_cast<double>(pair.d_pair);
  return result;
}

double dyson_fidelity(const std::vector<double>& subsystem_fidelities,
                      const std::vector<DeviationResult>& deviations) {
  double product = 1.0;
  for (double f : subsystem_fidelities) product *= f;
  double loss = 0.0;
  for (const auto& dev : deviations) loss += dev.f_pair;
  return product - loss;
}

double pair_norm_factorization_check(const Operator& deviation, int rest_dim,
                                     std::uint64_t seed) {
  require_square(deviation, "pair_norm_factorization_check");
  if (rest_dim < 1)
    throw std::invalid_argument("pair_norm_factorization_check: rest_dim must be positive");
  const double d_pair = static_cast<double>(deviation.rows());
  const double direct = deviation.squaredNorm() / d_pair;
  if (rest_dim == 1) return 0.0;
  const Operator rest = random_unitary(rest_dim, seed);
  const double lifted = tensor(deviation, rest).squaredNorm() / (d_pair * rest_dim);
  return std::abs(lifted - direct);
}

}  // namespace pargate
