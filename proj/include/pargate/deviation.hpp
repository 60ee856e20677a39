#pragma once

// First-order directional deviations of the crosstalk-free pair evolution.
//
// For a pair of subsystems evolving under H(t) = H_pair(t) (drift + both
// subsystems' controls) with coupling X, the deviation is
//   D = -i U(T) \int_0^T U^dag(t) X U(t) dt,
// the first-order change of the final propagator along X.  Its normalized
// squared norm f_pair = ||D||_F^2 / d_pair is the pair infidelity the robust
// objective suppresses, and Pi f_k - sum f_pair is the truncated-expansion
// fidelity surrogate for the full parallel gate.

#include "pargate/model.hpp"
#include "pargate/operators.hpp"

#include <cstdint>
#include <vector>

namespace pargate {

struct DeviationResult {
  int k = 0, j = 0;
  Operator u_pair;     // crosstalk-free pair propagator at T
  Operator deviation;  // D as above
  double f_pair = 0.0;
};

// Upper block-triangular accumulator for exp(-i dt [[H, X], [0, H]]) products:
// after any number of slices V = [[U, D], [0, U]].  Only the two distinct
// blocks are stored; block_matrix() assembles the 2d x 2d form.
class VanLoanState {
 public:
  explicit VanLoanState(int dim);

  // V <- [[U_m, D_m], [0, U_m]] V with U_m, D_m taken from the slice
  // exponential of h and the coupling block of x.
  void apply_slice(const Operator& h, const Operator& x, double dt);

  const Operator& unitary() const { return u_; }
  const Operator& deviation() const { return d_; }
  Operator block_matrix() const;

 private:
  Operator u_;
  Operator d_;
};

// The augmented generator [[H, X], [0, H]] whose exponential the state above
// accumulates; exposed for direct cross-checks against dense exponentials.
Operator vanloan_block_generator(const Operator& h, const Operator& x);

// Per-slice pair generators: drift plus both subsystems' channel terms.
// pulse_k drives the leading n_channels_k pair channels, pulse_j the rest.
SliceSchedule pair_schedule(const PairSpace& pair, const PulseSequence& pulse_k,
                            const PulseSequence& pulse_j);

// Block (Van Loan) propagation of the deviation; exact per slice.
DeviationResult vanloan_deviation(const PairSpace& pair, const PulseSequence& pulse_k,
                                  const PulseSequence& pulse_j);

// Midpoint-rule evaluation of the toggling-frame integral with `substeps`
// sample points per slice; independent second-order oracle for the above.
DeviationResult quadrature_deviation(const PairSpace& pair, const PulseSequence& pulse_k,
                                     const PulseSequence& pulse_j, int substeps);

// Pi_k f_k - sum_pairs f_pair.
double dyson_fidelity(const std::vector<double>& subsystem_fidelities,
                      const std::vector<DeviationResult>& deviations);

// | ||D x U_rest||^2 / (d rest_dim) - ||D||^2 / d | for a seeded random
// unitary U_rest: the discrepancy of the norm reduction that justifies
// evaluating deviations on pairs instead of the full space.
double pair_norm_factorization_check(const Operator& deviation, int rest_dim,
                                     std::uint64_t seed);

}  // namespace pargate
