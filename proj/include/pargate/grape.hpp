#pragma once

// Gradient-based pulse optimization.  The objective is the product of
// subsystem fidelities minus weighted pair-deviation norms,
//   f = prod_k f_k - sum_(k,j) lambda_kj f_kj,
// maximized over piecewise-constant amplitudes with exact gradients: every
// slice-exponential derivative comes from the same eigendecomposition-based
// coupling blocks the deviation engine uses, so no finite differencing is
// involved anywhere.  A multiplicative weight schedule grows lambda_kj on
// pairs whose deviation stays above threshold until all pairs comply.

#include "pargate/deviation.hpp"
#include "pargate/model.hpp"
#include "pargate/operators.hpp"

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

namespace pargate {

struct OptimizerConfig {
  int max_iters = 300;  // per weight stage
  int max_stages = 10;  // weight adjustment rounds
  // Stop when max_i |df/du_i| * bound_i falls below grad_tol (dimensionless
  // sensitivity), or the relative objective change drops below objective_tol.
  double grad_tol = 1e-8;
  double objective_tol = 1e-11;
  double lambda_init = 1.0;
  double lambda_growth = 3.0;
  double lambda_cap = 1e4;
  double pair_threshold = 1e-6;
  int lbfgs_memory = 10;
  double armijo_slope = 1e-4;
  double backtrack = 0.5;
  int max_line_steps = 40;
  // clip: project amplitudes onto their bounds after every step (default).
  // penalty: leave amplitudes free, subtract penalty_weight * overshoot^2.
  enum class Bounds { clip, penalty } bounds_mode = Bounds::clip;
  double penalty_weight = 1e3;
  // Evaluation parallelism; the result is worker-invariant, so this is purely
  // a speed knob (<= 0 picks the hardware concurrency).
  int workers = 1;
};

struct ObjectiveReport {
  double f = 0.0;   // composite objective
  double f0 = 1.0;  // product of subsystem fidelities
  std::vector<double> f_sub;
  std::vector<std::pair<int, int>> pairs;  // distinct crosstalk pairs, sorted
  std::vector<double> f_pairs;             // parallel to `pairs`
  std::vector<double> lambdas;             // parallel to `pairs`
  int iteration = 0;

  double max_f_pair() const;
};

struct IterationRecord {
  int stage = 0;
  int iteration = 0;  // global accepted-step counter
  double f = 0.0;
  double f0 = 0.0;
  double max_f_pair = 0.0;
  double grad_norm = 0.0;  // scaled sup norm, see OptimizerConfig::grad_tol
  std::vector<double> lambdas;
};

struct OptimizeResult {
  std::vector<PulseSequence> pulses;
  ObjectiveReport report;
  std::vector<IterationRecord> trace;
  bool converged = false;  // all pairs below threshold and the last stage stationary
  int stages = 0;
};

// Optimal virtual-frame dressing of a subsystem's target: angles (one per
// frame generator) maximizing |Tr(exp(-i a1 G1) exp(-i a2 G2) U target^dag)|.
// tau is the trace at the optimum.  Subsystems without frame generators get
// the plain trace.
struct FrameFit {
  std::vector<double> angles;
  Complex tau{0.0, 0.0};
};

// Drift plus channel terms, propagated over the pulse.
Operator subsystem_propagator(const SubsystemSpec& spec, const PulseSequence& pulse);

// Requires zero or exactly two frame generators, each diagonal with 0/1
// spectrum (per-qubit number operators); the two-angle maximum then reduces
// to a one-dimensional search solved by dense scan plus golden refinement.
FrameFit calibrate_frames(const SubsystemSpec& spec, const Operator& u_final);

// Target dressed so that trace_fidelity(U, dressed) equals the calibrated
// fidelity: exp(+i a1 G1) exp(+i a2 G2) * target.
Operator dressed_target(const SubsystemSpec& spec, const FrameFit& fit);

// |tau|^2 / d^2 at the calibrated optimum (plain trace fidelity when the
// subsystem has no frame generators).
double subsystem_fidelity(const SubsystemSpec& spec, const PulseSequence& pulse);

// Weights are ordered like distinct_crosstalk_pairs(model).  Workers split
// the pair/subsystem/slice work; any count gives bitwise identical results
// (<= 0 picks the hardware concurrency).
ObjectiveReport objective(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                          const std::vector<double>& lambdas, int workers = 1);

// d objective / d amplitude, one n_slices x n_channels matrix per subsystem.
std::vector<Eigen::MatrixXd> gradient(const SystemModel& model,
                                      const std::vector<PulseSequence>& pulses,
                                      const std::vector<double>& lambdas, int workers = 1);

// Multiplicative growth on pairs above pair_threshold, capped at lambda_cap.
std::vector<double> lambda_schedule(const ObjectiveReport& report, const OptimizerConfig& config);

// Seeded relative perturbation (scale 'relative_eps' of each channel's peak,
// or of a small fraction of its bound for all-zero channels), clipped.
std::vector<PulseSequence> perturb_pulses(const SystemModel& model,
                                          std::vector<PulseSequence> pulses, double relative_eps,
                                          std::uint64_t seed);

// Limited-memory quasi-Newton ascent with backtracking line search and the
// weight schedule; deterministic given its inputs (it draws no randomness,
// see perturb_pulses for seeded starts).
OptimizeResult optimize(const SystemModel& model, std::vector<PulseSequence> initial,
                        const OptimizerConfig& config);

}  // namespace pargate
