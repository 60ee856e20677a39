#pragma once

// Ground-truth evaluation on the full Hilbert space and the protocols built
// on top of it: repeated-gate decay series with linear/exponential fits,
// coupling-strength sweeps with seed spread, and tiled block fidelity for
// lattices whose full space is out of reach.

#include "pargate/model.hpp"
#include "pargate/operators.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace pargate {

// Runs fn(i) for i in [0, n) on up to `workers` threads (<= 0 picks the
// hardware concurrency).  Work items must be independent; results belong in
// slot i of a preallocated container so aggregation order never depends on
// scheduling and any worker count produces identical output.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

// Propagates the fully assembled generator (every crosstalk term active)
// slice by slice and scores against `target` (normally the tensor product of
// the calibrated subsystem targets).  Refuses dimensions above dim_cap.
double exact_fidelity(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                      const Operator& target, long long dim_cap = kDefaultDimCap);

// One fitted decay model.  Residuals are summed in fidelity space over every
// supplied point, so the two fits of a series are directly comparable.
struct DecayFit {
  double rate = 0.0;  // per-application error rate
  double ssr = 0.0;   // sum of squared residuals, fidelity space
};

struct DecaySeries {
  std::vector<int> m_values;
  std::vector<double> fidelities;
  DecayFit linear;       // 1 - F = rate * M, least squares through the origin
  DecayFit exponential;  // F = exp(-rate * M), log-linear on points with F >= 0.2
  // Unitary repetition of one imperfect gate is expected to lose fidelity
  // monotonically; coherent refocusing can break that, so violations beyond
  // 1e-9 are counted rather than asserted.
  int monotonicity_violations = 0;
};

// 1 - F = rate * M over all points.
DecayFit fit_linear_through_origin(const std::vector<int>& m, const std::vector<double>& f);
// log F = -rate * M over points with F >= 0.2 (log conditioning); throws if
// no point qualifies.  The reported ssr still covers every point.
DecayFit fit_exponential(const std::vector<int>& m, const std::vector<double>& f);

// F(M) of the M-fold composed gate against target^M, plus both fits.
DecaySeries repeat_gate(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                        const Operator& target, const std::vector<int>& m_values,
                        long long dim_cap = kDefaultDimCap);

// Model at a given axis value and seed.  Families that have no randomness
// (fixed couplings) simply ignore the seed.
using ModelFamily = std::function<SystemModel(double axis_value, std::uint64_t seed)>;

struct SweepResult {
  std::vector<double> axis;
  // Mean over seeds, and the max - min spread per point.
  std::vector<double> f_robust, f_primitive;
  std::vector<double> robust_spread, primitive_spread;
  std::vector<double> robust_min, primitive_min;
  std::vector<std::uint64_t> seeds;
};

// Exact fidelity of both fixed pulse sets across the axis; the pulses are
// never re-optimized (that is what robustness means here).  Each set is
// scored against its own dressed target, since virtual-frame calibration is
// part of the pulse set.  Points x seeds are evaluated in parallel.
SweepResult coupling_sweep(const ModelFamily& family, const std::vector<PulseSequence>& robust,
                           const std::vector<PulseSequence>& primitive,
                           const Operator& robust_target, const Operator& primitive_target,
                           const std::vector<double>& axis,
                           const std::vector<std::uint64_t>& seeds, int workers,
                           long long dim_cap = kDefaultDimCap);

struct BlockFidelityReport {
  int q = 0;
  std::vector<std::vector<int>> tiles;  // subsystem indices per tile, row-major
  std::vector<double> fidelities;       // parallel to tiles
  double f4_min = 1.0;
  double f4_mean = 1.0;
};

// Tiles the q x q subsystem grid into 2x2 tiles (odd q leaves 1x2 / 2x1 / 1x1
// tiles on the far edges), keeps only intra-tile crosstalk, and evaluates the
// exact fidelity of every tile against the tensor product of its members'
// entries in `targets` (one target per subsystem of the model).  Tiles are
// independent work units.
BlockFidelityReport block_fidelity(const SystemModel& model,
                                   const std::vector<PulseSequence>& pulses,
                                   const std::vector<Operator>& targets, int q, int workers,
                                   long long dim_cap = kDefaultDimCap);

}  // namespace pargate
