#pragma once

// Device models: how the processor splits into subsystems, which control
// channels each subsystem owns, and which residual couplings tie subsystems
// together.  Builders cover the three studied platforms (NV chains, coupled
// nuclear spins, frequency-tunable transmon arrays) plus a custom path fed
// directly from configs.

#include "pargate/operators.hpp"

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pargate {

// Full-space assembly refuses Hilbert dimensions past this unless overridden.
inline constexpr long long kDefaultDimCap = 4096;

// Raised when an exact full-space evaluation would exceed the dimension cap;
// callers should fall back to block evaluation.
struct DimCapError : std::runtime_error {
  explicit DimCapError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ControlChannel {
  std::string label;
  Operator generator;            // Hermitian, on the subsystem space
  double amplitude_bound = 0.0;  // rad/s, > 0
};

struct SubsystemSpec {
  std::string name;
  std::vector<std::string> qubit_labels;
  int dim = 0;
  Operator drift;   // rad/s
  Operator target;  // unitary
  std::vector<ControlChannel> channels;
  // Virtual-frame generators (e.g. per-qubit number operators): fidelity
  // against the target is maximized over exp(-i phi G) dressings along these.
  // Empty means the target is matched exactly.
  std::vector<Operator> frame_generators;
};

// One elementary physical coupling between subsystems k < j (0-based).  The
// engines aggregate every term sharing the same (k, j) into a single pair
// coupling operator; several terms per pair are normal for transmon arrays.
struct CrosstalkTerm {
  int k = 0;
  int j = 0;
  Operator structure;           // Hermitian, dimensionless, on the k-major joint pair space
  double strength = 0.0;        // rad/s
  double strength_bound = 0.0;  // rad/s, |strength| <= strength_bound
};

enum class Platform { nv_chain, nmr, transmon_array, custom };

std::string platform_name(Platform p);

struct SystemModel {
  Platform platform = Platform::custom;
  std::vector<SubsystemSpec> subsystems;
  std::vector<CrosstalkTerm> crosstalk;

  int n_subsystems() const { return static_cast<int>(subsystems.size()); }
  int total_qubits() const;
  // Product of subsystem dims, or -1 once it exceeds `cap`.
  long long full_dim_up_to(long long cap = kDefaultDimCap) const;
};

// Structural validation: disjoint qubit labels, Hermitian drifts/generators/
// structures, unitary targets, index ranges, bound consistency.  Throws
// std::invalid_argument on the first violation.
void validate_model(const SystemModel& model);

// Named target on an n-qubit (all two-level) subsystem.  "identity", "ry_pi"
// and "rx_half_pi" act on every qubit; "cnot" and "cz" act on the first two
// qubits with identity on the rest.
Operator named_gate(const std::string& name, int n_qubits);

// ---- NV chain -------------------------------------------------------------

// N single-qubit subsystems with zero drift, x/y drive channels, and
// nearest-neighbor z x z couplings of uniform strength (rad/s).  Targets are
// initialized to identity; assign gates afterwards.
SystemModel build_nv_chain(int n_qubits, double coupling, double amplitude_bound);

// ---- nuclear spin system ---------------------------------------------------

struct NmrSpinSystem {
  std::vector<std::string> labels;          // one per spin
  std::vector<double> omega;                // rotating-frame offsets, rad/s
  Eigen::MatrixXd j_couplings_hz;           // symmetric scalar-coupling table, Hz
  std::vector<std::vector<int>> partition;  // spin indices per subsystem
};

// Intra-block terms Omega_i sz/2 and (pi J/2) sz sz go into the subsystem
// drifts; every inter-block J becomes a CrosstalkTerm with structure
// sz x sz / 2 and strength pi * J_hz (so strength x structure reproduces the
// drift convention).  Every spin gets x/y drive channels.
SystemModel build_nmr(const NmrSpinSystem& spins, double amplitude_bound);

// ---- transmon array --------------------------------------------------------

struct TransmonBands {
  double high_center = 2.0 * std::numbers::pi * 6.15e9;  // rad/s
  double high_halfwidth = 2.0 * std::numbers::pi * 0.15e9;
  double low_center = 2.0 * std::numbers::pi * 5.85e9;
  double low_halfwidth = 2.0 * std::numbers::pi * 0.15e9;
  double anharm_center = -2.0 * std::numbers::pi * 265e6;
  double anharm_halfwidth = 2.0 * std::numbers::pi * 10e6;
  double intra_center = 2.0 * std::numbers::pi * 24e6;
  double intra_halfwidth = 2.0 * std::numbers::pi * 2e6;
  // Common rotating frame for the whole array; drifts carry the detunings
  // omega - frame_freq while the coupling structures stay static.
  double frame_freq = 2.0 * std::numbers::pi * 6.0e9;
};

struct TransmonCoupling {
  int k = 0, j = 0;       // subsystem pair, 0-based, k < j
  int i = 0, l = 0;       // qubit inside each subsystem (0 or 1)
  double strength = 0.0;  // rad/s, signed
  double bound = 0.0;     // sampling band edge (doubled for lattice nearest neighbors)
};

struct TransmonParams {
  int q = 0;                    // lattice side; q^2 two-qubit subsystems
  double coupling_bound = 0.0;  // g_max, rad/s
  std::uint64_t seed = 0;
  TransmonBands bands;
  Eigen::MatrixXd omega;        // q^2 x 2 qubit frequencies, rad/s
  Eigen::MatrixXd anharm;       // q^2 x 2; inert at the 2-level truncation, kept for the record
  Eigen::VectorXd intra;        // q^2 intra-pair couplings, rad/s
  std::vector<TransmonCoupling> couplings;
};

// Subsystem pairs (1-based, row-major q x q grid) that carry crosstalk:
// interior cells couple to the right, lower and lower-right neighbors; the
// last column only downward, the last row only rightward.  Sorted unique;
// count is 3q^2 - 4q + 1.
std::vector<std::pair<int, int>> enumerate_crosstalk_pairs(int q);

// Deterministic draw of frequencies (qubit 1 high band, qubit 2 low band),
// anharmonicities, intra-pair couplings, and one coupling per enumerated
// subsystem pair and qubit combination.  Qubits sit on a q-row x 2q-column
// grid (subsystem k row-major, its qubits side by side); a coupling whose
// qubits are at Euclidean distance 1 samples within +-2 g_max, all others
// within +-g_max.
TransmonParams sample_transmon_params(int q, double coupling_bound, std::uint64_t seed,
                                      const TransmonBands& bands = TransmonBands{});

// Redraw only the inter-subsystem couplings at a new band edge, keeping
// frequencies, anharmonicities and intra-pair couplings fixed.
void resample_couplings(TransmonParams& params, double coupling_bound, std::uint64_t seed);

// Two-level truncation: each subsystem is one qubit pair with drift
// (omega_1 - frame) n1 + (omega_2 - frame) n2 + J sy x sy, one detuning
// channel n1 on the first qubit, and per-qubit number operators as virtual
// frame generators.  Couplings enter as sy x sy structures of the sampled
// strengths.  Targets are initialized to identity.
SystemModel build_transmon_array(const TransmonParams& params, double detuning_bound);

// ---- pair reduction and full-space assembly --------------------------------

std::vector<std::pair<int, int>> distinct_crosstalk_pairs(const SystemModel& model);

struct PairSpace {
  int k = 0, j = 0;
  int d_pair = 0;
  int n_channels_k = 0;  // leading channels belong to subsystem k
  Operator drift;        // H_k x I + I x H_j
  Operator crosstalk;    // sum of strength * structure over all (k, j) terms
  Operator target;       // target_k x target_j
  std::vector<ControlChannel> channels;  // k's as G x I, then j's as I x G
};

PairSpace pair_space(const SystemModel& model, int k, int j);

// Copy of the model with every crosstalk strength pushed to its signed bound.
SystemModel at_coupling_bounds(const SystemModel& model);

// Full-space generator of one slice: every drift, every crosstalk term, and
// every channel scaled by its slice amplitude.  One pulse per subsystem;
// works at any dimension (nothing but the slice matrix is materialized).
Operator assemble_full_slice(const SystemModel& model,
                             const std::vector<PulseSequence>& pulses, int slice);

// Materialized schedule of all slice generators; refuses dim > dim_cap.
SliceSchedule assemble_full(const SystemModel& model,
                            const std::vector<PulseSequence>& pulses,
                            long long dim_cap = kDefaultDimCap);

// Tensor product of the subsystem targets, subsystem-major.
Operator full_target(const SystemModel& model);

}  // namespace pargate
