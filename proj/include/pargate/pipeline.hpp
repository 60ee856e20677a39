#pragma once

// End-to-end experiment runs. A run builds the platform model, synthesizes
// the robust and baseline pulse sets, freezes calibrated frames into dressed
// targets, evaluates whatever the config asks for (exact fidelity, coupling
// sweeps, gate repetition, block tiles) and writes the artifact set into the
// output directory: pulse tables, optimizer traces, evaluation CSVs and a
// summary.json that carries a manifest (size + FNV-1a hash) of every CSV.

#include "pargate/config.hpp"

#include <cstdint>
#include <string>

namespace pargate {

inline constexpr char kVersion[] = "0.1.0";

struct RunOptions {
  std::string config_path;
  std::string out_dir;               // overrides the config's output_dir when nonempty
  int workers = 0;                   // overrides config / PARGATE_WORKERS when > 0
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
};

// Exit codes: 0 success, 2 invalid config (nothing written), 3 full dimension
// exceeds the cap without block evaluation, 4 optimizer non-convergence (the
// artifacts are still written and the summary carries a flag).
int run_pipeline(const RunOptions& options);

// Dry run: parse, build the model, report dimensions and evaluation cost
// without touching any numerics. Shares the exit codes above.
int verify_config(const RunOptions& options);

}  // namespace pargate
