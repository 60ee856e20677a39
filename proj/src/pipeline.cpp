#include "pargate/pipeline.hpp"

#include "pargate/evaluator.hpp"
#include "pargate/geometric.hpp"
#include "pargate/grape.hpp"
#include "pargate/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pargate {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int env_workers() {
  const char* v = std::getenv("PARGATE_WORKERS");
  return v ? std::atoi(v) : 0;
}

int resolve_workers(const RunOptions& options, const ExperimentConfig& cfg) {
  if (options.workers > 0) return options.workers;
  if (cfg.workers > 0) return cfg.workers;
  return env_workers();
}

// ---- synthesis --------------------------------------------------------------

std::vector<PulseSequence> zero_pulses(const SystemModel& model, const PulseConfig& pc) {
  std::vector<PulseSequence> out;
  out.reserve(model.subsystems.size());
  for (const SubsystemSpec& s : model.subsystems) {
    PulseSequence p;
    p.total_time = pc.total_time;
    p.amplitudes = Eigen::MatrixXd::Zero(pc.n_slices, static_cast<int>(s.channels.size()));
    out.push_back(std::move(p));
  }
  return out;
}

void require_xy_qubits(const SystemModel& model, const char* what) {
  for (const SubsystemSpec& s : model.subsystems)
    if (s.dim != 2 || s.channels.size() != 2)
      throw ConfigError(std::string(what) +
                        " synthesis needs single-qubit subsystems with two drive channels");
}

void check_amplitude_bounds(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                            const char* what) {
  for (std::size_t k = 0; k < pulses.size(); ++k) {
    const auto& channels = model.subsystems[k].channels;
    for (int c = 0; c < pulses[k].amplitudes.cols(); ++c) {
      const double peak = pulses[k].amplitudes.col(c).cwiseAbs().maxCoeff();
      const double bound = channels[static_cast<std::size_t>(c)].amplitude_bound;
      if (peak > bound * (1.0 + 1e-9))
        throw ConfigError(std::string(what) + " pulses exceed the amplitude bound: channel " +
                          channels[static_cast<std::size_t>(c)].label + " peaks at " +
                          format_number(peak) + " rad/s against bound " + format_number(bound));
    }
  }
}

// Phase-modulated pi rotations; chain neighbours get opposite modulation
// branches so every adjacent pair cancels its cross integrals.
std::vector<PulseSequence> geometric_set(const SystemModel& model, const PulseConfig& pc) {
  require_xy_qubits(model, "geometric");
  const int n_samples = std::max(2049, 4 * pc.n_slices + 1);
  const auto paths = ry_pi_trajectories(pc.total_time, n_samples);
  const PulseSequence plus = trajectory_to_pulse(paths.first, pc.n_slices);
  const PulseSequence minus = trajectory_to_pulse(paths.second, pc.n_slices);
  std::vector<PulseSequence> out;
  out.reserve(model.subsystems.size());
  for (int k = 0; k < model.n_subsystems(); ++k) out.push_back(k % 2 == 0 ? plus : minus);
  check_amplitude_bounds(model, out, "geometric");
  return out;
}

std::vector<PulseSequence> primitive_set(const SystemModel& model, const PulseConfig& pc) {
  require_xy_qubits(model, "primitive");
  const PulseSequence p =
      primitive_pulse(std::numbers::pi, 0.5 * std::numbers::pi, pc.total_time, pc.n_slices);
  std::vector<PulseSequence> out(model.subsystems.size(), p);
  check_amplitude_bounds(model, out, "primitive");
  return out;
}

struct PulseSets {
  std::vector<PulseSequence> robust;
  std::vector<PulseSequence> primitive;
  OptimizeResult robust_opt;     // populated when optimized
  OptimizeResult primitive_opt;  // crosstalk-blind baseline, same start point
  bool optimized = false;
  bool non_convergence = false;
};

PulseSets synthesize(const SystemModel& model, const ExperimentConfig& cfg) {
  PulseSets sets;
  const std::string& mode = cfg.pulse.synthesis;
  if (mode == "geometric") {
    sets.robust = geometric_set(model, cfg.pulse);
    sets.primitive = primitive_set(model, cfg.pulse);
  } else if (mode == "primitive") {
    sets.robust = primitive_set(model, cfg.pulse);
    sets.primitive = sets.robust;
  } else if (mode == "grape") {
    const double eps = cfg.perturbation > 0.0 ? cfg.perturbation : 1e-2;
    const std::vector<PulseSequence> initial =
        perturb_pulses(model, zero_pulses(model, cfg.pulse), eps, cfg.seed);
    OptimizerConfig blind = cfg.optimizer;
    blind.lambda_init = 0.0;
    blind.max_stages = 1;
    sets.primitive_opt = optimize(model, initial, blind);
    // The robust search warm-starts from the blind solution: a fresh seeded
    // kick breaks its symmetries so the pair penalty has directions to act on.
    const std::vector<PulseSequence> warm =
        perturb_pulses(model, sets.primitive_opt.pulses, eps, cfg.seed + 1);
    sets.robust_opt = optimize(model, warm, cfg.optimizer);
    sets.primitive = sets.primitive_opt.pulses;
    sets.robust = sets.robust_opt.pulses;
    sets.optimized = true;
    sets.non_convergence = !sets.robust_opt.converged || !sets.primitive_opt.converged;
  } else {
    throw ConfigError("unknown synthesis mode: " + mode);
  }
  return sets;
}

// ---- calibration ------------------------------------------------------------

struct Calibration {
  std::vector<Operator> dressed;  // per-subsystem dressed targets
  std::vector<std::vector<double>> angles;
  std::vector<double> f_sub;
  Operator full_target;  // tensor product, only when build_full
};

Calibration calibrate(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                      bool build_full) {
  Calibration cal;
  Operator full = identity(1);
  for (int k = 0; k < model.n_subsystems(); ++k) {
    const SubsystemSpec& spec = model.subsystems[static_cast<std::size_t>(k)];
    const Operator u = subsystem_propagator(spec, pulses[static_cast<std::size_t>(k)]);
    const FrameFit fit = calibrate_frames(spec, u);
    const double d = static_cast<double>(spec.target.rows());
    cal.f_sub.push_back(std::norm(fit.tau) / (d * d));
    cal.angles.push_back(fit.angles);
    cal.dressed.push_back(dressed_target(spec, fit));
    if (build_full) full = tensor(full, cal.dressed.back());
  }
  if (build_full) cal.full_target = std::move(full);
  return cal;
}

// ---- model families for sweeps and repeat-at ---------------------------------

ModelFamily make_family(const ExperimentConfig& cfg, const TransmonParams& transmon,
                        const SystemModel& base, const std::string& unit) {
  switch (cfg.platform.type) {
    case Platform::nv_chain: {
      const int n = cfg.platform.n_qubits;
      const double bound = cfg.pulse.amplitude_bound;
      const double total_time = cfg.pulse.total_time;
      if (unit == "scale") throw ConfigError("nv_chain sweeps take gT | hz | rad_per_s");
      return [n, bound, total_time, unit](double axis, std::uint64_t) {
        return build_nv_chain(n, coupling_to_rad_s(axis, unit, total_time), bound);
      };
    }
    case Platform::nmr: {
      if (unit != "scale")
        throw ConfigError("nmr sweeps scale the fixed J table; use unit \"scale\"");
      return [base](double axis, std::uint64_t) {
        SystemModel m = base;
        for (CrosstalkTerm& t : m.crosstalk) {
          t.strength *= axis;
          t.strength_bound *= std::abs(axis);
        }
        return m;
      };
    }
    case Platform::transmon_array: {
      if (unit != "hz") throw ConfigError("transmon sweeps take the coupling bound in hz");
      const double bound = cfg.pulse.amplitude_bound;
      return [transmon, bound](double axis, std::uint64_t seed) {
        TransmonParams p = transmon;
        resample_couplings(p, 2.0 * std::numbers::pi * axis, seed);
        return build_transmon_array(p, bound);
      };
    }
    case Platform::custom: break;
  }
  throw ConfigError("sweeps are not defined for custom platforms");
}

// ---- artifacts ----------------------------------------------------------------

std::string pulses_csv(const std::vector<PulseSequence>& pulses) {
  CsvWriter csv({"subsystem", "slice", "channel", "amplitude_rad_s"});
  for (std::size_t k = 0; k < pulses.size(); ++k)
    for (int m = 0; m < pulses[k].n_slices(); ++m)
      for (int c = 0; c < pulses[k].n_channels(); ++c)
        csv.add_row({std::to_string(k), std::to_string(m), std::to_string(c),
                     format_number(pulses[k].amplitudes(m, c))});
  return csv.serialize();
}

void trace_rows(CsvWriter& csv, const char* set, const std::vector<IterationRecord>& trace) {
  for (const IterationRecord& rec : trace) {
    double lambda_max = 0.0;
    for (double v : rec.lambdas) lambda_max = std::max(lambda_max, v);
    csv.add_row({set, std::to_string(rec.stage), std::to_string(rec.iteration),
                 format_number(rec.f), format_number(rec.f0), format_number(rec.max_f_pair),
                 format_number(rec.grad_norm), format_number(lambda_max)});
  }
}

std::string trace_csv(const PulseSets& sets) {
  CsvWriter csv({"set", "stage", "iteration", "f", "f0", "max_f_pair", "grad_norm", "lambda_max"});
  trace_rows(csv, "robust", sets.robust_opt.trace);
  trace_rows(csv, "primitive", sets.primitive_opt.trace);
  return csv.serialize();
}

std::string pairs_csv(const ObjectiveReport& robust, const ObjectiveReport& primitive) {
  CsvWriter csv({"k", "j", "f_pair_robust", "f_pair_primitive"});
  for (std::size_t p = 0; p < robust.pairs.size(); ++p)
    csv.add_row({std::to_string(robust.pairs[p].first), std::to_string(robust.pairs[p].second),
                 format_number(robust.f_pairs[p]), format_number(primitive.f_pairs[p])});
  return csv.serialize();
}

std::string sweep_csv(const SweepResult& sr) {
  CsvWriter csv({"axis", "f_robust", "f_primitive", "robust_spread", "primitive_spread",
                 "robust_min", "primitive_min"});
  for (std::size_t i = 0; i < sr.axis.size(); ++i)
    csv.add_row({format_number(sr.axis[i]), format_number(sr.f_robust[i]),
                 format_number(sr.f_primitive[i]), format_number(sr.robust_spread[i]),
                 format_number(sr.primitive_spread[i]), format_number(sr.robust_min[i]),
                 format_number(sr.primitive_min[i])});
  return csv.serialize();
}

std::string repeat_csv(const DecaySeries& robust, const DecaySeries& primitive) {
  CsvWriter csv({"m", "f_robust", "f_primitive"});
  for (std::size_t i = 0; i < robust.m_values.size(); ++i)
    csv.add_row({std::to_string(robust.m_values[i]), format_number(robust.fidelities[i]),
                 format_number(primitive.fidelities[i])});
  return csv.serialize();
}

std::string blocks_csv(const BlockFidelityReport& robust, const BlockFidelityReport& primitive) {
  CsvWriter csv({"tile", "members", "f_robust", "f_primitive"});
  for (std::size_t t = 0; t < robust.tiles.size(); ++t) {
    std::string members;
    for (std::size_t i = 0; i < robust.tiles[t].size(); ++i) {
      if (i) members += ';';
      members += std::to_string(robust.tiles[t][i]);
    }
    csv.add_row({std::to_string(t), members, format_number(robust.fidelities[t]),
                 format_number(primitive.fidelities[t])});
  }
  return csv.serialize();
}

json fit_json(const DecaySeries& s) {
  return json{{"linear_rate", s.linear.rate},
              {"linear_ssr", s.linear.ssr},
              {"exp_rate", s.exponential.rate},
              {"exp_ssr", s.exponential.ssr},
              {"monotonicity_violations", s.monotonicity_violations}};
}

json optimizer_json(const OptimizeResult& r) {
  return json{{"converged", r.converged},     {"stages", r.stages},
              {"iterations", r.report.iteration}, {"f", r.report.f},
              {"f0", r.report.f0},            {"max_f_pair", r.report.max_f_pair()}};
}

}  // namespace

int run_pipeline(const RunOptions& options) {
  const Clock::time_point t_total = Clock::now();
  ExperimentConfig cfg;
  try {
    cfg = load_config(options.config_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  if (options.has_seed_override) cfg.seed = options.seed_override;
  if (!options.out_dir.empty()) cfg.output_dir = options.out_dir;
  const int workers = resolve_workers(options, cfg);

  try {
    json timings;
    Clock::time_point t0 = Clock::now();

    TransmonParams transmon;
    const SystemModel model = build_model(cfg, &transmon);
    const std::vector<std::pair<int, int>> pairs = distinct_crosstalk_pairs(model);
    const long long full_dim = model.full_dim_up_to(cfg.evaluation.dim_cap);
    timings["build"] = elapsed_s(t0);

    const bool blocks = cfg.evaluation.blocks;
    if (blocks && cfg.platform.type != Platform::transmon_array)
      throw ConfigError("block evaluation needs a transmon_array platform");
    if (blocks && (cfg.evaluation.sweep.enabled || cfg.evaluation.repeat.enabled))
      throw ConfigError("sweep and repeat protocols need the full space; disable blocks");
    if (!blocks && full_dim < 0)
      throw DimCapError("full dimension exceeds the cap " +
                        std::to_string(cfg.evaluation.dim_cap) +
                        "; enable block evaluation or raise evaluation.dim_cap");

    std::printf("[pargate] %s: %s, %d subsystems, %zu crosstalk pairs, full dim %s\n",
                cfg.name.c_str(), platform_name(model.platform).c_str(), model.n_subsystems(),
                pairs.size(), full_dim > 0 ? std::to_string(full_dim).c_str() : "over cap");

    t0 = Clock::now();
    cfg.optimizer.workers = workers;
    PulseSets sets = synthesize(model, cfg);
    timings["synthesis"] = elapsed_s(t0);
    if (sets.optimized)
      std::printf("[pargate] optimized: robust f0=%s max_f_pair=%s%s, blind f0=%s\n",
                  format_number(sets.robust_opt.report.f0).c_str(),
                  format_number(sets.robust_opt.report.max_f_pair()).c_str(),
                  sets.robust_opt.converged ? "" : " (not converged)",
                  format_number(sets.primitive_opt.report.f0).c_str());

    t0 = Clock::now();
    const Calibration cal_r = calibrate(model, sets.robust, !blocks);
    const Calibration cal_p = calibrate(model, sets.primitive, !blocks);
    timings["calibration"] = elapsed_s(t0);

    std::vector<std::pair<std::string, std::string>> artifacts;
    artifacts.emplace_back("pulses_robust.csv", pulses_csv(sets.robust));
    artifacts.emplace_back("pulses_primitive.csv", pulses_csv(sets.primitive));
    if (sets.optimized) artifacts.emplace_back("optimizer_trace.csv", trace_csv(sets));

    json summary;
    summary["name"] = cfg.name;
    summary["version"] = kVersion;
    summary["config_fnv1a64"] = fnv1a64_hex(cfg.raw);
    summary["seed"] = cfg.seed;
    summary["workers"] = workers;
    summary["platform"] = platform_name(model.platform);
    summary["n_subsystems"] = model.n_subsystems();
    summary["n_qubits"] = model.total_qubits();
    summary["full_dim"] = full_dim;
    summary["n_crosstalk_pairs"] = pairs.size();
    summary["n_slices"] = cfg.pulse.n_slices;
    summary["total_time_s"] = cfg.pulse.total_time;
    summary["synthesis"] = cfg.pulse.synthesis;
    summary["f_sub_robust"] = cal_r.f_sub;
    summary["f_sub_primitive"] = cal_p.f_sub;
    summary["frame_angles_robust"] = cal_r.angles;
    summary["frame_angles_primitive"] = cal_p.angles;
    if (sets.optimized) {
      summary["optimizer"]["robust"] = optimizer_json(sets.robust_opt);
      summary["optimizer"]["primitive"] = optimizer_json(sets.primitive_opt);
    }

    t0 = Clock::now();

    long long max_pair_dim = 0;
    for (const auto& [k, j] : pairs)
      max_pair_dim = std::max(max_pair_dim,
                              static_cast<long long>(model.subsystems[static_cast<std::size_t>(k)].dim) *
                                  model.subsystems[static_cast<std::size_t>(j)].dim);
    const bool pair_diag = !pairs.empty() && max_pair_dim <= 256;
    summary["flags"]["pair_diagnostics_skipped"] = !pair_diag && !pairs.empty();
    if (pair_diag) {
      const std::vector<double> ones(pairs.size(), 1.0);
      const ObjectiveReport rep_r = objective(model, sets.robust, ones, workers);
      const ObjectiveReport rep_p = objective(model, sets.primitive, ones, workers);
      artifacts.emplace_back("pairs.csv", pairs_csv(rep_r, rep_p));
      summary["pairs"]["f_pair_max_robust"] = rep_r.max_f_pair();
      summary["pairs"]["f_pair_max_primitive"] = rep_p.max_f_pair();
      summary["pairs"]["dyson_robust"] = rep_r.f;
      summary["pairs"]["dyson_primitive"] = rep_p.f;
    }

    if (!blocks) {
      const double f_exact_r =
          exact_fidelity(model, sets.robust, cal_r.full_target, cfg.evaluation.dim_cap);
      const double f_exact_p =
          exact_fidelity(model, sets.primitive, cal_p.full_target, cfg.evaluation.dim_cap);
      summary["fidelity"]["exact_robust"] = f_exact_r;
      summary["fidelity"]["exact_primitive"] = f_exact_p;
      std::printf("[pargate] exact fidelity: robust %s, primitive %s\n",
                  format_number(f_exact_r).c_str(), format_number(f_exact_p).c_str());
    }

    if (cfg.evaluation.sweep.enabled) {
      const SweepConfig& sw = cfg.evaluation.sweep;
      const ModelFamily family = make_family(cfg, transmon, model, sw.unit);
      std::vector<std::uint64_t> seeds;
      for (int i = 0; i < sw.n_seeds; ++i) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));
      const SweepResult sr =
          coupling_sweep(family, sets.robust, sets.primitive, cal_r.full_target,
                         cal_p.full_target, sw.axis, seeds, workers, cfg.evaluation.dim_cap);
      artifacts.emplace_back("sweep.csv", sweep_csv(sr));
      double r_min = 1.0, p_min = 1.0;
      for (double v : sr.robust_min) r_min = std::min(r_min, v);
      for (double v : sr.primitive_min) p_min = std::min(p_min, v);
      summary["sweep"] = json{{"unit", sw.unit},
                              {"n_points", sr.axis.size()},
                              {"n_seeds", sw.n_seeds},
                              {"robust_min_overall", r_min},
                              {"primitive_min_overall", p_min}};
    }

    if (cfg.evaluation.repeat.enabled) {
      const RepeatConfig& rp = cfg.evaluation.repeat;
      const SystemModel at_model =
          rp.has_at ? make_family(cfg, transmon, model, rp.unit)(rp.at, cfg.seed) : model;
      const DecaySeries dec_r =
          repeat_gate(at_model, sets.robust, cal_r.full_target, rp.m_values, cfg.evaluation.dim_cap);
      const DecaySeries dec_p = repeat_gate(at_model, sets.primitive, cal_p.full_target,
                                            rp.m_values, cfg.evaluation.dim_cap);
      artifacts.emplace_back("repeat.csv", repeat_csv(dec_r, dec_p));
      summary["repeat"]["robust"] = fit_json(dec_r);
      summary["repeat"]["primitive"] = fit_json(dec_p);
      if (rp.has_at) {
        summary["repeat"]["at"] = rp.at;
        summary["repeat"]["unit"] = rp.unit;
      }
    }

    if (blocks) {
      const BlockFidelityReport br = block_fidelity(model, sets.robust, cal_r.dressed,
                                                    cfg.platform.q, workers, cfg.evaluation.dim_cap);
      const BlockFidelityReport bp = block_fidelity(model, sets.primitive, cal_p.dressed,
                                                    cfg.platform.q, workers, cfg.evaluation.dim_cap);
      artifacts.emplace_back("blocks.csv", blocks_csv(br, bp));
      summary["blocks"] = json{{"tiles", br.tiles.size()},
                               {"f4_min_robust", br.f4_min},
                               {"f4_mean_robust", br.f4_mean},
                               {"f4_min_primitive", bp.f4_min},
                               {"f4_mean_primitive", bp.f4_mean}};
      std::printf("[pargate] block fidelity: robust min %s mean %s, primitive min %s mean %s\n",
                  format_number(br.f4_min).c_str(), format_number(br.f4_mean).c_str(),
                  format_number(bp.f4_min).c_str(), format_number(bp.f4_mean).c_str());
    }
    timings["evaluation"] = elapsed_s(t0);

    summary["flags"]["non_convergence"] = sets.non_convergence;
    timings["total"] = elapsed_s(t_total);
    summary["timings_s"] = timings;

    const std::filesystem::path dir(cfg.output_dir);
    json manifest = json::object();
    for (const auto& [name, bytes] : artifacts) {
      write_file((dir / name).string(), bytes);
      manifest[name] = json{{"bytes", bytes.size()}, {"fnv1a64", fnv1a64_hex(bytes)}};
    }
    summary["manifest"] = manifest;
    write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
    std::printf("[pargate] wrote %zu artifacts to %s\n", artifacts.size() + 1,
                cfg.output_dir.c_str());

    if (sets.non_convergence) {
      std::fprintf(stderr,
                   "optimizer did not converge; artifacts carry flags.non_convergence\n");
      return 4;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DimCapError& e) {
    std::fprintf(stderr, "dimension error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int verify_config(const RunOptions& options) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(options.config_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  if (options.has_seed_override) cfg.seed = options.seed_override;

  try {
    TransmonParams transmon;
    const SystemModel model = build_model(cfg, &transmon);
    const std::vector<std::pair<int, int>> pairs = distinct_crosstalk_pairs(model);
    const long long full_dim = model.full_dim_up_to(cfg.evaluation.dim_cap);

    std::printf("name: %s\n", cfg.name.c_str());
    std::printf("platform: %s\n", platform_name(model.platform).c_str());
    bool uniform = true;
    for (const SubsystemSpec& s : model.subsystems) uniform &= s.dim == model.subsystems[0].dim;
    if (uniform)
      std::printf("subsystems: %d, dim %d each (%d qubits)\n", model.n_subsystems(),
                  model.subsystems[0].dim, model.total_qubits());
    else
      std::printf("subsystems: %d, mixed dims (%d qubits)\n", model.n_subsystems(),
                  model.total_qubits());
    if (full_dim > 0)
      std::printf("full dim: %lld\n", full_dim);
    else
      std::printf("full dim: over cap %lld\n", cfg.evaluation.dim_cap);
    std::printf("crosstalk pairs: %zu\n", pairs.size());
    std::printf("pulse: %d slices over %s s, synthesis %s\n", cfg.pulse.n_slices,
                format_number(cfg.pulse.total_time).c_str(), cfg.pulse.synthesis.c_str());
    if (cfg.optimize)
      std::printf("optimizer: up to %d stages x %d iterations\n", cfg.optimizer.max_stages,
                  cfg.optimizer.max_iters);
    if (cfg.evaluation.sweep.enabled)
      std::printf("sweep: %zu points x %d seeds (%s)\n", cfg.evaluation.sweep.axis.size(),
                  cfg.evaluation.sweep.n_seeds, cfg.evaluation.sweep.unit.c_str());
    if (cfg.evaluation.repeat.enabled)
      std::printf("repeat: %zu points up to m=%d\n", cfg.evaluation.repeat.m_values.size(),
                  cfg.evaluation.repeat.m_values.empty() ? 0
                                                         : cfg.evaluation.repeat.m_values.back());
    if (cfg.evaluation.blocks) {
      if (cfg.platform.type != Platform::transmon_array)
        throw ConfigError("block evaluation needs a transmon_array platform");
      const int half = (cfg.platform.q + 1) / 2;
      std::printf("blocks: %d tiles\n", half * half);
    } else if (full_dim < 0) {
      std::fprintf(stderr,
                   "error: full dimension exceeds the cap %lld and block evaluation is off\n",
                   cfg.evaluation.dim_cap);
      return 3;
    }
    if (!cfg.evaluation.blocks && full_dim >= 2048)
      std::printf("warning: full-space evaluation dim %lld is expensive\n", full_dim);
    std::printf("ok\n");
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace pargate
