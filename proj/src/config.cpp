#include "pargate/config.hpp"

#include "pargate/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace pargate {

namespace {

using nlohmann::json;

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void expect_keys(const json& j, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  expect_object(j, where);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
  }
}

const json& require(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(where + " is missing \"" + key + "\"");
  return j.at(key);
}

double get_double(const json& j, const std::string& where, const char* key) {
  const json& v = require(j, where, key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

double get_double_or(const json& j, const std::string& where, const char* key, double fallback) {
  return j.contains(key) ? get_double(j, where, key) : fallback;
}

int get_int(const json& j, const std::string& where, const char* key) {
  const json& v = require(j, where, key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<int>();
}

int get_int_or(const json& j, const std::string& where, const char* key, int fallback) {
  return j.contains(key) ? get_int(j, where, key) : fallback;
}

bool get_bool_or(const json& j, const std::string& where, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& where, const char* key) {
  const json& v = require(j, where, key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

std::string get_string_or(const json& j, const std::string& where, const char* key,
                          const std::string& fallback) {
  return j.contains(key) ? get_string(j, where, key) : fallback;
}

std::uint64_t get_seed_or(const json& j, const std::string& where, const char* key,
                          std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<long long>() < 0))
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

Complex parse_complex(const json& v, const std::string& where) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<double>(), v[1].get<double>());
  throw ConfigError(where + " entries must be numbers or [re, im] pairs");
}

Operator parse_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + " must be a nonempty array of rows");
  const int rows = static_cast<int>(v.size());
  int cols = -1;
  for (int r = 0; r < rows; ++r) {
    if (!v[r].is_array()) throw ConfigError(where + " rows must be arrays");
    if (cols < 0)
      cols = static_cast<int>(v[r].size());
    else if (static_cast<int>(v[r].size()) != cols)
      throw ConfigError(where + " rows have inconsistent lengths");
  }
  if (cols == 0) throw ConfigError(where + " rows must not be empty");
  Operator out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = parse_complex(v[r][c], where);
  return out;
}

void check_coupling_unit(const std::string& unit, const std::string& where) {
  if (unit != "gT" && unit != "hz" && unit != "rad_per_s")
    throw ConfigError(where + ": unknown coupling unit \"" + unit + "\"");
}

SubsystemSpec parse_subsystem(const json& j, int idx) {
  const std::string where = "platform.subsystems[" + std::to_string(idx) + "]";
  expect_keys(j, where, {"name", "qubit_labels", "drift", "target", "channels",
                         "frame_generators"});
  SubsystemSpec s;
  s.name = get_string_or(j, where, "name", "s" + std::to_string(idx));
  const json& labels = require(j, where, "qubit_labels");
  if (!labels.is_array() || labels.empty())
    throw ConfigError(where + ".qubit_labels must be a nonempty array");
  for (const json& l : labels) {
    if (!l.is_string()) throw ConfigError(where + ".qubit_labels entries must be strings");
    s.qubit_labels.push_back(l.get<std::string>());
  }
  s.drift = parse_matrix(require(j, where, "drift"), where + ".drift");
  s.dim = static_cast<int>(s.drift.rows());
  s.target = parse_matrix(require(j, where, "target"), where + ".target");
  const json& channels = require(j, where, "channels");
  if (!channels.is_array() || channels.empty())
    throw ConfigError(where + ".channels must be a nonempty array");
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const std::string cw = where + ".channels[" + std::to_string(c) + "]";
    expect_keys(channels[c], cw, {"label", "bound", "generator"});
    ControlChannel ch;
    ch.label = get_string_or(channels[c], cw, "label", "u" + std::to_string(c));
    ch.amplitude_bound = get_double(channels[c], cw, "bound");
    ch.generator = parse_matrix(require(channels[c], cw, "generator"), cw + ".generator");
    s.channels.push_back(std::move(ch));
  }
  if (j.contains("frame_generators")) {
    const json& fg = j.at("frame_generators");
    if (!fg.is_array()) throw ConfigError(where + ".frame_generators must be an array");
    for (std::size_t g = 0; g < fg.size(); ++g)
      s.frame_generators.push_back(
          parse_matrix(fg[g], where + ".frame_generators[" + std::to_string(g) + "]"));
  }
  return s;
}

PlatformConfig parse_platform(const json& j) {
  expect_object(j, "platform");
  const std::string type = get_string(j, "platform", "type");
  PlatformConfig p;
  if (type == "nv_chain") {
    expect_keys(j, "platform", {"type", "n_qubits", "coupling", "coupling_unit"});
    p.type = Platform::nv_chain;
    p.n_qubits = get_int(j, "platform", "n_qubits");
    p.coupling = get_double(j, "platform", "coupling");
    p.coupling_unit = get_string_or(j, "platform", "coupling_unit", "gT");
    check_coupling_unit(p.coupling_unit, "platform.coupling_unit");
  } else if (type == "nmr") {
    expect_keys(j, "platform", {"type", "spins", "partition", "j_couplings_hz"});
    p.type = Platform::nmr;
    const json& spins = require(j, "platform", "spins");
    if (!spins.is_array() || spins.empty())
      throw ConfigError("platform.spins must be a nonempty array");
    const int n = static_cast<int>(spins.size());
    for (int i = 0; i < n; ++i) {
      const std::string sw = "platform.spins[" + std::to_string(i) + "]";
      expect_keys(spins[i], sw, {"label", "omega_hz"});
      p.spins.labels.push_back(get_string(spins[i], sw, "label"));
      p.spins.omega.push_back(2.0 * std::numbers::pi * get_double(spins[i], sw, "omega_hz"));
    }
    p.spins.j_couplings_hz = Eigen::MatrixXd::Zero(n, n);
    const json& js = require(j, "platform", "j_couplings_hz");
    if (!js.is_array()) throw ConfigError("platform.j_couplings_hz must be an array of triples");
    for (std::size_t t = 0; t < js.size(); ++t) {
      const json& tr = js[t];
      if (!tr.is_array() || tr.size() != 3 || !tr[0].is_number_integer() ||
          !tr[1].is_number_integer() || !tr[2].is_number())
        throw ConfigError("platform.j_couplings_hz entries must be [i, j, hz] triples");
      const int a = tr[0].get<int>(), b = tr[1].get<int>();
      if (a < 0 || a >= n || b < 0 || b >= n || a == b)
        throw ConfigError("platform.j_couplings_hz indices out of range");
      p.spins.j_couplings_hz(a, b) = tr[2].get<double>();
      p.spins.j_couplings_hz(b, a) = tr[2].get<double>();
    }
    const json& part = require(j, "platform", "partition");
    if (!part.is_array() || part.empty())
      throw ConfigError("platform.partition must be a nonempty array of index lists");
    for (const json& block : part) {
      if (!block.is_array() || block.empty())
        throw ConfigError("platform.partition blocks must be nonempty index arrays");
      std::vector<int> ids;
      for (const json& v : block) {
        if (!v.is_number_integer()) throw ConfigError("platform.partition entries must be ints");
        ids.push_back(v.get<int>());
      }
      p.spins.partition.push_back(std::move(ids));
    }
  } else if (type == "transmon_array") {
    expect_keys(j, "platform", {"type", "q", "g_max_hz"});
    p.type = Platform::transmon_array;
    p.q = get_int(j, "platform", "q");
    p.g_max_hz = get_double(j, "platform", "g_max_hz");
    if (p.q < 2) throw ConfigError("platform.q must be at least 2");
    if (p.g_max_hz < 0.0) throw ConfigError("platform.g_max_hz must be non-negative");
  } else if (type == "custom") {
    expect_keys(j, "platform", {"type", "subsystems", "crosstalk"});
    p.type = Platform::custom;
    p.custom_model.platform = Platform::custom;
    const json& subs = require(j, "platform", "subsystems");
    if (!subs.is_array() || subs.empty())
      throw ConfigError("platform.subsystems must be a nonempty array");
    for (std::size_t k = 0; k < subs.size(); ++k)
      p.custom_model.subsystems.push_back(parse_subsystem(subs[k], static_cast<int>(k)));
    if (j.contains("crosstalk")) {
      const json& terms = j.at("crosstalk");
      if (!terms.is_array()) throw ConfigError("platform.crosstalk must be an array");
      for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string tw = "platform.crosstalk[" + std::to_string(t) + "]";
        expect_keys(terms[t], tw, {"k", "j", "structure", "strength", "strength_bound"});
        CrosstalkTerm term;
        term.k = get_int(terms[t], tw, "k");
        term.j = get_int(terms[t], tw, "j");
        term.structure = parse_matrix(require(terms[t], tw, "structure"), tw + ".structure");
        term.strength = get_double(terms[t], tw, "strength");
        term.strength_bound = get_double_or(terms[t], tw, "strength_bound",
                                            std::abs(term.strength));
        p.custom_model.crosstalk.push_back(std::move(term));
      }
    }
  } else {
    throw ConfigError("unknown platform type \"" + type + "\"");
  }
  return p;
}

std::vector<std::string> parse_targets(const json& j) {
  expect_keys(j, "targets", {"gate", "gates"});
  std::vector<std::string> out;
  if (j.contains("gate") && j.contains("gates"))
    throw ConfigError("targets: give either \"gate\" or \"gates\", not both");
  if (j.contains("gate")) {
    out.push_back(get_string(j, "targets", "gate"));
  } else if (j.contains("gates")) {
    const json& g = j.at("gates");
    if (!g.is_array() || g.empty()) throw ConfigError("targets.gates must be a nonempty array");
    for (const json& v : g) {
      if (!v.is_string()) throw ConfigError("targets.gates entries must be strings");
      out.push_back(v.get<std::string>());
    }
  } else {
    throw ConfigError("targets needs \"gate\" or \"gates\"");
  }
  return out;
}

PulseConfig parse_pulse(const json& j) {
  expect_keys(j, "pulse", {"total_time", "n_slices", "amplitude_bound", "synthesis"});
  PulseConfig p;
  p.total_time = get_double(j, "pulse", "total_time");
  p.n_slices = get_int(j, "pulse", "n_slices");
  p.amplitude_bound = get_double(j, "pulse", "amplitude_bound");
  p.synthesis = get_string_or(j, "pulse", "synthesis", "geometric");
  if (p.total_time <= 0.0) throw ConfigError("pulse.total_time must be positive");
  if (p.n_slices < 1) throw ConfigError("pulse.n_slices must be at least 1");
  if (p.amplitude_bound <= 0.0) throw ConfigError("pulse.amplitude_bound must be positive");
  if (p.synthesis != "geometric" && p.synthesis != "grape" && p.synthesis != "primitive")
    throw ConfigError("pulse.synthesis must be geometric, grape or primitive");
  return p;
}

void parse_optimizer(const json& j, OptimizerConfig& opt, double& perturbation) {
  expect_keys(j, "optimizer",
              {"max_iters", "max_stages", "grad_tol", "objective_tol", "lambda_init",
               "lambda_growth", "lambda_cap", "pair_threshold", "lbfgs_memory", "armijo_slope",
               "backtrack", "max_line_steps", "bounds_mode", "penalty_weight", "perturbation"});
  opt.max_iters = get_int_or(j, "optimizer", "max_iters", opt.max_iters);
  opt.max_stages = get_int_or(j, "optimizer", "max_stages", opt.max_stages);
  opt.grad_tol = get_double_or(j, "optimizer", "grad_tol", opt.grad_tol);
  opt.objective_tol = get_double_or(j, "optimizer", "objective_tol", opt.objective_tol);
  opt.lambda_init = get_double_or(j, "optimizer", "lambda_init", opt.lambda_init);
  opt.lambda_growth = get_double_or(j, "optimizer", "lambda_growth", opt.lambda_growth);
  opt.lambda_cap = get_double_or(j, "optimizer", "lambda_cap", opt.lambda_cap);
  opt.pair_threshold = get_double_or(j, "optimizer", "pair_threshold", opt.pair_threshold);
  opt.lbfgs_memory = get_int_or(j, "optimizer", "lbfgs_memory", opt.lbfgs_memory);
  opt.armijo_slope = get_double_or(j, "optimizer", "armijo_slope", opt.armijo_slope);
  opt.backtrack = get_double_or(j, "optimizer", "backtrack", opt.backtrack);
  opt.max_line_steps = get_int_or(j, "optimizer", "max_line_steps", opt.max_line_steps);
  const std::string mode = get_string_or(j, "optimizer", "bounds_mode", "clip");
  if (mode == "clip")
    opt.bounds_mode = OptimizerConfig::Bounds::clip;
  else if (mode == "penalty")
    opt.bounds_mode = OptimizerConfig::Bounds::penalty;
  else
    throw ConfigError("optimizer.bounds_mode must be clip or penalty");
  opt.penalty_weight = get_double_or(j, "optimizer", "penalty_weight", opt.penalty_weight);
  perturbation = get_double_or(j, "optimizer", "perturbation", 0.0);
  if (perturbation < 0.0) throw ConfigError("optimizer.perturbation must be non-negative");
}

EvalConfig parse_evaluation(const json& j) {
  expect_keys(j, "evaluation", {"sweep", "repeat", "blocks", "dim_cap"});
  EvalConfig e;
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    expect_keys(s, "evaluation.sweep", {"axis", "unit", "n_seeds"});
    e.sweep.enabled = true;
    const json& axis = require(s, "evaluation.sweep", "axis");
    if (!axis.is_array() || axis.empty())
      throw ConfigError("evaluation.sweep.axis must be a nonempty array");
    for (const json& v : axis) {
      if (!v.is_number()) throw ConfigError("evaluation.sweep.axis entries must be numbers");
      e.sweep.axis.push_back(v.get<double>());
    }
    e.sweep.unit = get_string_or(s, "evaluation.sweep", "unit", "gT");
    e.sweep.n_seeds = get_int_or(s, "evaluation.sweep", "n_seeds", 1);
    if (e.sweep.n_seeds < 1) throw ConfigError("evaluation.sweep.n_seeds must be at least 1");
  }
  if (j.contains("repeat")) {
    const json& r = j.at("repeat");
    expect_keys(r, "evaluation.repeat", {"m_values", "m_max", "at", "unit"});
    e.repeat.enabled = true;
    if (r.contains("m_values") && r.contains("m_max"))
      throw ConfigError("evaluation.repeat: give m_values or m_max, not both");
    if (r.contains("m_values")) {
      const json& mv = r.at("m_values");
      if (!mv.is_array() || mv.empty())
        throw ConfigError("evaluation.repeat.m_values must be a nonempty array");
      for (const json& v : mv) {
        if (!v.is_number_integer())
          throw ConfigError("evaluation.repeat.m_values entries must be integers");
        e.repeat.m_values.push_back(v.get<int>());
      }
    } else {
      const int m_max = get_int(r, "evaluation.repeat", "m_max");
      if (m_max < 1) throw ConfigError("evaluation.repeat.m_max must be at least 1");
      for (int m = 1; m <= m_max; ++m) e.repeat.m_values.push_back(m);
    }
    if (r.contains("at")) {
      e.repeat.has_at = true;
      e.repeat.at = get_double(r, "evaluation.repeat", "at");
    }
    e.repeat.unit = get_string_or(r, "evaluation.repeat", "unit", "gT");
  }
  e.blocks = get_bool_or(j, "evaluation", "blocks", false);
  if (j.contains("dim_cap")) {
    const int cap = get_int(j, "evaluation", "dim_cap");
    if (cap < 2) throw ConfigError("evaluation.dim_cap must be at least 2");
    e.dim_cap = cap;
  }
  return e;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  expect_keys(j, "config", {"name", "seed", "workers", "output_dir", "platform", "targets",
                            "pulse", "optimizer", "evaluation"});
  ExperimentConfig cfg;
  cfg.raw = text;
  cfg.name = get_string(j, "config", "name");
  cfg.seed = get_seed_or(j, "config", "seed", 1);
  cfg.workers = get_int_or(j, "config", "workers", 0);
  cfg.output_dir = get_string_or(j, "config", "output_dir", "out");
  cfg.platform = parse_platform(require(j, "config", "platform"));
  if (j.contains("targets")) cfg.target_gates = parse_targets(j.at("targets"));
  cfg.pulse = parse_pulse(require(j, "config", "pulse"));
  if (j.contains("optimizer")) parse_optimizer(j.at("optimizer"), cfg.optimizer, cfg.perturbation);
  cfg.optimize = cfg.pulse.synthesis == "grape";
  if (j.contains("evaluation")) cfg.evaluation = parse_evaluation(j.at("evaluation"));
  if (cfg.platform.type == Platform::custom && !cfg.target_gates.empty())
    throw ConfigError("custom platforms carry their own targets; drop the targets section");
  return cfg;
}

double coupling_to_rad_s(double value, const std::string& unit, double total_time) {
  if (unit == "gT") {
    if (total_time <= 0.0) throw ConfigError("gT units need a positive total_time");
    return value / total_time;
  }
  if (unit == "hz") return 2.0 * std::numbers::pi * value;
  if (unit == "rad_per_s") return value;
  throw ConfigError("unknown coupling unit \"" + unit + "\"");
}

SystemModel build_model(const ExperimentConfig& config, TransmonParams* transmon_out) {
  SystemModel model;
  switch (config.platform.type) {
    case Platform::nv_chain: {
      const double g = coupling_to_rad_s(config.platform.coupling, config.platform.coupling_unit,
                                         config.pulse.total_time);
      model = build_nv_chain(config.platform.n_qubits, g, config.pulse.amplitude_bound);
      break;
    }
    case Platform::nmr:
      model = build_nmr(config.platform.spins, config.pulse.amplitude_bound);
      break;
    case Platform::transmon_array: {
      TransmonParams params =
          sample_transmon_params(config.platform.q,
                                 2.0 * std::numbers::pi * config.platform.g_max_hz, config.seed);
      model = build_transmon_array(params, config.pulse.amplitude_bound);
      if (transmon_out) *transmon_out = params;
      break;
    }
    case Platform::custom:
      model = config.platform.custom_model;
      break;
  }
  if (!config.target_gates.empty()) {
    if (config.target_gates.size() != 1 &&
        config.target_gates.size() != model.subsystems.size())
      throw ConfigError("targets must name one gate or exactly one per subsystem");
    for (std::size_t k = 0; k < model.subsystems.size(); ++k) {
      const std::string& gate =
          config.target_gates.size() == 1 ? config.target_gates[0] : config.target_gates[k];
      SubsystemSpec& spec = model.subsystems[k];
      spec.target = named_gate(gate, static_cast<int>(spec.qubit_labels.size()));
    }
  }
  validate_model(model);
  return model;
}

}  // namespace pargate
