#include "pargate/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace pargate {

namespace {

constexpr double kPi = std::numbers::pi;

// 53-bit uniform in [0, 1); hand-rolled so sampled models are reproducible
// across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double band_sample(std::mt19937_64& rng, double center, double halfwidth) {
  return center + (2.0 * unit_uniform(rng) - 1.0) * halfwidth;
}

Operator number_op() {
  Operator n = Operator::Zero(2, 2);
  n(1, 1) = 1.0;
  return n;
}

// Physical position of qubit `i` of subsystem `k0` (both 0-based) on the
// q-row x 2q-column qubit grid underlying the q x q subsystem lattice.
std::pair<int, int> qubit_position(int q, int k0, int i) {
  return {2 * (k0 % q) + i, k0 / q};
}

bool is_lattice_neighbor(int q, int k0, int i, int j0, int l) {
  const auto [xa, ya] = qubit_position(q, k0, i);
  const auto [xb, yb] = qubit_position(q, j0, l);
  const int dx = xa - xb, dy = ya - yb;
  return dx * dx + dy * dy == 1;
}

double coupling_band_edge(const TransmonParams& params, const TransmonCoupling& c) {
  const bool nn = is_lattice_neighbor(params.q, c.k, c.i, c.j, c.l);
  return (nn ? 2.0 : 1.0) * params.coupling_bound;
}

void check_pulse_set(const SystemModel& model, const std::vector<PulseSequence>& pulses) {
  if (pulses.size() != model.subsystems.size())
    throw std::invalid_argument("assemble_full: need exactly one pulse per subsystem");
  const int n_slices = pulses.front().n_slices();
  const double total_time = pulses.front().total_time;
  for (std::size_t k = 0; k < pulses.size(); ++k) {
    if (pulses[k].n_slices() != n_slices || pulses[k].total_time != total_time)
      throw std::invalid_argument("assemble_full: pulses must share n_slices and total_time");
    if (pulses[k].n_channels() != static_cast<int>(model.subsystems[k].channels.size()))
      throw std::invalid_argument("assemble_full: pulse channel count does not match subsystem " +
                                  model.subsystems[k].name);
  }
}

}  // namespace

std::string platform_name(Platform p) {
  switch (p) {
    case Platform::nv_chain: return "nv_chain";
    case Platform::nmr: return "nmr";
    case Platform::transmon_array: return "transmon_array";
    case Platform::custom: return "custom";
  }
  return "custom";
}

int SystemModel::total_qubits() const {
  int n = 0;
  for (const auto& sub : subsystems) n += static_cast<int>(sub.qubit_labels.size());
  return n;
}

long long SystemModel::full_dim_up_to(long long cap) const {
  long long dim = 1;
  for (const auto& sub : subsystems) {
    dim *= sub.dim;
    if (dim > cap) return -1;
  }
  return dim;
}

void validate_model(const SystemModel& model) {
  const int L = model.n_subsystems();
  if (L < 1) throw std::invalid_argument("model: needs at least one subsystem");
  std::set<std::string> seen_labels;
  for (int k = 0; k < L; ++k) {
    const auto& sub = model.subsystems[k];
    const std::string where = "subsystem " + (sub.name.empty() ? std::to_string(k) : sub.name);
    if (sub.dim < 2) throw std::invalid_argument(where + ": dim must be at least 2");
    if (sub.qubit_labels.empty()) throw std::invalid_argument(where + ": needs qubit labels");
    for (const auto& label : sub.qubit_labels) {
      if (!seen_labels.insert(label).second)
        throw std::invalid_argument("model: qubit label '" + label +
                                    "' appears in more than one subsystem");
    }
    if (sub.drift.rows() != sub.dim || sub.drift.cols() != sub.dim)
      throw std::invalid_argument(where + ": drift dim mismatch");
    require_hermitian(sub.drift, where + " drift");
    if (sub.target.rows() != sub.dim || !is_unitary(sub.target))
      throw std::invalid_argument(where + ": target must be unitary of matching dim");
    for (const auto& ch : sub.channels) {
      if (ch.generator.rows() != sub.dim)
        throw std::invalid_argument(where + ": channel " + ch.label + " dim mismatch");
      require_hermitian(ch.generator, where + " channel " + ch.label);
      if (!(ch.amplitude_bound > 0.0))
        throw std::invalid_argument(where + ": channel " + ch.label +
                                    " needs a positive amplitude bound");
    }
    for (const auto& fg : sub.frame_generators) {
      if (fg.rows() != sub.dim)
        throw std::invalid_argument(where + ": frame generator dim mismatch");
      require_hermitian(fg, where + " frame generator");
    }
  }
  for (const auto& term : model.crosstalk) {
    std::ostringstream where;
    where << "crosstalk (" << term.k << ", " << term.j << ")";
    if (term.k < 0 || term.j <= term.k || term.j >= L)
      throw std::invalid_argument(where.str() + ": indices must satisfy 0 <= k < j < L");
    const long long d_pair =
        static_cast<long long>(model.subsystems[term.k].dim) * model.subsystems[term.j].dim;
    if (term.structure.rows() != d_pair || term.structure.cols() != d_pair)
      throw std::invalid_argument(where.str() + ": structure dim does not match pair space");
    require_hermitian(term.structure, where.str() + " structure");
    if (term.strength_bound < 0.0 || std::abs(term.strength) > term.strength_bound)
      throw std::invalid_argument(where.str() + ": |strength| exceeds strength_bound");
  }
}

Operator named_gate(const std::string& name, int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("named_gate: need at least one qubit");
  const auto tensor_power = [n_qubits](const Operator& g) {
    Operator out = g;
    for (int i = 1; i < n_qubits; ++i) out = tensor(out, g);
    return out;
  };
  const auto on_first_two = [n_qubits](const Operator& g) {
    if (n_qubits < 2)
      throw std::invalid_argument("named_gate: two-qubit gate on a single-qubit subsystem");
    return n_qubits == 2 ? g : tensor(g, identity(1 << (n_qubits - 2)));
  };
  if (name == "identity") return identity(1 << n_qubits);
  if (name == "ry_pi") {
    Operator ry(2, 2);
    ry << 0, -1, 1, 0;
    return tensor_power(ry);
  }
  if (name == "rx_half_pi") {
    const double c = std::cos(kPi / 4.0), s = std::sin(kPi / 4.0);
    Operator rx(2, 2);
    rx << Complex(c, 0), Complex(0, -s), Complex(0, -s), Complex(c, 0);
    return tensor_power(rx);
  }
  if (name == "cnot") {
    Operator g = Operator::Zero(4, 4);
    g(0, 0) = g(1, 1) = g(2, 3) = g(3, 2) = 1.0;
    return on_first_two(g);
  }
  if (name == "cz") {
    Operator g = Operator::Identity(4, 4);
    g(3, 3) = -1.0;
    return on_first_two(g);
  }
  throw std::invalid_argument("named_gate: unknown gate '" + name + "'");
}

SystemModel build_nv_chain(int n_qubits, double coupling, double amplitude_bound) {
  if (n_qubits < 2) throw std::invalid_argument("build_nv_chain: need at least 2 qubits");
  if (!(amplitude_bound > 0.0))
    throw std::invalid_argument("build_nv_chain: amplitude bound must be positive");
  SystemModel model;
  model.platform = Platform::nv_chain;
  for (int i = 0; i < n_qubits; ++i) {
    SubsystemSpec sub;
    sub.name = "q" + std::to_string(i + 1);
    sub.qubit_labels = {sub.name};
    sub.dim = 2;
    sub.drift = Operator::Zero(2, 2);
    sub.target = identity(2);
    sub.channels.push_back({sub.name + "_x", 0.5 * pauli_x(), amplitude_bound});
    sub.channels.push_back({sub.name + "_y", 0.5 * pauli_y(), amplitude_bound});
    model.subsystems.push_back(std::move(sub));
  }
  const Operator zz = tensor(pauli_z(), pauli_z());
  for (int i = 0; i + 1 < n_qubits; ++i) {
    CrosstalkTerm term;
    term.k = i;
    term.j = i + 1;
    term.structure = zz;
    term.strength = coupling;
    term.strength_bound = std::abs(coupling);
    model.crosstalk.push_back(std::move(term));
  }
  return model;
}

SystemModel build_nmr(const NmrSpinSystem& spins, double amplitude_bound) {
  const int n = static_cast<int>(spins.labels.size());
  if (n < 1) throw std::invalid_argument("build_nmr: no spins");
  if (static_cast<int>(spins.omega.size()) != n)
    throw std::invalid_argument("build_nmr: omega size does not match spin count");
  if (spins.j_couplings_hz.rows() != n || spins.j_couplings_hz.cols() != n)
    throw std::invalid_argument("build_nmr: J table must be n x n");
  const double j_scale = std::max(1.0, spins.j_couplings_hz.cwiseAbs().maxCoeff());
  if ((spins.j_couplings_hz - spins.j_couplings_hz.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * j_scale)
    throw std::invalid_argument("build_nmr: J table must be symmetric");
  if (!(amplitude_bound > 0.0))
    throw std::invalid_argument("build_nmr: amplitude bound must be positive");

  // spin -> (block, position inside block)
  std::vector<int> block_of(n, -1), pos_of(n, -1);
  for (std::size_t b = 0; b < spins.partition.size(); ++b) {
    if (spins.partition[b].empty()) throw std::invalid_argument("build_nmr: empty block");
    for (std::size_t p = 0; p < spins.partition[b].size(); ++p) {
      const int spin = spins.partition[b][p];
      if (spin < 0 || spin >= n) throw std::invalid_argument("build_nmr: spin index out of range");
      if (block_of[spin] != -1)
        throw std::invalid_argument("build_nmr: spin " + spins.labels[spin] +
                                    " assigned to two blocks");
      block_of[spin] = static_cast<int>(b);
      pos_of[spin] = static_cast<int>(p);
    }
  }
  for (int i = 0; i < n; ++i)
    if (block_of[i] == -1)
      throw std::invalid_argument("build_nmr: spin " + spins.labels[i] + " not in any block");

  SystemModel model;
  model.platform = Platform::nmr;
  const Operator pz = pauli_z();
  for (std::size_t b = 0; b < spins.partition.size(); ++b) {
    const auto& block = spins.partition[b];
    const int n_block = static_cast<int>(block.size());
    const std::vector<int> dims(block.size(), 2);
    SubsystemSpec sub;
    sub.name = "S" + std::to_string(b + 1);
    sub.dim = 1 << n_block;
    sub.drift = Operator::Zero(sub.dim, sub.dim);
    sub.target = identity(sub.dim);
    for (int p = 0; p < n_block; ++p) {
      const int spin = block[p];
      sub.qubit_labels.push_back(spins.labels[spin]);
      add_embedded_site(sub.drift, pz, 0.5 * spins.omega[spin], p, dims);
      sub.channels.push_back(
          {spins.labels[spin] + "_x", embed_site(0.5 * pauli_x(), p, dims), amplitude_bound});
      sub.channels.push_back(
          {spins.labels[spin] + "_y", embed_site(0.5 * pauli_y(), p, dims), amplitude_bound});
    }
    const Operator zz = tensor(pz, pz);
    for (int pa = 0; pa < n_block; ++pa)
      for (int pb = pa + 1; pb < n_block; ++pb) {
        const double j_hz = spins.j_couplings_hz(block[pa], block[pb]);
        if (j_hz != 0.0) add_embedded_two_site(sub.drift, zz, 0.5 * kPi * j_hz, pa, pb, dims);
      }
    model.subsystems.push_back(std::move(sub));
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double j_hz = spins.j_couplings_hz(i, j);
      if (j_hz == 0.0 || block_of[i] == block_of[j]) continue;
      int lo = i, hi = j;
      if (block_of[lo] > block_of[hi]) std::swap(lo, hi);
      const auto& sub_lo = model.subsystems[block_of[lo]];
      const auto& sub_hi = model.subsystems[block_of[hi]];
      const std::vector<int> dims_lo(sub_lo.qubit_labels.size(), 2);
      const std::vector<int> dims_hi(sub_hi.qubit_labels.size(), 2);
      CrosstalkTerm term;
      term.k = block_of[lo];
      term.j = block_of[hi];
      term.structure = 0.5 * tensor(embed_site(pz, pos_of[lo], dims_lo),
                                    embed_site(pz, pos_of[hi], dims_hi));
      term.strength = kPi * j_hz;
      term.strength_bound = std::abs(term.strength);
      model.crosstalk.push_back(std::move(term));
    }
  return model;
}

std::vector<std::pair<int, int>> enumerate_crosstalk_pairs(int q) {
  if (q < 1) throw std::invalid_argument("enumerate_crosstalk_pairs: q must be at least 1");
  std::vector<std::pair<int, int>> out;
  const int total = q * q;
  for (int k = 1; k < total; ++k) {
    const bool last_col = (k % q == 0);
    const bool last_row = (k > q * (q - 1));
    if (last_col) {
      out.emplace_back(k, k + q);
    } else if (last_row) {
      out.emplace_back(k, k + 1);
    } else {
      out.emplace_back(k, k + 1);
      out.emplace_back(k, k + q);
      out.emplace_back(k, k + q + 1);
    }
  }
  return out;
}

TransmonParams sample_transmon_params(int q, double coupling_bound, std::uint64_t seed,
                                      const TransmonBands& bands) {
  if (q < 1) throw std::invalid_argument("sample_transmon_params: q must be at least 1");
  if (!(coupling_bound >= 0.0))
    throw std::invalid_argument("sample_transmon_params: coupling bound must be nonnegative");
  TransmonParams params;
  params.q = q;
  params.coupling_bound = coupling_bound;
  params.seed = seed;
  params.bands = bands;
  const int total = q * q;
  params.omega.resize(total, 2);
  params.anharm.resize(total, 2);
  params.intra.resize(total);
  std::mt19937_64 rng(seed);
  for (int k = 0; k < total; ++k) {
    params.omega(k, 0) = band_sample(rng, bands.high_center, bands.high_halfwidth);
    params.omega(k, 1) = band_sample(rng, bands.low_center, bands.low_halfwidth);
    params.anharm(k, 0) = band_sample(rng, bands.anharm_center, bands.anharm_halfwidth);
    params.anharm(k, 1) = band_sample(rng, bands.anharm_center, bands.anharm_halfwidth);
    params.intra(k) = band_sample(rng, bands.intra_center, bands.intra_halfwidth);
  }
  for (const auto& [k1, j1] : enumerate_crosstalk_pairs(q)) {
    for (int i = 0; i < 2; ++i)
      for (int l = 0; l < 2; ++l) {
        TransmonCoupling c;
        c.k = k1 - 1;
        c.j = j1 - 1;
        c.i = i;
        c.l = l;
        c.bound = coupling_band_edge(params, c);
        c.strength = (2.0 * unit_uniform(rng) - 1.0) * c.bound;
        params.couplings.push_back(c);
      }
  }
  return params;
}

void resample_couplings(TransmonParams& params, double coupling_bound, std::uint64_t seed) {
  if (!(coupling_bound >= 0.0))
    throw std::invalid_argument("resample_couplings: coupling bound must be nonnegative");
  params.coupling_bound = coupling_bound;
  std::mt19937_64 rng(seed);
  for (auto& c : params.couplings) {
    c.bound = coupling_band_edge(params, c);
    c.strength = (2.0 * unit_uniform(rng) - 1.0) * c.bound;
  }
}

SystemModel build_transmon_array(const TransmonParams& params, double detuning_bound) {
  const int total = params.q * params.q;
  if (params.q < 1) throw std::invalid_argument("build_transmon_array: q must be at least 1");
  if (params.omega.rows() != total || params.intra.size() != total)
    throw std::invalid_argument("build_transmon_array: parameter arrays do not match q");
  if (!(detuning_bound > 0.0))
    throw std::invalid_argument("build_transmon_array: detuning bound must be positive");

  SystemModel model;
  model.platform = Platform::transmon_array;
  const Operator n_op = number_op();
  const Operator i2 = identity(2);
  const Operator sy = pauli_y();
  for (int k = 0; k < total; ++k) {
    SubsystemSpec sub;
    sub.name = "P" + std::to_string(k + 1);
    sub.qubit_labels = {sub.name + "a", sub.name + "b"};
    sub.dim = 4;
    sub.drift = (params.omega(k, 0) - params.bands.frame_freq) * tensor(n_op, i2) +
                (params.omega(k, 1) - params.bands.frame_freq) * tensor(i2, n_op) +
                params.intra(k) * tensor(sy, sy);
    sub.target = identity(4);
    sub.channels.push_back({sub.name + "_det1", tensor(n_op, i2), detuning_bound});
    sub.frame_generators = {tensor(n_op, i2), tensor(i2, n_op)};
    model.subsystems.push_back(std::move(sub));
  }
  for (const auto& c : params.couplings) {
    CrosstalkTerm term;
    term.k = c.k;
    term.j = c.j;
    term.structure = tensor(embed_site(sy, c.i, {2, 2}), embed_site(sy, c.l, {2, 2}));
    term.strength = c.strength;
    term.strength_bound = c.bound;
    model.crosstalk.push_back(std::move(term));
  }
  return model;
}

std::vector<std::pair<int, int>> distinct_crosstalk_pairs(const SystemModel& model) {
  std::set<std::pair<int, int>> pairs;
  for (const auto& term : model.crosstalk) pairs.emplace(term.k, term.j);
  return {pairs.begin(), pairs.end()};
}

PairSpace pair_space(const SystemModel& model, int k, int j) {
  const int L = model.n_subsystems();
  if (k < 0 || j <= k || j >= L)
    throw std::invalid_argument("pair_space: indices must satisfy 0 <= k < j < L");
  const auto& sk = model.subsystems[k];
  const auto& sj = model.subsystems[j];
  const Operator ik = identity(sk.dim);
  const Operator ij = identity(sj.dim);

  PairSpace ps;
  ps.k = k;
  ps.j = j;
  ps.d_pair = sk.dim * sj.dim;
  ps.n_channels_k = static_cast<int>(sk.channels.size());
  ps.drift = tensor(sk.drift, ij) + tensor(ik, sj.drift);
  ps.target = tensor(sk.target, sj.target);
  for (const auto& ch : sk.channels)
    ps.channels.push_back({ch.label, tensor(ch.generator, ij), ch.amplitude_bound});
  for (const auto& ch : sj.channels)
    ps.channels.push_back({ch.label, tensor(ik, ch.generator), ch.amplitude_bound});
  ps.crosstalk = Operator::Zero(ps.d_pair, ps.d_pair);
  for (const auto& term : model.crosstalk) {
    if (term.k != k || term.j != j) continue;
    if (term.structure.rows() != ps.d_pair)
      throw std::invalid_argument("pair_space: crosstalk structure dim mismatch");
    ps.crosstalk += term.strength * term.structure;
  }
  return ps;
}

SystemModel at_coupling_bounds(const SystemModel& model) {
  SystemModel out = model;
  for (auto& term : out.crosstalk)
    term.strength = std::copysign(term.strength_bound, term.strength);
  return out;
}

Operator assemble_full_slice(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                             int slice) {
  check_pulse_set(model, pulses);
  if (slice < 0 || slice >= pulses.front().n_slices())
    throw std::invalid_argument("assemble_full_slice: slice index out of range");
  const long long dim = model.full_dim_up_to(1LL << 24);
  if (dim < 0) throw DimCapError("assemble_full_slice: full dimension exceeds addressable range");

  std::vector<int> dims;
  dims.reserve(model.subsystems.size());
  for (const auto& sub : model.subsystems) dims.push_back(sub.dim);

  Operator H = Operator::Zero(dim, dim);
  for (std::size_t k = 0; k < model.subsystems.size(); ++k) {
    add_embedded_site(H, model.subsystems[k].drift, 1.0, static_cast<int>(k), dims);
    for (std::size_t c = 0; c < model.subsystems[k].channels.size(); ++c) {
      const double amp = pulses[k].amplitudes(slice, static_cast<int>(c));
      if (amp != 0.0)
        add_embedded_site(H, model.subsystems[k].channels[c].generator, amp, static_cast<int>(k),
                          dims);
    }
  }
  for (const auto& term : model.crosstalk) {
    if (term.strength != 0.0)
      add_embedded_two_site(H, term.structure, term.strength, term.k, term.j, dims);
  }
  return H;
}

SliceSchedule assemble_full(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                            long long dim_cap) {
  check_pulse_set(model, pulses);
  const long long dim = model.full_dim_up_to(dim_cap);
  if (dim < 0) {
    std::ostringstream msg;
    msg << "assemble_full: full dimension exceeds the cap " << dim_cap
        << "; use block evaluation instead";
    throw DimCapError(msg.str());
  }
  SliceSchedule schedule;
  schedule.total_time = pulses.front().total_time;
  const int n_slices = pulses.front().n_slices();
  schedule.generators.reserve(n_slices);
  for (int m = 0; m < n_slices; ++m)
    schedule.generators.push_back(assemble_full_slice(model, pulses, m));
  return schedule;
}

Operator full_target(const SystemModel& model) {
  Operator target = Operator::Identity(1, 1);
  for (const auto& sub : model.subsystems) target = tensor(target, sub.target);
  return target;
}

}  // namespace pargate
