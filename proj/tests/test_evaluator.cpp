#include "pargate/evaluator.hpp"

#include "pargate/geometric.hpp"
#include "pargate/grape.hpp"
#include "pargate/model.hpp"
#include "pargate/operators.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

using namespace pargate;

namespace {

PulseSequence random_pulse(int n_slices, int n_channels, double scale, double T,
                           std::uint64_t seed) {
  PulseSequence p;
  p.total_time = T;
  p.amplitudes.resize(n_slices, n_channels);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (int i = 0; i < n_slices; ++i)
    for (int c = 0; c < n_channels; ++c) p.amplitudes(i, c) = u(rng);
  return p;
}

std::vector<PulseSequence> random_set(const SystemModel& m, int n_slices, double scale, double T,
                                      std::uint64_t seed) {
  std::vector<PulseSequence> out;
  for (int k = 0; k < m.n_subsystems(); ++k)
    out.push_back(random_pulse(n_slices, static_cast<int>(m.subsystems[k].channels.size()), scale,
                               T, seed + static_cast<std::uint64_t>(k)));
  return out;
}

// Slice-by-slice propagation of the assembled generator, written directly so
// the evaluator has something independent to agree with.
Operator full_propagator(const SystemModel& m, const std::vector<PulseSequence>& pulses) {
  const long long dim = m.full_dim_up_to();
  Operator u = identity(static_cast<int>(dim));
  const double dt = pulses[0].dt();
  for (int s = 0; s < pulses[0].amplitudes.rows(); ++s)
    u = expm_hermitian(assemble_full_slice(m, pulses, s), dt) * u;
  return u;
}

}  // namespace

TEST_CASE("exact fidelity factorizes over subsystems at zero coupling") {
  SystemModel m = build_nv_chain(3, 0.0, 5.0);
  for (int k = 0; k < 3; ++k) m.subsystems[k].target = named_gate("ry_pi", 1);
  const std::vector<PulseSequence> pulses = random_set(m, 5, 2.0, 1.0, 3);

  const double f_full = exact_fidelity(m, pulses, full_target(m));
  double product = 1.0;
  for (int k = 0; k < 3; ++k)
    product *= trace_fidelity(subsystem_propagator(m.subsystems[k], pulses[k]),
                              m.subsystems[k].target);
  CHECK(f_full == doctest::Approx(product).epsilon(1e-12));

  // A nonzero coupling breaks the factorization, so the check has teeth.
  SystemModel coupled = build_nv_chain(3, 0.8, 5.0);
  for (int k = 0; k < 3; ++k) coupled.subsystems[k].target = named_gate("ry_pi", 1);
  CHECK(std::abs(exact_fidelity(coupled, pulses, full_target(coupled)) - product) > 1e-6);
}

TEST_CASE("repeat series equals direct powers of the composed gate") {
  SystemModel m = build_nv_chain(2, 0.4, 8.0);
  m.subsystems[0].target = named_gate("ry_pi", 1);
  m.subsystems[1].target = named_gate("ry_pi", 1);
  // Near-resonant rotations with a seeded kick: imperfect but not junk, so
  // the composed series stays in fit range.
  const PulseSequence base = primitive_pulse(std::numbers::pi, 0.5 * std::numbers::pi, 1.0, 6);
  const std::vector<PulseSequence> pulses = perturb_pulses(m, {base, base}, 0.05, 17);
  const Operator target = full_target(m);
  const std::vector<int> m_values{1, 2, 3, 5, 8, 13};

  const DecaySeries series = repeat_gate(m, pulses, target, m_values);
  REQUIRE(series.m_values == m_values);
  REQUIRE(series.fidelities.size() == m_values.size());

  const Operator u = full_propagator(m, pulses);
  Operator u_pow = identity(4), t_pow = identity(4);
  std::size_t at = 0;
  for (int rep = 1; rep <= m_values.back(); ++rep) {
    u_pow = u * u_pow;
    t_pow = target * t_pow;
    if (at < m_values.size() && m_values[at] == rep) {
      CHECK(series.fidelities[at] == doctest::Approx(trace_fidelity(u_pow, t_pow)).epsilon(1e-12));
      ++at;
    }
  }
  CHECK(at == m_values.size());
}

TEST_CASE("decay fits recover planted rates") {
  const std::vector<int> m{1, 2, 4, 8, 16, 32};

  std::vector<double> lin, expo;
  for (int mv : m) {
    lin.push_back(1.0 - 2.5e-3 * mv);
    expo.push_back(std::exp(-3.0e-3 * mv));
  }
  const DecayFit fl = fit_linear_through_origin(m, lin);
  CHECK(fl.rate == doctest::Approx(2.5e-3).epsilon(1e-12));
  CHECK(fl.ssr < 1e-24);
  const DecayFit fe = fit_exponential(m, expo);
  CHECK(fe.rate == doctest::Approx(3.0e-3).epsilon(1e-12));
  CHECK(fe.ssr < 1e-24);

  // The linear rate on an exponential series is a least-squares compromise,
  // computable by hand: rate = sum m (1 - F) / sum m^2.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    num += m[i] * (1.0 - expo[i]);
    den += static_cast<double>(m[i]) * m[i];
  }
  CHECK(fit_linear_through_origin(m, expo).rate == doctest::Approx(num / den).epsilon(1e-12));

  // Deep points are excluded from the exponential fit but still add residual.
  const std::vector<int> m2{1, 2, 4, 400};
  const std::vector<double> f2{std::exp(-3e-3), std::exp(-6e-3), std::exp(-12e-3), 0.05};
  const DecayFit deep = fit_exponential(m2, f2);
  CHECK(deep.rate == doctest::Approx(3.0e-3).epsilon(1e-9));
  CHECK(deep.ssr > 1e-6);

  CHECK_THROWS(fit_exponential({1, 2}, {0.1, 0.05}));
}

TEST_CASE("coupling sweep scores fixed pulses against their own targets") {
  const auto family = [](double g, std::uint64_t) { return build_nv_chain(2, g, 5.0); };
  const SystemModel at_zero = family(0.0, 0);
  const std::vector<PulseSequence> robust = random_set(at_zero, 5, 2.0, 1.0, 21);
  const std::vector<PulseSequence> primitive = random_set(at_zero, 5, 2.0, 1.0, 35);
  const Operator target = full_target(at_zero);
  const std::vector<double> axis{0.0, 0.2, 0.5};
  const std::vector<std::uint64_t> seeds{4, 5, 6};

  const SweepResult sw = coupling_sweep(family, robust, primitive, target, target, axis, seeds, 1);
  REQUIRE(sw.axis == axis);
  REQUIRE(sw.f_robust.size() == axis.size());
  for (std::size_t i = 0; i < axis.size(); ++i) {
    const SystemModel at = family(axis[i], seeds[0]);
    CHECK(sw.f_robust[i] == doctest::Approx(exact_fidelity(at, robust, target)).epsilon(1e-12));
    CHECK(sw.f_primitive[i] ==
          doctest::Approx(exact_fidelity(at, primitive, target)).epsilon(1e-12));
    // This family ignores the seed, so the spread collapses (the mean can
    // still differ from the min in the last bit).
    CHECK(sw.robust_spread[i] == 0.0);
    CHECK(sw.primitive_spread[i] == 0.0);
    CHECK(sw.robust_min[i] == doctest::Approx(sw.f_robust[i]).epsilon(1e-15));
  }

  const SweepResult sw3 = coupling_sweep(family, robust, primitive, target, target, axis, seeds, 3);
  CHECK(sw.f_robust == sw3.f_robust);
  CHECK(sw.f_primitive == sw3.f_primitive);
  CHECK(sw.robust_spread == sw3.robust_spread);
}

TEST_CASE("block evaluation tiles the lattice") {
  const TransmonParams params = sample_transmon_params(3, 2.0 * std::numbers::pi * 1.5e6, 91);
  const SystemModel m = build_transmon_array(params, 2.0 * std::numbers::pi * 20e6);
  REQUIRE(m.n_subsystems() == 9);
  const std::vector<PulseSequence> pulses = random_set(m, 4, 2.0 * std::numbers::pi * 4e6, 2e-7, 55);
  const std::vector<Operator> targets(9, named_gate("cz", 2));

  const BlockFidelityReport rep = block_fidelity(m, pulses, targets, 3, 1);
  REQUIRE(rep.tiles.size() == 4);
  CHECK(rep.tiles[0] == std::vector<int>{0, 1, 3, 4});
  CHECK(rep.tiles[1] == std::vector<int>{2, 5});
  CHECK(rep.tiles[2] == std::vector<int>{6, 7});
  CHECK(rep.tiles[3] == std::vector<int>{8});
  std::vector<int> seen;
  for (const auto& t : rep.tiles) seen.insert(seen.end(), t.begin(), t.end());
  std::sort(seen.begin(), seen.end());
  std::vector<int> want(9);
  std::iota(want.begin(), want.end(), 0);
  CHECK(seen == want);
  CHECK(rep.f4_min == *std::min_element(rep.fidelities.begin(), rep.fidelities.end()));
  const double mean =
      std::accumulate(rep.fidelities.begin(), rep.fidelities.end(), 0.0) / 4.0;
  CHECK(rep.f4_mean == doctest::Approx(mean).epsilon(1e-14));

  const BlockFidelityReport rep3 = block_fidelity(m, pulses, targets, 3, 3);
  CHECK(rep.fidelities == rep3.fidelities);

  // With the couplings severed every tile factorizes into its members.
  SystemModel cut = m;
  for (CrosstalkTerm& t : cut.crosstalk) t.strength = 0.0;
  const BlockFidelityReport free_rep = block_fidelity(cut, pulses, targets, 3, 1);
  for (std::size_t i = 0; i < free_rep.tiles.size(); ++i) {
    double product = 1.0;
    for (int k : free_rep.tiles[i])
      product *= trace_fidelity(subsystem_propagator(cut.subsystems[k], pulses[k]), targets[k]);
    CHECK(free_rep.fidelities[i] == doctest::Approx(product).epsilon(1e-11));
  }
}

TEST_CASE("single tile block evaluation equals the full space") {
  const TransmonParams params = sample_transmon_params(2, 2.0 * std::numbers::pi * 1.5e6, 7);
  const SystemModel m = build_transmon_array(params, 2.0 * std::numbers::pi * 20e6);
  REQUIRE(m.n_subsystems() == 4);
  const std::vector<PulseSequence> pulses = random_set(m, 4, 2.0 * std::numbers::pi * 4e6, 2e-7, 19);
  const std::vector<Operator> targets(4, named_gate("cz", 2));

  const BlockFidelityReport rep = block_fidelity(m, pulses, targets, 2, 1);
  REQUIRE(rep.tiles.size() == 1);
  REQUIRE(rep.tiles[0] == std::vector<int>{0, 1, 2, 3});

  Operator target = identity(1);
  for (int k = 0; k < 4; ++k) target = tensor(target, targets[k]);
  CHECK(rep.fidelities[0] == doctest::Approx(exact_fidelity(m, pulses, target)).epsilon(1e-12));
  CHECK(rep.f4_min == rep.fidelities[0]);
  CHECK(rep.f4_mean == rep.fidelities[0]);
}

TEST_CASE("evaluator refuses dimensions past the cap") {
  SystemModel m = build_nv_chain(2, 0.3, 5.0);
  const std::vector<PulseSequence> pulses = random_set(m, 4, 1.0, 1.0, 2);
  CHECK_THROWS_AS(exact_fidelity(m, pulses, full_target(m), 2), DimCapError);
  CHECK_THROWS_AS(repeat_gate(m, pulses, full_target(m), {1, 2}, 2), DimCapError);
}

TEST_CASE("parallel for fills every slot exactly once for any worker count") {
  for (int workers : {1, 2, 5}) {
    std::vector<int> slots(17, -1);
    parallel_for(17, workers, [&](int i) { slots[i] = i * i; });
    for (int i = 0; i < 17; ++i) CHECK(slots[i] == i * i);
  }
  parallel_for(0, 3, [&](int) { CHECK(false); });
}
