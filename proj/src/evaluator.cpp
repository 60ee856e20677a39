#include "pargate/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace pargate {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  w = std::clamp(w, 1, n);
  if (w == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> bail{false};
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&] {
      while (!bail.load()) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          bail.store(true);
          return;
        }
      }
    });
  for (std::thread& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

double exact_fidelity(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                      const Operator& target, long long dim_cap) {
  const long long dim = model.full_dim_up_to(dim_cap);
  if (dim < 0)
    throw DimCapError("full dimension exceeds the cap (" + std::to_string(dim_cap) +
                      "); use block evaluation instead");
  if (pulses.empty()) throw std::invalid_argument("no pulses to evaluate");
  if (target.rows() != dim || target.cols() != dim)
    throw std::invalid_argument("target dimension does not match the full space");
  const int n = pulses[0].n_slices();
  const double dt = pulses[0].dt();
  Operator u = identity(static_cast<int>(dim));
  for (int m = 0; m < n; ++m)
    u = expm_hermitian(assemble_full_slice(model, pulses, m), dt) * u;
  return trace_fidelity(u, target);
}

DecayFit fit_linear_through_origin(const std::vector<int>& m, const std::vector<double>& f) {
  if (m.size() != f.size() || m.empty())
    throw std::invalid_argument("decay fit needs matching, nonempty samples");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    num += static_cast<double>(m[i]) * (1.0 - f[i]);
    den += static_cast<double>(m[i]) * static_cast<double>(m[i]);
  }
  DecayFit fit;
  fit.rate = den > 0.0 ? num / den : 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double r = f[i] - (1.0 - fit.rate * m[i]);
    fit.ssr += r * r;
  }
  return fit;
}

DecayFit fit_exponential(const std::vector<int>& m, const std::vector<double>& f) {
  if (m.size() != f.size() || m.empty())
    throw std::invalid_argument("decay fit needs matching, nonempty samples");
  double num = 0.0, den = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (f[i] < 0.2) continue;
    num += static_cast<double>(m[i]) * std::log(f[i]);
    den += static_cast<double>(m[i]) * static_cast<double>(m[i]);
    ++used;
  }
  if (used == 0) throw std::invalid_argument("no decay points with F >= 0.2 to fit");
  DecayFit fit;
  fit.rate = den > 0.0 ? -num / den : 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double r = f[i] - std::exp(-fit.rate * m[i]);
    fit.ssr += r * r;
  }
  return fit;
}

DecaySeries repeat_gate(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                        const Operator& target, const std::vector<int>& m_values,
                        long long dim_cap) {
  if (m_values.empty()) throw std::invalid_argument("empty repetition list");
  for (int m : m_values)
    if (m < 1) throw std::invalid_argument("repetition counts must be >= 1");
  const long long dim = model.full_dim_up_to(dim_cap);
  if (dim < 0)
    throw DimCapError("full dimension exceeds the cap (" + std::to_string(dim_cap) +
                      "); use block evaluation instead");
  if (pulses.empty()) throw std::invalid_argument("no pulses to evaluate");
  if (target.rows() != dim || target.cols() != dim)
    throw std::invalid_argument("target dimension does not match the full space");

  const int n = pulses[0].n_slices();
  const double dt = pulses[0].dt();
  Operator u = identity(static_cast<int>(dim));
  for (int m = 0; m < n; ++m)
    u = expm_hermitian(assemble_full_slice(model, pulses, m), dt) * u;

  const int m_max = *std::max_element(m_values.begin(), m_values.end());
  std::vector<char> wanted(m_max + 1, 0);
  for (int m : m_values) wanted[m] = 1;
  std::vector<double> f_at(m_max + 1, 0.0);
  Operator upow = identity(static_cast<int>(dim));
  Operator tpow = identity(static_cast<int>(dim));
  for (int p = 1; p <= m_max; ++p) {
    upow = u * upow;
    tpow = target * tpow;
    if (wanted[p]) f_at[p] = trace_fidelity(upow, tpow);
  }

  DecaySeries series;
  series.m_values = m_values;
  series.fidelities.reserve(m_values.size());
  for (int m : m_values) series.fidelities.push_back(f_at[m]);
  series.linear = fit_linear_through_origin(series.m_values, series.fidelities);
  series.exponential = fit_exponential(series.m_values, series.fidelities);

  std::vector<std::pair<int, double>> ordered;
  ordered.reserve(m_values.size());
  for (std::size_t i = 0; i < series.m_values.size(); ++i)
    ordered.emplace_back(series.m_values[i], series.fidelities[i]);
  std::sort(ordered.begin(), ordered.end());
  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i].second > ordered[i - 1].second + 1e-9) ++series.monotonicity_violations;
  return series;
}

SweepResult coupling_sweep(const ModelFamily& family, const std::vector<PulseSequence>& robust,
                           const std::vector<PulseSequence>& primitive,
                           const Operator& robust_target, const Operator& primitive_target,
                           const std::vector<double>& axis,
                           const std::vector<std::uint64_t>& seeds, int workers,
                           long long dim_cap) {
  if (!family) throw std::invalid_argument("empty model family");
  if (axis.empty()) throw std::invalid_argument("empty sweep axis");
  const std::vector<std::uint64_t> seed_list =
      seeds.empty() ? std::vector<std::uint64_t>{0} : seeds;
  const int na = static_cast<int>(axis.size());
  const int ns = static_cast<int>(seed_list.size());

  std::vector<double> fr(static_cast<std::size_t>(na) * ns);
  std::vector<double> fp(static_cast<std::size_t>(na) * ns);
  parallel_for(na * ns, workers, [&](int i) {
    const int ia = i / ns;
    const int is = i % ns;
    const SystemModel m = family(axis[ia], seed_list[is]);
    fr[i] = exact_fidelity(m, robust, robust_target, dim_cap);
    fp[i] = exact_fidelity(m, primitive, primitive_target, dim_cap);
  });

  SweepResult out;
  out.axis = axis;
  out.seeds = seed_list;
  out.f_robust.resize(na);
  out.f_primitive.resize(na);
  out.robust_spread.resize(na);
  out.primitive_spread.resize(na);
  out.robust_min.resize(na);
  out.primitive_min.resize(na);
  for (int ia = 0; ia < na; ++ia) {
    double sr = 0.0, sp = 0.0;
    double r_lo = 1.0, r_hi = 0.0, p_lo = 1.0, p_hi = 0.0;
    for (int is = 0; is < ns; ++is) {
      const double r = fr[static_cast<std::size_t>(ia) * ns + is];
      const double p = fp[static_cast<std::size_t>(ia) * ns + is];
      sr += r;
      sp += p;
      r_lo = std::min(r_lo, r);
      r_hi = std::max(r_hi, r);
      p_lo = std::min(p_lo, p);
      p_hi = std::max(p_hi, p);
    }
    out.f_robust[ia] = sr / ns;
    out.f_primitive[ia] = sp / ns;
    out.robust_spread[ia] = r_hi - r_lo;
    out.primitive_spread[ia] = p_hi - p_lo;
    out.robust_min[ia] = r_lo;
    out.primitive_min[ia] = p_lo;
  }
  return out;
}

BlockFidelityReport block_fidelity(const SystemModel& model,
                                   const std::vector<PulseSequence>& pulses,
                                   const std::vector<Operator>& targets, int q, int workers,
                                   long long dim_cap) {
  if (q < 2) throw std::invalid_argument("block evaluation needs q >= 2");
  if (model.n_subsystems() != q * q)
    throw std::invalid_argument("model does not hold a " + std::to_string(q) + " x " +
                                std::to_string(q) + " subsystem grid");
  if (pulses.size() != model.subsystems.size())
    throw std::invalid_argument("expected one pulse sequence per subsystem");
  if (targets.size() != model.subsystems.size())
    throw std::invalid_argument("expected one target per subsystem");

  BlockFidelityReport rep;
  rep.q = q;
  const int half = (q + 1) / 2;
  for (int tr = 0; tr < half; ++tr)
    for (int tc = 0; tc < half; ++tc) {
      std::vector<int> members;
      for (int r = 2 * tr; r < std::min(2 * tr + 2, q); ++r)
        for (int c = 2 * tc; c < std::min(2 * tc + 2, q); ++c) members.push_back(r * q + c);
      rep.tiles.push_back(std::move(members));
    }

  rep.fidelities.assign(rep.tiles.size(), 0.0);
  parallel_for(static_cast<int>(rep.tiles.size()), workers, [&](int i) {
    const std::vector<int>& members = rep.tiles[i];
    SystemModel tile;
    tile.platform = model.platform;
    std::vector<int> where(model.subsystems.size(), -1);
    for (std::size_t s = 0; s < members.size(); ++s) {
      where[members[s]] = static_cast<int>(s);
      tile.subsystems.push_back(model.subsystems[members[s]]);
    }
    for (const CrosstalkTerm& term : model.crosstalk) {
      if (where[term.k] < 0 || where[term.j] < 0) continue;
      CrosstalkTerm t = term;
      t.k = where[term.k];
      t.j = where[term.j];
      tile.crosstalk.push_back(std::move(t));
    }
    std::vector<PulseSequence> tile_pulses;
    Operator tile_target = identity(1);
    for (int s : members) {
      tile_pulses.push_back(pulses[s]);
      tile_target = tensor(tile_target, targets[s]);
    }
    rep.fidelities[i] = exact_fidelity(tile, tile_pulses, tile_target, dim_cap);
  });

  rep.f4_min = *std::min_element(rep.fidelities.begin(), rep.fidelities.end());
  rep.f4_mean = std::accumulate(rep.fidelities.begin(), rep.fidelities.end(), 0.0) /
                static_cast<double>(rep.fidelities.size());
  return rep;
}

}  // namespace pargate
