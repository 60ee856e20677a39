#include "pargate/grape.hpp"

#include "pargate/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pargate {

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_inputs(const SystemModel& model, const std::vector<PulseSequence>& pulses) {
  if (pulses.size() != model.subsystems.size())
    throw std::invalid_argument("expected " + std::to_string(model.subsystems.size()) +
                                " pulse sequences, got " + std::to_string(pulses.size()));
  for (std::size_t k = 0; k < pulses.size(); ++k) {
    const SubsystemSpec& spec = model.subsystems[k];
    const PulseSequence& p = pulses[k];
    if (p.n_slices() <= 0 || p.total_time <= 0.0)
      throw std::invalid_argument("empty pulse for subsystem " + spec.name);
    if (p.n_channels() != static_cast<int>(spec.channels.size()))
      throw std::invalid_argument("pulse for subsystem " + spec.name + " has " +
                                  std::to_string(p.n_channels()) + " channels, expected " +
                                  std::to_string(spec.channels.size()));
    if (p.n_slices() != pulses[0].n_slices() ||
        std::abs(p.total_time - pulses[0].total_time) > 1e-12 * pulses[0].total_time)
      throw std::invalid_argument("all subsystem pulses must share one slice grid");
  }
}

void require_binary_diagonal(const Operator& g, int dim, const std::string& what) {
  require_hermitian(g, what);
  if (g.rows() != dim)
    throw std::invalid_argument(what + " does not match the subsystem dimension");
  const Operator diag_part = Operator(g.diagonal().asDiagonal());
  if ((g - diag_part).norm() > 1e-10 * std::max(1.0, g.norm()))
    throw std::invalid_argument(what + " must be diagonal in the computational basis");
  for (int s = 0; s < dim; ++s) {
    const double v = std::real(g(s, s));
    if (std::abs(v) > 1e-9 && std::abs(v - 1.0) > 1e-9)
      throw std::invalid_argument(what + " must have a 0/1 diagonal");
  }
}

int frame_bit(const Operator& g, int s) { return std::real(g(s, s)) > 0.5 ? 1 : 0; }

struct EvalOptions {
  bool want_gradient = false;
  // Pairs with zero weight contribute nothing to f or its gradient, so their
  // propagation can be skipped entirely on optimizer-internal evaluations.
  bool skip_zero_weight_pairs = false;
  // Parallelism across subsystems, pairs, and (for a single heavy pair)
  // slices.  Work is slot-written and aggregated in fixed order, so results
  // are bitwise identical for any worker count.
  int workers = 1;
};

struct Evaluation {
  ObjectiveReport report;
  std::vector<Eigen::MatrixXd> grad;
};

Evaluation evaluate(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                    const std::vector<double>& lambdas, const EvalOptions& opt) {
  check_inputs(model, pulses);
  const std::vector<std::pair<int, int>> pairs = distinct_crosstalk_pairs(model);
  if (lambdas.size() != pairs.size())
    throw std::invalid_argument("expected one weight per crosstalk pair (" +
                                std::to_string(pairs.size()) + "), got " +
                                std::to_string(lambdas.size()));

  const int n_sub = model.n_subsystems();
  Evaluation out;
  out.report.pairs = pairs;
  out.report.lambdas = lambdas;
  out.report.f_sub.resize(n_sub);
  out.report.f_pairs.assign(pairs.size(), 0.0);

  std::vector<Eigen::MatrixXd> dfsub;
  if (opt.want_gradient) {
    out.grad.reserve(n_sub);
    dfsub.reserve(n_sub);
    for (const PulseSequence& p : pulses) {
      out.grad.emplace_back(Eigen::MatrixXd::Zero(p.n_slices(), p.n_channels()));
      dfsub.emplace_back(Eigen::MatrixXd::Zero(p.n_slices(), p.n_channels()));
    }
  }

  // Subsystem fidelities f_k = |tau_k|^2 / d_k^2 with tau at the calibrated
  // frame optimum.  The frame angles are themselves maximizers, so d f_k / du
  // at fixed angles is the total derivative (envelope theorem); each slice
  // derivative is a coupling block of the channel generator.
  parallel_for(n_sub, opt.workers, [&](int k) {
    const SubsystemSpec& spec = model.subsystems[k];
    const PulseSequence& pulse = pulses[k];
    const int d = spec.dim;
    const int n = pulse.n_slices();
    const int n_ch = pulse.n_channels();
    const double dt = pulse.dt();

    std::vector<HermitianExp> exps;
    exps.reserve(n);
    std::vector<Operator> prefix(n + 1);
    prefix[0] = identity(d);
    for (int m = 0; m < n; ++m) {
      Operator h = spec.drift;
      for (int c = 0; c < n_ch; ++c) h += pulse.amplitudes(m, c) * spec.channels[c].generator;
      exps.emplace_back(h, dt);
      prefix[m + 1] = exps[m].unitary() * prefix[m];
    }
    const FrameFit fit = calibrate_frames(spec, prefix[n]);
    const double dd = static_cast<double>(d) * static_cast<double>(d);
    out.report.f_sub[k] = std::norm(fit.tau) / dd;

    if (opt.want_gradient) {
      const Operator tgt = dressed_target(spec, fit);
      std::vector<Operator> suffix(n + 2);
      suffix[n + 1] = identity(d);
      for (int m = n; m >= 1; --m) suffix[m] = suffix[m + 1] * exps[m - 1].unitary();
      for (int m = 1; m <= n; ++m) {
        const HermitianExp& e = exps[m - 1];
        const Operator b = e.to_eigenbasis(prefix[m - 1] * tgt.adjoint() * suffix[m + 1]);
        const Operator bphi = e.phi1().cwiseProduct(b.transpose());
        // sum(to_eigenbasis(G) o K) = Tr(G V K^T V^dag): one back-transform
        // replaces a basis change per channel.
        const Operator back = e.from_eigenbasis(bphi.transpose()).transpose();
        for (int c = 0; c < n_ch; ++c) {
          const Complex dtau = spec.channels[c].generator.cwiseProduct(back).sum();
          dfsub[k](m - 1, c) = 2.0 * std::real(std::conj(fit.tau) * dtau) / dd;
        }
      }
    }
  });

  // Pair deviations.  Forward pass accumulates the Van Loan prefixes
  // (UP_m, DP_m); the backward pass needs the matching suffixes, after which
  // the derivative of ||D||^2 splits into a first-order coupling block per
  // slice unitary and a second-order (three-node divided difference) term per
  // slice deviation block.  Work splits across pairs when there are several
  // and across slices inside a single heavy pair; per-pair gradients land in
  // their own buffers and are folded in pair order afterwards.
  std::vector<int> active;
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (!(opt.skip_zero_weight_pairs && lambdas[p] == 0.0)) active.push_back(static_cast<int>(p));

  struct PairOut {
    double f_pair = 0.0;
    bool has_grad = false;
    Eigen::MatrixXd gk, gj;  // d f_pair / du, before the -lambda weight
  };
  std::vector<PairOut> pouts(active.size());
  const int outer_workers = active.size() > 1 ? opt.workers : 1;
  const int slice_workers = active.size() == 1 ? opt.workers : 1;

  parallel_for(static_cast<int>(active.size()), outer_workers, [&](int idx) {
    const std::size_t p = static_cast<std::size_t>(active[idx]);
    PairOut& po = pouts[idx];
    const int k = pairs[p].first;
    const int j = pairs[p].second;
    const PairSpace ps = pair_space(model, k, j);
    const SliceSchedule sched = pair_schedule(ps, pulses[k], pulses[j]);
    const int d = ps.d_pair;
    const int n = sched.n_slices();
    const double dt = sched.dt();

    std::vector<std::optional<HermitianExp>> exps(n);
    std::vector<Operator> dblocks(n);
    parallel_for(n, slice_workers, [&](int m) {
      exps[m].emplace(sched.generators[m], dt);
      dblocks[m] = exps[m]->coupling_block(ps.crosstalk);
    });

    std::vector<Operator> up(n + 1), dp(n + 1);
    up[0] = identity(d);
    dp[0] = Operator::Zero(d, d);
    for (int m = 0; m < n; ++m) {
      dp[m + 1] = exps[m]->unitary() * dp[m] + dblocks[m] * up[m];
      up[m + 1] = exps[m]->unitary() * up[m];
    }
    po.f_pair = dp[n].squaredNorm() / static_cast<double>(d);

    if (!opt.want_gradient || lambdas[p] == 0.0) return;

    std::vector<Operator> us(n + 2), ds(n + 2);
    us[n + 1] = identity(d);
    ds[n + 1] = Operator::Zero(d, d);
    for (int m = n; m >= 1; --m) {
      us[m] = us[m + 1] * exps[m - 1]->unitary();
      ds[m] = ds[m + 1] * exps[m - 1]->unitary() + us[m + 1] * dblocks[m - 1];
    }
    const Operator ddag = dp[n].adjoint();
    po.gk = Eigen::MatrixXd::Zero(n, ps.n_channels_k);
    po.gj = Eigen::MatrixXd::Zero(n, static_cast<int>(ps.channels.size()) - ps.n_channels_k);
    po.has_grad = true;

    parallel_for(n, slice_workers, [&](int mi) {
      const int m = mi + 1;
      const HermitianExp& e = *exps[m - 1];
      const Operator w_u = ddag * us[m + 1];
      const Operator a1 = e.to_eigenbasis(dp[m - 1] * w_u + up[m - 1] * (ddag * ds[m + 1]));
      const Operator a2 = e.to_eigenbasis(up[m - 1] * w_u);
      const Operator x = e.to_eigenbasis(ps.crosstalk);
      const Operator xt = x.transpose();
      const Eigen::VectorXd& ev = e.evals();
      const Operator& p1 = e.phi1();
      const double adt = std::abs(dt);

      // Tr(A2 dD_m) = sum_bc G[b,c] T1[b,c] + sum_ab G[a,b] T2[a,b] with the
      // channel generator G pulled out of the triple contraction.  The second
      // divided differences are built one fixed node a at a time: separated
      // triples reduce to two phi1 entries and a divide, only near-degenerate
      // ones fall back to the centered series.  Both results match what
      // expm_divdiff2 would return for the same nodes.
      Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> y(d, d);
      Operator t1t = Operator::Zero(d, d);
      Operator t2t = Operator::Zero(d, d);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b)
          for (int c = b; c < d; ++c) {
            int lo = a, mid = b, hi = c;
            if (ev(lo) > ev(mid)) std::swap(lo, mid);
            if (ev(mid) > ev(hi)) std::swap(mid, hi);
            if (ev(lo) > ev(mid)) std::swap(lo, mid);
            const double span = ev(hi) - ev(lo);
            const Complex w = span * adt > 0.1
                                  ? (p1(hi, mid) - p1(mid, lo)) * (1.0 / span)
                                  : expm_divdiff2(ev(lo), ev(mid), ev(hi), dt);
            y(b, c) = w;
            y(c, b) = w;
          }
        const auto r = a2.col(a);
        for (int b = 0; b < d; ++b) {
          t1t.col(b) += x(a, b) * y.row(b).transpose().cwiseProduct(r);
          t2t(b, a) = xt.col(b).cwiseProduct(r).cwiseProduct(y.row(b).transpose()).sum();
        }
      }

      // kernel = phi1 o A1^T + T1 + T2, assembled directly in transposed form.
      const Operator kernel_t = p1.transpose().cwiseProduct(a1) + t1t + t2t;
      // sum(to_eigenbasis(G) o K) = Tr(G V K^T V^dag): one back-transform
      // replaces a basis change per channel.
      const Operator back = e.from_eigenbasis(kernel_t).transpose();
      for (int c = 0; c < static_cast<int>(ps.channels.size()); ++c) {
        const double dfp = 2.0 * std::real(ps.channels[c].generator.cwiseProduct(back).sum()) /
                           static_cast<double>(d);
        if (c < ps.n_channels_k)
          po.gk(m - 1, c) = dfp;
        else
          po.gj(m - 1, c - ps.n_channels_k) = dfp;
      }
    });
  });

  for (std::size_t idx = 0; idx < active.size(); ++idx) {
    const std::size_t p = static_cast<std::size_t>(active[idx]);
    out.report.f_pairs[p] = pouts[idx].f_pair;
    if (pouts[idx].has_grad) {
      out.grad[pairs[p].first] -= lambdas[p] * pouts[idx].gk;
      out.grad[pairs[p].second] -= lambdas[p] * pouts[idx].gj;
    }
  }

  std::vector<double> pre(n_sub + 1, 1.0), suf(n_sub + 1, 1.0);
  for (int k = 0; k < n_sub; ++k) pre[k + 1] = pre[k] * out.report.f_sub[k];
  for (int k = n_sub - 1; k >= 0; --k) suf[k] = suf[k + 1] * out.report.f_sub[k];
  out.report.f0 = pre[n_sub];
  double f = out.report.f0;
  for (std::size_t p = 0; p < pairs.size(); ++p) f -= lambdas[p] * out.report.f_pairs[p];
  out.report.f = f;
  if (opt.want_gradient)
    for (int k = 0; k < n_sub; ++k) out.grad[k] += (pre[k] * suf[k + 1]) * dfsub[k];

  return out;
}

// ---- flat parameter vector --------------------------------------------------

int flat_size(const std::vector<PulseSequence>& pulses) {
  int total = 0;
  for (const PulseSequence& p : pulses) total += p.n_slices() * p.n_channels();
  return total;
}

void flatten(const std::vector<PulseSequence>& pulses, Eigen::VectorXd& x) {
  int at = 0;
  for (const PulseSequence& p : pulses)
    for (int m = 0; m < p.n_slices(); ++m)
      for (int c = 0; c < p.n_channels(); ++c) x(at++) = p.amplitudes(m, c);
}

void unflatten(const Eigen::VectorXd& x, std::vector<PulseSequence>& pulses) {
  int at = 0;
  for (PulseSequence& p : pulses)
    for (int m = 0; m < p.n_slices(); ++m)
      for (int c = 0; c < p.n_channels(); ++c) p.amplitudes(m, c) = x(at++);
}

Eigen::VectorXd flatten_grads(const std::vector<Eigen::MatrixXd>& grads, int total) {
  Eigen::VectorXd g(total);
  int at = 0;
  for (const Eigen::MatrixXd& gm : grads)
    for (int m = 0; m < gm.rows(); ++m)
      for (int c = 0; c < gm.cols(); ++c) g(at++) = gm(m, c);
  return g;
}

Eigen::VectorXd bounds_vector(const SystemModel& model, const std::vector<PulseSequence>& pulses) {
  Eigen::VectorXd b(flat_size(pulses));
  int at = 0;
  for (std::size_t k = 0; k < pulses.size(); ++k)
    for (int m = 0; m < pulses[k].n_slices(); ++m)
      for (int c = 0; c < pulses[k].n_channels(); ++c)
        b(at++) = model.subsystems[k].channels[c].amplitude_bound;
  return b;
}

// ---- limited-memory quasi-Newton pieces -------------------------------------

struct CurvaturePair {
  Eigen::VectorXd s, y;  // on phi = -f
  double rho = 0.0;
};

Eigen::VectorXd two_loop(const Eigen::VectorXd& grad_phi, const std::deque<CurvaturePair>& mem) {
  Eigen::VectorXd q = grad_phi;
  std::vector<double> alpha(mem.size());
  for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
    alpha[i] = mem[i].rho * mem[i].s.dot(q);
    q -= alpha[i] * mem[i].y;
  }
  if (!mem.empty()) q *= mem.back().s.dot(mem.back().y) / mem.back().y.squaredNorm();
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * mem[i].y.dot(q);
    q += (alpha[i] - beta) * mem[i].s;
  }
  return -q;
}

}  // namespace

double ObjectiveReport::max_f_pair() const {
  double m = 0.0;
  for (double v : f_pairs) m = std::max(m, v);
  return m;
}

Operator subsystem_propagator(const SubsystemSpec& spec, const PulseSequence& pulse) {
  if (pulse.n_channels() != static_cast<int>(spec.channels.size()))
    throw std::invalid_argument("pulse for subsystem " + spec.name + " has " +
                                std::to_string(pulse.n_channels()) + " channels, expected " +
                                std::to_string(spec.channels.size()));
  const int n = pulse.n_slices();
  const double dt = pulse.dt();
  Operator u = identity(spec.dim);
  for (int m = 0; m < n; ++m) {
    Operator h = spec.drift;
    for (int c = 0; c < pulse.n_channels(); ++c)
      h += pulse.amplitudes(m, c) * spec.channels[c].generator;
    u = expm_hermitian(h, dt) * u;
  }
  return u;
}

FrameFit calibrate_frames(const SubsystemSpec& spec, const Operator& u_final) {
  require_square(u_final, "subsystem propagator");
  if (spec.target.rows() != u_final.rows())
    throw std::invalid_argument("propagator does not match the target dimension for subsystem " +
                                spec.name);
  FrameFit fit;
  if (spec.frame_generators.empty()) {
    fit.tau = (u_final * spec.target.adjoint()).trace();
    return fit;
  }
  if (spec.frame_generators.size() != 2)
    throw std::invalid_argument("frame calibration supports exactly two generators (subsystem " +
                                spec.name + ")");
  const int d = static_cast<int>(u_final.rows());
  for (int g = 0; g < 2; ++g)
    require_binary_diagonal(spec.frame_generators[g], d,
                            "frame generator of subsystem " + spec.name);

  // tau(a1, a2) = Tr(exp(-i a1 G1) exp(-i a2 G2) U target^dag) collapses onto
  // the four diagonal bit patterns: tau = a00 + x a10 + y a01 + x y a11 with
  // x = exp(-i a1), y = exp(-i a2).  The inner max over |y| = 1 is exact,
  // leaving h(a1) = |a00 + x a10| + |a01 + x a11| for a scalar search.
  const Eigen::VectorXcd m_diag = (u_final * spec.target.adjoint()).diagonal();
  Complex a[2][2] = {};
  for (int s = 0; s < d; ++s)
    a[frame_bit(spec.frame_generators[0], s)][frame_bit(spec.frame_generators[1], s)] +=
        m_diag(s);

  const auto h = [&a](double angle) {
    const Complex x = std::polar(1.0, -angle);
    return std::abs(a[0][0] + x * a[1][0]) + std::abs(a[0][1] + x * a[1][1]);
  };

  const double two_pi = 2.0 * std::numbers::pi;
  const int n_grid = 4096;
  double best = 0.0, best_val = -1.0;
  for (int i = 0; i < n_grid; ++i) {
    const double angle = two_pi * i / n_grid;
    const double v = h(angle);
    if (v > best_val) {
      best_val = v;
      best = angle;
    }
  }
  double lo = best - two_pi / n_grid;
  double hi = best + two_pi / n_grid;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double h1 = h(x1), h2 = h(x2);
  while (hi - lo > 1e-14) {
    if (h1 < h2) {
      lo = x1;
      x1 = x2;
      h1 = h2;
      x2 = lo + invphi * (hi - lo);
      h2 = h(x2);
    } else {
      hi = x2;
      x2 = x1;
      h2 = h1;
      x1 = hi - invphi * (hi - lo);
      h1 = h(x1);
    }
  }
  const double alpha = 0.5 * (lo + hi);
  const Complex x = std::polar(1.0, -alpha);
  const Complex w0 = a[0][0] + x * a[1][0];
  const Complex w1 = a[0][1] + x * a[1][1];
  Complex y(1.0, 0.0);
  if (std::abs(w1) > 0.0) {
    const Complex ref = std::abs(w0) > 0.0 ? w0 / std::abs(w0) : Complex(1.0, 0.0);
    y = ref * std::conj(w1) / std::abs(w1);
  }
  fit.angles = {alpha, -std::arg(y)};
  fit.tau = w0 + y * w1;
  return fit;
}

Operator dressed_target(const SubsystemSpec& spec, const FrameFit& fit) {
  if (spec.frame_generators.empty()) return spec.target;
  if (fit.angles.size() != spec.frame_generators.size())
    throw std::invalid_argument("frame fit does not match the generators of subsystem " +
                                spec.name);
  const int d = static_cast<int>(spec.target.rows());
  Eigen::VectorXcd phase = Eigen::VectorXcd::Ones(d);
  for (std::size_t g = 0; g < spec.frame_generators.size(); ++g)
    for (int s = 0; s < d; ++s)
      phase(s) *= std::polar(1.0, fit.angles[g] * std::real(spec.frame_generators[g](s, s)));
  return phase.asDiagonal() * spec.target;
}

double subsystem_fidelity(const SubsystemSpec& spec, const PulseSequence& pulse) {
  const FrameFit fit = calibrate_frames(spec, subsystem_propagator(spec, pulse));
  const double d = static_cast<double>(spec.target.rows());
  return std::norm(fit.tau) / (d * d);
}

ObjectiveReport objective(const SystemModel& model, const std::vector<PulseSequence>& pulses,
                          const std::vector<double>& lambdas, int workers) {
  return evaluate(model, pulses, lambdas, EvalOptions{false, false, workers}).report;
}

std::vector<Eigen::MatrixXd> gradient(const SystemModel& model,
                                      const std::vector<PulseSequence>& pulses,
                                      const std::vector<double>& lambdas, int workers) {
  return evaluate(model, pulses, lambdas, EvalOptions{true, true, workers}).grad;
}

std::vector<double> lambda_schedule(const ObjectiveReport& report, const OptimizerConfig& config) {
  if (report.f_pairs.size() != report.lambdas.size())
    throw std::invalid_argument("objective report is missing pair values");
  std::vector<double> next = report.lambdas;
  for (std::size_t p = 0; p < next.size(); ++p) {
    if (report.f_pairs[p] <= config.pair_threshold) continue;
    next[p] = next[p] == 0.0 ? config.lambda_init
                             : std::min(next[p] * config.lambda_growth, config.lambda_cap);
  }
  return next;
}

std::vector<PulseSequence> perturb_pulses(const SystemModel& model,
                                          std::vector<PulseSequence> pulses, double relative_eps,
                                          std::uint64_t seed) {
  check_inputs(model, pulses);
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < pulses.size(); ++k) {
    Eigen::MatrixXd& amps = pulses[k].amplitudes;
    const std::vector<ControlChannel>& chans = model.subsystems[k].channels;
    for (int c = 0; c < amps.cols(); ++c) {
      const double peak = amps.rows() > 0 ? amps.col(c).cwiseAbs().maxCoeff() : 0.0;
      const double bound = chans[c].amplitude_bound;
      const double scale = relative_eps * (peak > 0.0 ? peak : 0.05 * bound);
      for (int m = 0; m < amps.rows(); ++m) {
        const double delta = scale * (2.0 * unit_uniform(rng) - 1.0);
        amps(m, c) = std::clamp(amps(m, c) + delta, -bound, bound);
      }
    }
  }
  return pulses;
}

OptimizeResult optimize(const SystemModel& model, std::vector<PulseSequence> initial,
                        const OptimizerConfig& config) {
  check_inputs(model, initial);
  if (config.max_iters < 1 || config.max_stages < 1 || config.lbfgs_memory < 1 ||
      config.backtrack <= 0.0 || config.backtrack >= 1.0 || config.max_line_steps < 1)
    throw std::invalid_argument("invalid optimizer configuration");
  const int total = flat_size(initial);
  if (total == 0) throw std::invalid_argument("nothing to optimize: no control amplitudes");

  const std::vector<std::pair<int, int>> pairs = distinct_crosstalk_pairs(model);
  std::vector<double> lambdas(pairs.size(), config.lambda_init);
  const Eigen::VectorXd bound = bounds_vector(model, initial);
  const bool clip_mode = config.bounds_mode == OptimizerConfig::Bounds::clip;

  Eigen::VectorXd x(total);
  flatten(initial, x);
  if (clip_mode) x = x.cwiseMax(-bound).cwiseMin(bound);
  std::vector<PulseSequence> work = initial;

  struct Point {
    double val = 0.0;  // objective plus any bound penalty
    ObjectiveReport rep;
    Eigen::VectorXd grad;
  };

  const auto eval_point = [&](const Eigen::VectorXd& xv, bool want_grad) {
    unflatten(xv, work);
    Evaluation ev = evaluate(model, work, lambdas, EvalOptions{want_grad, true, config.workers});
    Point pt;
    pt.val = ev.report.f;
    pt.rep = std::move(ev.report);
    if (want_grad) pt.grad = flatten_grads(ev.grad, total);
    if (!clip_mode && config.penalty_weight > 0.0) {
      for (int i = 0; i < total; ++i) {
        const double over = std::abs(xv(i)) - bound(i);
        if (over <= 0.0) continue;
        pt.val -= config.penalty_weight * over * over;
        if (want_grad)
          pt.grad(i) -= 2.0 * config.penalty_weight * over * (xv(i) > 0.0 ? 1.0 : -1.0);
      }
    }
    return pt;
  };

  OptimizeResult result;
  int global_iter = 0;
  bool done = false;

  for (int stage = 0; stage < config.max_stages && !done; ++stage) {
    std::deque<CurvaturePair> mem;
    Point cur = eval_point(x, true);
    bool stationary = false;

    const auto scaled_grad = [&]() { return cur.grad.cwiseAbs().cwiseProduct(bound).maxCoeff(); };
    result.trace.push_back({stage, global_iter, cur.rep.f, cur.rep.f0, cur.rep.max_f_pair(),
                            scaled_grad(), lambdas});

    // Line search along dir (an ascent direction); clipping is applied
    // before evaluating, and the Armijo test uses the post-clip step.  After
    // the first passing step the length is doubled while that keeps strictly
    // paying off: raw-gradient directions can be scaled far below the
    // amplitude bounds (flat regions reject curvature pairs, so no
    // quasi-Newton scaling is available there), and backtracking alone would
    // crawl through them in microscopic increments.
    const auto try_dir = [&](const Eigen::VectorXd& dir) {
      const auto clipped = [&](double t) {
        Eigen::VectorXd xt = x + t * dir;
        if (clip_mode) xt = xt.cwiseMax(-bound).cwiseMin(bound);
        return xt;
      };
      double t = 1.0;
      if (mem.empty()) {
        // A raw gradient has no natural scale (amplitudes are rad/s, the
        // gradient is per rad/s), so take the bounds as the scale: start with
        // the largest component at a few percent of its bound.
        const double dmax = dir.cwiseAbs().cwiseQuotient(bound).maxCoeff();
        if (dmax > 0.0) t = 0.05 / dmax;
      }
      int evals = 0;
      double t_ok = 0.0;
      double val_ok = 0.0;
      Eigen::VectorXd x_ok;
      for (; evals < config.max_line_steps; t *= config.backtrack) {
        ++evals;
        Eigen::VectorXd xt = clipped(t);
        const Eigen::VectorXd step = xt - x;
        if (step.cwiseAbs().maxCoeff() == 0.0) return false;  // pinned at the bounds
        const double ascent = cur.grad.dot(step);
        if (ascent <= 0.0) continue;  // clipping turned the step uphill-in-phi
        const Point trial = eval_point(xt, false);
        if (trial.val < cur.val + config.armijo_slope * ascent) continue;
        t_ok = t;
        val_ok = trial.val;
        x_ok = std::move(xt);
        break;
      }
      if (t_ok == 0.0) return false;
      for (; evals < config.max_line_steps; ++evals) {
        Eigen::VectorXd xt = clipped(2.0 * t_ok);
        if ((xt - x_ok).cwiseAbs().maxCoeff() == 0.0) break;  // fully pinned
        const double ascent = cur.grad.dot(xt - x);
        if (ascent <= 0.0) break;
        const Point trial = eval_point(xt, false);
        if (trial.val <= val_ok || trial.val < cur.val + config.armijo_slope * ascent) break;
        t_ok *= 2.0;
        val_ok = trial.val;
        x_ok = std::move(xt);
      }
      Point nxt = eval_point(x_ok, true);
      const Eigen::VectorXd step = x_ok - x;
      const Eigen::VectorXd y = cur.grad - nxt.grad;  // gradient change of phi = -f
      const double sy = step.dot(y);
      if (sy > 1e-12 * step.norm() * y.norm()) {
        mem.push_back({step, y, 1.0 / sy});
        if (static_cast<int>(mem.size()) > config.lbfgs_memory) mem.pop_front();
      }
      x = x_ok;
      cur = std::move(nxt);
      return true;
    };

    for (int iter = 0; iter < config.max_iters; ++iter) {
      if (scaled_grad() <= config.grad_tol) {
        stationary = true;
        break;
      }
      const double prev_val = cur.val;
      Eigen::VectorXd dir = two_loop(-cur.grad, mem);
      if (dir.dot(cur.grad) <= 0.0) {
        mem.clear();
        dir = cur.grad;
      }
      bool moved = try_dir(dir);
      if (!moved && !mem.empty()) {
        mem.clear();
        moved = try_dir(cur.grad);
      }
      if (!moved) break;
      ++global_iter;
      result.trace.push_back({stage, global_iter, cur.rep.f, cur.rep.f0, cur.rep.max_f_pair(),
                              scaled_grad(), lambdas});
      if (std::abs(cur.val - prev_val) <= config.objective_tol * std::max(1.0, std::abs(prev_val))) {
        stationary = true;
        break;
      }
    }

    unflatten(x, work);
    const Evaluation full = evaluate(model, work, lambdas, EvalOptions{false, false, config.workers});
    result.report = full.report;
    result.stages = stage + 1;
    const std::vector<double> next = lambda_schedule(full.report, config);
    if (next == lambdas) {
      // Pairs with zero weight were deliberately left unsuppressed (blind
      // baselines); only actively weighted pairs gate convergence.
      bool compliant = true;
      for (std::size_t p = 0; p < pairs.size(); ++p)
        if (lambdas[p] > 0.0 && full.report.f_pairs[p] > config.pair_threshold) compliant = false;
      result.converged = stationary && compliant;
      done = true;
    } else {
      lambdas = next;
    }
  }

  unflatten(x, work);
  result.pulses = std::move(work);
  result.report.iteration = global_iter;
  return result;
}

}  // namespace pargate
