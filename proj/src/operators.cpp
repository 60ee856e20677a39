#include "pargate/operators.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace pargate {

namespace {

constexpr Complex kI{0.0, 1.0};

// 53-bit uniform in [0, 1); hand-rolled so seeded draws are reproducible
// across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Complex unit_gaussian_pair(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit_uniform(rng);  // (0, 1]
  const double u2 = unit_uniform(rng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phase = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phase), r * std::sin(phase)};
}

}  // namespace

Operator pauli_x() {
  Operator p(2, 2);
  p << 0, 1, 1, 0;
  return p;
}

Operator pauli_y() {
  Operator p(2, 2);
  p << 0, -kI, kI, 0;
  return p;
}

Operator pauli_z() {
  Operator p(2, 2);
  p << 1, 0, 0, -1;
  return p;
}

Operator identity(int dim) {
  if (dim <= 0) throw std::invalid_argument("identity: dim must be positive");
  return Operator::Identity(dim, dim);
}

bool is_hermitian(const Operator& H, double rel_tol) {
  if (H.rows() != H.cols()) return false;
  const double scale = std::max(1.0, H.norm());
  return (H - H.adjoint()).norm() <= rel_tol * scale;
}

bool is_unitary(const Operator& U, double tol) {
  if (U.rows() != U.cols()) return false;
  const int d = static_cast<int>(U.rows());
  return (U * U.adjoint() - Operator::Identity(d, d)).norm() <= tol * std::sqrt(double(d));
}

void require_square(const Operator& A, const std::string& what) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw std::invalid_argument(what + ": operator must be square and nonempty");
}

void require_hermitian(const Operator& H, const std::string& what) {
  require_square(H, what);
  if (!is_hermitian(H))
    throw std::invalid_argument(what + ": operator is not Hermitian within tolerance");
}

Operator tensor(const Operator& A, const Operator& B) {
  const int ra = static_cast<int>(A.rows()), ca = static_cast<int>(A.cols());
  const int rb = static_cast<int>(B.rows()), cb = static_cast<int>(B.cols());
  Operator out(ra * rb, ca * cb);
  for (int i = 0; i < ra; ++i)
    for (int j = 0; j < ca; ++j) out.block(i * rb, j * cb, rb, cb) = A(i, j) * B;
  return out;
}

Operator embed_site(const Operator& op, int site, const std::vector<int>& dims) {
  require_square(op, "embed_site");
  if (site < 0 || site >= static_cast<int>(dims.size()))
    throw std::invalid_argument("embed_site: site index out of range");
  if (op.rows() != dims[site])
    throw std::invalid_argument("embed_site: operator dim does not match site dim");
  Operator out = Operator::Identity(1, 1);
  for (int s = 0; s < static_cast<int>(dims.size()); ++s)
    out = tensor(out, s == site ? op : identity(dims[s]));
  return out;
}

Operator embed_two_site(const Operator& op_ab, int a, int b, const std::vector<int>& dims) {
  long full = 1;
  for (int d : dims) full *= d;
  Operator out = Operator::Zero(full, full);
  add_embedded_two_site(out, op_ab, Complex(1.0, 0.0), a, b, dims);
  return out;
}

void add_embedded_site(Operator& H, const Operator& op, Complex coeff, int site,
                       const std::vector<int>& dims) {
  require_square(op, "add_embedded_site");
  if (site < 0 || site >= static_cast<int>(dims.size()))
    throw std::invalid_argument("add_embedded_site: site index out of range");
  if (op.rows() != dims[site])
    throw std::invalid_argument("add_embedded_site: operator dim does not match site dim");

  const int n = static_cast<int>(dims.size());
  const int ds = dims[site];
  long full = 1;
  std::vector<long> stride(n, 1);
  for (int s = n - 1; s >= 0; --s) {
    stride[s] = full;
    full *= dims[s];
  }
  if (H.rows() != full || H.cols() != full)
    throw std::invalid_argument("add_embedded_site: target dim does not match site dims");
  // Walk every full-space basis index, replace the digit at `site`.
  for (long r = 0; r < full; ++r) {
    const int rs = static_cast<int>((r / stride[site]) % ds);
    const long rest = r - rs * stride[site];
    for (int cs = 0; cs < ds; ++cs) {
      const Complex v = op(rs, cs);
      if (v == Complex(0.0, 0.0)) continue;
      H(r, rest + cs * stride[site]) += coeff * v;
    }
  }
}

void add_embedded_two_site(Operator& H, const Operator& op_ab, Complex coeff, int a, int b,
                           const std::vector<int>& dims) {
  require_square(op_ab, "add_embedded_two_site");
  const int n = static_cast<int>(dims.size());
  if (a < 0 || b <= a || b >= n)
    throw std::invalid_argument("add_embedded_two_site: need 0 <= a < b < n_sites");
  const int da = dims[a], db = dims[b];
  if (op_ab.rows() != da * db)
    throw std::invalid_argument("add_embedded_two_site: operator dim does not match joint site dim");

  long full = 1;
  std::vector<long> stride(n, 1);
  for (int s = n - 1; s >= 0; --s) {
    stride[s] = full;
    full *= dims[s];
  }
  if (H.rows() != full || H.cols() != full)
    throw std::invalid_argument("add_embedded_two_site: target dim does not match site dims");
  // Walk every full-space basis index, replace the digits at sites a and b.
  for (long r = 0; r < full; ++r) {
    const int ra = static_cast<int>((r / stride[a]) % da);
    const int rb = static_cast<int>((r / stride[b]) % db);
    const long rest = r - ra * stride[a] - rb * stride[b];
    for (int ca = 0; ca < da; ++ca)
      for (int cb = 0; cb < db; ++cb) {
        const Complex v = op_ab(ra * db + rb, ca * db + cb);
        if (v == Complex(0.0, 0.0)) continue;
        H(r, rest + ca * stride[a] + cb * stride[b]) += coeff * v;
      }
  }
}

double SliceSchedule::dt() const {
  if (generators.empty()) throw std::invalid_argument("SliceSchedule: no slices");
  if (!(total_time > 0.0)) throw std::invalid_argument("SliceSchedule: total_time must be positive");
  return total_time / static_cast<double>(generators.size());
}

double PulseSequence::dt() const {
  if (amplitudes.rows() == 0) throw std::invalid_argument("PulseSequence: no slices");
  if (!(total_time > 0.0)) throw std::invalid_argument("PulseSequence: total_time must be positive");
  return total_time / static_cast<double>(amplitudes.rows());
}

Operator random_unitary(int dim, std::uint64_t seed) {
  if (dim <= 0) throw std::invalid_argument("random_unitary: dim must be positive");
  std::mt19937_64 rng(seed);
  Operator g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = unit_gaussian_pair(rng);
  Eigen::HouseholderQR<Operator> qr(g);
  Operator q = qr.householderQ();
  const Operator r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the column phases so the distribution is Haar, not QR-convention biased.
  for (int j = 0; j < dim; ++j) {
    const Complex rjj = r(j, j);
    if (std::abs(rjj) > 0.0) q.col(j) *= rjj / std::abs(rjj);
  }
  return q;
}

Operator random_hermitian(int dim, double scale, std::uint64_t seed) {
  if (dim <= 0) throw std::invalid_argument("random_hermitian: dim must be positive");
  std::mt19937_64 rng(seed);
  Operator g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = unit_gaussian_pair(rng);
  return 0.5 * scale * (g + g.adjoint());
}

Operator expm_hermitian(const Operator& H, double dt) {
  return HermitianExp(H, dt).unitary();
}

Operator propagate(const SliceSchedule& schedule) {
  const double dt = schedule.dt();
  const int d = static_cast<int>(schedule.generators.front().rows());
  Operator U = Operator::Identity(d, d);
  for (const Operator& H : schedule.generators) {
    if (H.rows() != d || H.cols() != d)
      throw std::invalid_argument("propagate: inconsistent slice dimensions");
    U = expm_hermitian(H, dt) * U;
  }
  return U;
}

double trace_fidelity(const Operator& U, const Operator& target) {
  require_square(U, "trace_fidelity");
  if (U.rows() != target.rows() || U.cols() != target.cols())
    throw std::invalid_argument("trace_fidelity: dimension mismatch");
  const double d = static_cast<double>(U.rows());
  const Complex tr = (U * target.adjoint()).trace();
  return std::norm(tr) / (d * d);
}

Complex expm_divdiff1(double a, double b, double dt) {
  const double mean = 0.5 * (a + b);
  const double half = 0.5 * (a - b) * dt;
  const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  return -kI * dt * std::exp(-kI * mean * dt) * sinc;
}

Complex expm_divdiff2(double a, double b, double c, double dt) {
  double lo = std::min({a, b, c});
  double hi = std::max({a, b, c});
  const double spread = (hi - lo) * std::abs(dt);
  if (spread > 0.1) {
    // Downward recurrence on sorted nodes; the subtraction cancels roughly
    // spread/2 of each operand, so even at the 0.1 cutoff the result keeps
    // about 14 significant digits.
    double mid = a + b + c - lo - hi;
    return (expm_divdiff1(hi, mid, dt) - expm_divdiff1(mid, lo, dt)) * (1.0 / (hi - lo));
  }
  // Centered series: f[x0,x1,x2] = e^{z m} sum_{n>=2} z^n h_{n-2}(x-m) / n!
  // with z = -i dt and h_k the complete homogeneous symmetric polynomials.
  const double m = (a + b + c) / 3.0;
  const double x = a - m, y = b - m, z = c - m;
  const Complex w = -kI * dt;
  Complex term = w * w / 2.0;  // n = 2 contribution, h_0 = 1
  Complex sum = term;
  double zpow = 1.0;
  double h2 = 1.0;  // h_k over (y,z), starts at h_0
  double h3 = 1.0;  // h_k over (x,y,z)
  int small_streak = 0;
  for (int n = 3; n < 64; ++n) {
    zpow *= z;
    h2 = y * h2 + zpow;  // h_k(y,z) = y h_{k-1}(y,z) + z^k
    h3 = x * h3 + h2;    // h_k(x,y,z) = x h_{k-1}(x,y,z) + h_k(y,z)
    term *= w / static_cast<double>(n);
    const Complex contrib = term * h3;
    sum += contrib;
    // Centering makes h_1 vanish identically, so a lone tiny term does not
    // mean the tail is done; stop only on two in a row.
    const double c1 = std::abs(contrib.real()) + std::abs(contrib.imag());
    const double s1 = std::abs(sum.real()) + std::abs(sum.imag());
    if (c1 < 1e-18 * s1 + 1e-300) {
      if (++small_streak == 2) break;
    } else {
      small_streak = 0;
    }
  }
  return std::exp(w * m) * sum;
}

HermitianExp::HermitianExp(const Operator& H, double dt) : dt_(dt) {
  require_hermitian(H, "HermitianExp");
  Eigen::SelfAdjointEigenSolver<Operator> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("HermitianExp: eigendecomposition failed");
  evals_ = es.eigenvalues();
  vecs_ = es.eigenvectors();
  const int d = static_cast<int>(evals_.size());
  Eigen::VectorXcd phases(d);
  for (int i = 0; i < d; ++i) phases(i) = std::exp(-kI * evals_(i) * dt);
  U_ = vecs_ * phases.asDiagonal() * vecs_.adjoint();
  phi1_.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) phi1_(i, j) = expm_divdiff1(evals_(i), evals_(j), dt);
}

Operator HermitianExp::to_eigenbasis(const Operator& A) const {
  return vecs_.adjoint() * A * vecs_;
}

Operator HermitianExp::from_eigenbasis(const Operator& A) const {
  return vecs_ * A * vecs_.adjoint();
}

Operator HermitianExp::coupling_block(const Operator& X) const {
  if (X.rows() != evals_.size() || X.cols() != evals_.size())
    throw std::invalid_argument("coupling_block: dimension mismatch");
  return from_eigenbasis(to_eigenbasis(X).cwiseProduct(phi1_));
}

}  // namespace pargate
