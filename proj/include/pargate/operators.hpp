#pragma once

// Dense operator algebra for piecewise-constant Hamiltonian evolution.
//
// Conventions used throughout the library:
//   * Hamiltonians are Hermitian matrices in angular-frequency units (rad/s).
//   * Times are in seconds; a slice of duration dt evolves by exp(-i H dt).
//   * Products are time ordered with the latest slice leftmost.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace pargate {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;

// Hermiticity is enforced relative to the Frobenius norm of the operator.
inline constexpr double kHermitianRelTol = 1e-12;
// Unitarity tolerance scales with sqrt(dim): ||U U^dag - I||_F <= tol * sqrt(dim).
inline constexpr double kUnitaryTol = 1e-10;

Operator pauli_x();
Operator pauli_y();
Operator pauli_z();
Operator identity(int dim);

bool is_hermitian(const Operator& H, double rel_tol = kHermitianRelTol);
bool is_unitary(const Operator& U, double tol = kUnitaryTol);

// Throws std::invalid_argument naming `what` if H is not square/Hermitian.
void require_hermitian(const Operator& H, const std::string& what);
void require_square(const Operator& A, const std::string& what);

// Kronecker product, left factor major: (A ⊗ B)[i*db+k, j*db+l] = A[i,j] B[k,l].
Operator tensor(const Operator& A, const Operator& B);

// Embed a single-site operator at `site` in a chain with the given local dims.
Operator embed_site(const Operator& op, int site, const std::vector<int>& dims);

// Embed an operator acting jointly on sites (a, b), a < b, given in the
// site-a-major convention of tensor().
Operator embed_two_site(const Operator& op_ab, int a, int b, const std::vector<int>& dims);

// In-place H += coeff * embed_site(op, site, dims) without materializing the
// embedding; touches only the O(dim * dim(op)) nonzero positions.
void add_embedded_site(Operator& H, const Operator& op, Complex coeff, int site,
                       const std::vector<int>& dims);
void add_embedded_two_site(Operator& H, const Operator& op_ab, Complex coeff, int a, int b,
                           const std::vector<int>& dims);

// One Hermitian generator per slice; dt is derived, never stored.
struct SliceSchedule {
  double total_time = 0.0;           // seconds
  std::vector<Operator> generators;  // rad/s

  int n_slices() const { return static_cast<int>(generators.size()); }
  double dt() const;
};

// Piecewise-constant control amplitudes, one column per channel (rad/s).
struct PulseSequence {
  double total_time = 0.0;      // seconds
  Eigen::MatrixXd amplitudes;   // n_slices x n_channels

  int n_slices() const { return static_cast<int>(amplitudes.rows()); }
  int n_channels() const { return static_cast<int>(amplitudes.cols()); }
  double dt() const;
};

// Haar-distributed unitary via QR of a seeded Gaussian matrix; the draw is
// reproducible across standard libraries (hand-rolled Box-Muller).
Operator random_unitary(int dim, std::uint64_t seed);

// Random Hermitian matrix with independent Gaussian entries of the given
// scale; same reproducibility contract as random_unitary.
Operator random_hermitian(int dim, double scale, std::uint64_t seed);

// exp(-i H dt) via eigendecomposition (exact for Hermitian H, any step size).
Operator expm_hermitian(const Operator& H, double dt);

// Time-ordered product of slice propagators, latest slice leftmost.
Operator propagate(const SliceSchedule& schedule);

// |Tr(U target^dag)|^2 / d^2 (phase invariant).
double trace_fidelity(const Operator& U, const Operator& target);

// Divided differences of f(x) = exp(-i x dt). First order is evaluated in the
// cancellation-free sinc form; second order switches between the downward
// recurrence (well-separated nodes) and a centered series (clustered nodes).
Complex expm_divdiff1(double a, double b, double dt);
Complex expm_divdiff2(double a, double b, double c, double dt);

// Eigendecomposed slice exponential plus the coupled-block integrals that both
// the deviation engine and the exact gradients are built from.
class HermitianExp {
 public:
  HermitianExp(const Operator& H, double dt);

  const Operator& unitary() const { return U_; }
  const Eigen::VectorXd& evals() const { return evals_; }
  const Operator& evecs() const { return vecs_; }
  double dt() const { return dt_; }

  // -i * \int_0^dt exp(-iH(dt-s)) X exp(-iHs) ds.  This is simultaneously the
  // upper-right block of exp(-i dt [[H, X], [0, H]]) and the directional
  // derivative of exp(-i dt (H + uX)) at u = 0.
  Operator coupling_block(const Operator& X) const;

  // Transform into / out of the eigenbasis.
  Operator to_eigenbasis(const Operator& A) const;
  Operator from_eigenbasis(const Operator& A) const;

  // First-order divided-difference table Phi1[a,b] = f[lambda_a, lambda_b].
  const Operator& phi1() const { return phi1_; }

 private:
  double dt_ = 0.0;
  Eigen::VectorXd evals_;
  Operator vecs_;
  Operator U_;
  Operator phi1_;
};

}  // namespace pargate
