#pragma once

// Dense complex linear algebra for small multi-qubit systems.
//
// Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
// computational-basis index. For an n-qubit index b, qubit q is the bit
// (b >> (n - 1 - q)) & 1.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tcsim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using QubitIndex = std::size_t;
using QubitSet = std::vector<QubitIndex>;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;
// Eigenvalues in [-kPositivityTolerance, 0) are treated as zero; anything
// more negative is a positivity violation.
inline constexpr double kPositivityTolerance = 1e-9;

/// Raised when a matrix that must be positive semidefinite has an eigenvalue
/// below -kPositivityTolerance.
class PositivityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Number of qubits n such that dim == 2^n. Throws if dim is not a power of two.
std::size_t qubit_count(Eigen::Index dim);

/// Bit position of `qubit` inside an n-qubit basis index.
constexpr std::size_t bit_of(QubitIndex qubit, std::size_t n_qubits) {
  return n_qubits - 1 - qubit;
}

bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTolerance);

/// Normalized pure state on n qubits.
class PureState {
 public:
  /// Validates length 2^n and unit norm within kNormTolerance.
  static PureState from_amplitudes(ComplexVector amplitudes);
  /// Rescales to unit norm; throws on a zero vector.
  static PureState normalized(ComplexVector amplitudes);
  static PureState basis_state(std::size_t n_qubits, std::size_t index);

  std::size_t num_qubits() const { return n_qubits_; }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  ComplexMatrix projector() const;
  /// <this|other>
  Complex inner(const PureState& other) const;

 private:
  PureState(std::size_t n, ComplexVector a) : n_qubits_(n), amplitudes_(std::move(a)) {}

  std::size_t n_qubits_;
  ComplexVector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite matrix on n qubits.
///
/// Construction validates the invariants (Hermitian within 1e-10 entrywise,
/// trace 1 within 1e-10, minimum eigenvalue >= -1e-9) and stores the
/// Hermitian part of the input.
class DensityMatrix {
 public:
  explicit DensityMatrix(const ComplexMatrix& m);

  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed(std::size_t n_qubits);

  std::size_t num_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

  double purity() const;

 private:
  std::size_t n_qubits_;
  ComplexMatrix matrix_;
};

struct HermitianEigen {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns
};

/// Eigendecomposition of a Hermitian matrix. Throws std::invalid_argument if
/// `m` is not Hermitian within kHermitianTolerance.
HermitianEigen eigh(const ComplexMatrix& m);

/// Eigenvalues clamped for positive-semidefinite use: values in
/// [-kPositivityTolerance, 0) become 0, smaller values raise PositivityError.
RealVector clamp_psd_eigenvalues(const RealVector& values);

/// Kronecker product; qubits of `a` come first.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix tensor_all(std::span<const ComplexMatrix> factors);

/// Single-qubit operator `op` acting on `qubit` of an n-qubit register.
ComplexMatrix embed(const ComplexMatrix& op, QubitIndex qubit, std::size_t n_qubits);

/// op_q * m * op_q^dagger without forming the full embedded operator.
ComplexMatrix conjugate_local(const ComplexMatrix& m, const ComplexMatrix& op,
                              QubitIndex qubit);

/// Reduced operator on `keep` (kept qubits retain ascending index order).
ComplexMatrix partial_trace(const ComplexMatrix& m, const QubitSet& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const QubitSet& keep);

/// Transpose on the tensor factors listed in `subset`.
ComplexMatrix partial_transpose(const ComplexMatrix& m, const QubitSet& subset);
ComplexMatrix partial_transpose(const DensityMatrix& rho, const QubitSet& subset);

/// exp(scale * h) for Hermitian h via eigendecomposition.
ComplexMatrix hermitian_expm(const ComplexMatrix& h, double scale);

/// Principal square root of a positive semidefinite matrix.
ComplexMatrix psd_sqrt(const ComplexMatrix& m);

/// Sum of singular values. Hermitian inputs use the eigenvalue route.
double trace_norm(const ComplexMatrix& m);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0, 1].
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
/// <psi|sigma|psi>
double fidelity(const PureState& psi, const DensityMatrix& sigma);

/// Largest entrywise modulus of a - b.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

namespace pauli {
ComplexMatrix identity();
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
ComplexMatrix hadamard();
/// diag(1, e^{i alpha})
ComplexMatrix phase(double alpha);
}  // namespace pauli

}  // namespace tcsim
