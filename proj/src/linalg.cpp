#include "tcsim/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <unsupported/Eigen/KroneckerProduct>

namespace tcsim {

namespace {

std::size_t checked_qubit_count(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(
        fmt::format("expected a square matrix, got {}x{}", m.rows(), m.cols()));
  }
  return qubit_count(m.rows());
}

void check_indices(const QubitSet& qubits, std::size_t n_qubits) {
  for (QubitIndex q : qubits) {
    if (q >= n_qubits) {
      throw std::out_of_range(
          fmt::format("qubit index {} out of range for {} qubits", q, n_qubits));
    }
  }
}

std::size_t mask_of(const QubitSet& qubits, std::size_t n_qubits) {
  std::size_t mask = 0;
  for (QubitIndex q : qubits) mask |= std::size_t{1} << bit_of(q, n_qubits);
  return mask;
}

// Packs the bits of `index` selected by `mask` into a contiguous integer,
// preserving their relative order.
std::size_t compress_bits(std::size_t index, std::size_t mask) {
  std::size_t out = 0;
  std::size_t pos = 0;
  while (mask != 0) {
    const std::size_t low = mask & (~mask + 1);
    if (index & low) out |= std::size_t{1} << pos;
    ++pos;
    mask &= mask - 1;
  }
  return out;
}

}  // namespace

std::size_t qubit_count(Eigen::Index dim) {
  if (dim <= 0 || !std::has_single_bit(static_cast<std::size_t>(dim))) {
    throw std::invalid_argument(
        fmt::format("dimension {} is not a power of two", dim));
  }
  return static_cast<std::size_t>(std::countr_zero(static_cast<std::size_t>(dim)));
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs_diff(m, m.adjoint()) <= tol;
}

// ---------------------------------------------------------------------------
// PureState

PureState PureState::from_amplitudes(ComplexVector amplitudes) {
  const std::size_t n = qubit_count(amplitudes.size());
  const double norm = amplitudes.norm();
  if (std::abs(norm - 1.0) > kNormTolerance) {
    throw std::invalid_argument(
        fmt::format("state norm {:.17g} differs from 1", norm));
  }
  return PureState(n, std::move(amplitudes));
}

PureState PureState::normalized(ComplexVector amplitudes) {
  const std::size_t n = qubit_count(amplitudes.size());
  const double norm = amplitudes.norm();
  if (norm == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
  amplitudes /= norm;
  return PureState(n, std::move(amplitudes));
}

PureState PureState::basis_state(std::size_t n_qubits, std::size_t index) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  if (index >= dim) throw std::out_of_range("basis index out of range");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(n_qubits, std::move(v));
}

ComplexMatrix PureState::projector() const {
  return amplitudes_ * amplitudes_.adjoint();
}

Complex PureState::inner(const PureState& other) const {
  if (other.amplitudes_.size() != amplitudes_.size()) {
    throw std::invalid_argument("inner product of states with different dimensions");
  }
  return amplitudes_.dot(other.amplitudes_);
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(const ComplexMatrix& m) : n_qubits_(checked_qubit_count(m)) {
  const double asym = max_abs_diff(m, m.adjoint());
  if (asym > kHermitianTolerance) {
    throw std::invalid_argument(
        fmt::format("density matrix is not Hermitian (max |m - m^H| = {:.3g})", asym));
  }
  matrix_ = 0.5 * (m + m.adjoint());
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    throw std::invalid_argument(fmt::format("density matrix trace {:.17g} differs from 1", tr));
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -kPositivityTolerance) {
    throw PositivityError(
        fmt::format("density matrix has eigenvalue {:.3g} below zero", min_eig));
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(psi.projector());
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t n_qubits) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityMatrix::purity() const {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  return matrix_.squaredNorm();
}

// ---------------------------------------------------------------------------
// Spectral helpers

HermitianEigen eigh(const ComplexMatrix& m) {
  if (!is_hermitian(m)) throw std::invalid_argument("eigh: matrix is not Hermitian");
  const ComplexMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigh: eigendecomposition did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

RealVector clamp_psd_eigenvalues(const RealVector& values) {
  RealVector out = values;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out(i) < -kPositivityTolerance) {
      throw PositivityError(
          fmt::format("eigenvalue {:.3g} violates positivity", out(i)));
    }
    if (out(i) < 0.0) out(i) = 0.0;
  }
  return out;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

ComplexMatrix tensor_all(std::span<const ComplexMatrix> factors) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) out = tensor(out, f);
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, QubitIndex qubit, std::size_t n_qubits) {
  if (op.rows() != 2 || op.cols() != 2) throw std::invalid_argument("embed: op must be 2x2");
  if (qubit >= n_qubits) throw std::out_of_range("embed: qubit index out of range");
  const auto left = static_cast<Eigen::Index>(std::size_t{1} << qubit);
  const auto right = static_cast<Eigen::Index>(std::size_t{1} << (n_qubits - qubit - 1));
  return tensor(tensor(ComplexMatrix::Identity(left, left), op),
                ComplexMatrix::Identity(right, right));
}

ComplexMatrix conjugate_local(const ComplexMatrix& m, const ComplexMatrix& op,
                              QubitIndex qubit) {
  const std::size_t n = checked_qubit_count(m);
  if (op.rows() != 2 || op.cols() != 2) {
    throw std::invalid_argument("conjugate_local: op must be 2x2");
  }
  if (qubit >= n) throw std::out_of_range("conjugate_local: qubit index out of range");
  const Eigen::Index dim = m.rows();
  const auto bit = static_cast<Eigen::Index>(std::size_t{1} << bit_of(qubit, n));

  // left multiplication: rows mix in pairs (r0, r1) differing in `bit`
  ComplexMatrix left(dim, dim);
  for (Eigen::Index r0 = 0; r0 < dim; ++r0) {
    if (r0 & bit) continue;
    const Eigen::Index r1 = r0 | bit;
    left.row(r0) = op(0, 0) * m.row(r0) + op(0, 1) * m.row(r1);
    left.row(r1) = op(1, 0) * m.row(r0) + op(1, 1) * m.row(r1);
  }
  // right multiplication by op^dagger: columns mix in the same pairs
  ComplexMatrix out(dim, dim);
  const ComplexMatrix adj = op.adjoint();
  for (Eigen::Index c0 = 0; c0 < dim; ++c0) {
    if (c0 & bit) continue;
    const Eigen::Index c1 = c0 | bit;
    out.col(c0) = left.col(c0) * adj(0, 0) + left.col(c1) * adj(1, 0);
    out.col(c1) = left.col(c0) * adj(0, 1) + left.col(c1) * adj(1, 1);
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const QubitSet& keep) {
  const std::size_t n = checked_qubit_count(m);
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  check_indices(keep, n);
  QubitSet sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("partial_trace: duplicate qubit in keep set");
  }
  const std::size_t keep_mask = mask_of(sorted, n);
  const std::size_t trace_mask = ((std::size_t{1} << n) - 1) & ~keep_mask;
  const auto out_dim = static_cast<Eigen::Index>(std::size_t{1} << sorted.size());

  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  const auto dim = static_cast<std::size_t>(m.rows());
  for (std::size_t a = 0; a < dim; ++a) {
    const auto ra = static_cast<Eigen::Index>(compress_bits(a, keep_mask));
    for (std::size_t b = 0; b < dim; ++b) {
      if ((a & trace_mask) != (b & trace_mask)) continue;
      out(ra, static_cast<Eigen::Index>(compress_bits(b, keep_mask))) +=
          m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const QubitSet& keep) {
  return DensityMatrix(partial_trace(rho.matrix(), keep));
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, const QubitSet& subset) {
  const std::size_t n = checked_qubit_count(m);
  check_indices(subset, n);
  const std::size_t mask = mask_of(subset, n);
  const auto dim = static_cast<std::size_t>(m.rows());
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b < dim; ++b) {
      const std::size_t a2 = (a & ~mask) | (b & mask);
      const std::size_t b2 = (b & ~mask) | (a & mask);
      out(static_cast<Eigen::Index>(a2), static_cast<Eigen::Index>(b2)) =
          m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  return out;
}

ComplexMatrix partial_transpose(const DensityMatrix& rho, const QubitSet& subset) {
  return partial_transpose(rho.matrix(), subset);
}

ComplexMatrix hermitian_expm(const ComplexMatrix& h, double scale) {
  const HermitianEigen eig = eigh(h);
  const RealVector weights = (scale * eig.values).array().exp();
  return eig.vectors * weights.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  const HermitianEigen eig = eigh(m);
  const RealVector roots = clamp_psd_eigenvalues(eig.values).cwiseSqrt();
  return eig.vectors * roots.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

double trace_norm(const ComplexMatrix& m) {
  if (is_hermitian(m)) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (m + m.adjoint()),
                                                        Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw std::invalid_argument(fmt::format(
        "fidelity: dimension mismatch ({} vs {})", rho.dim(), sigma.dim()));
  }
  const ComplexMatrix root = psd_sqrt(rho.matrix());
  ComplexMatrix inner = root * sigma.matrix() * root;
  inner = (0.5 * (inner + inner.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(inner, Eigen::EigenvaluesOnly);
  const double f = clamp_psd_eigenvalues(solver.eigenvalues()).cwiseSqrt().sum();
  return std::clamp(f * f, 0.0, 1.0);
}

double fidelity(const PureState& psi, const DensityMatrix& sigma) {
  if (psi.amplitudes().size() != sigma.dim()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  const Complex v = psi.amplitudes().dot(sigma.matrix() * psi.amplitudes());
  return std::clamp(v.real(), 0.0, 1.0);
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

namespace pauli {

ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }

ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix y() {
  const Complex i{0.0, 1.0};
  ComplexMatrix m(2, 2);
  m << 0, -i, i, 0;
  return m;
}

ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix hadamard() {
  ComplexMatrix m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::numbers::sqrt2;
}

ComplexMatrix phase(double alpha) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = std::polar(1.0, alpha);
  return m;
}

}  // namespace pauli

}  // namespace tcsim
