#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qls/pauli.hpp"

namespace qls {

using cmplx = std::complex<double>;

enum class Backend { dense, pauli };

// Unentangled n-qubit state: one (a, b) amplitude pair per qubit, unit norm.
struct ProductState {
  int n = 0;
  std::vector<std::array<cmplx, 2>> amps;

  static ProductState zero(int n);                       // |0^n>
  static ProductState single(int n, cmplx a, cmplx b);   // (a,b) on every qubit
  void validate() const;                                 // per-qubit norm within 1e-12

  friend bool operator==(const ProductState&, const ProductState&) = default;
};

// Full statevector; index bit for qubit j is bit (n-1-j), i.e. qubit 0 is the
// most significant bit, matching the Kronecker order of tensor factors.
struct DenseState {
  int n = 0;
  Eigen::VectorXcd amps;

  static constexpr int kMaxQubits = 14;
  static DenseState basis(int n, std::uint64_t index);
  double norm() const { return amps.norm(); }
};

// phase-tracked P|base> with |scale| in {0,1} for tree nodes.
struct SymbolicState {
  ProductState base;
  PauliString op;
  cmplx scale{1.0, 0.0};
};

// <s|P|s> = i^phase * prod_j <s_j| X^x Z^z |s_j>, bailing out on a zero factor.
cmplx expectation_product_state(const PauliString& p, const ProductState& s);

DenseState to_dense(const ProductState& s);
DenseState to_dense(const SymbolicState& s);
Eigen::MatrixXcd dense_matrix(const PauliString& p); // n <= DenseState::kMaxQubits

// In-place |v> -> P|v> on the dense backend, O(2^n) bit arithmetic.
void apply_pauli(const PauliString& p, DenseState& v);

cmplx overlap(const DenseState& u, const DenseState& v);
// Symbolic nodes must share the base product state (tree nodes all do).
cmplx overlap(const SymbolicState& u, const SymbolicState& v);

} // namespace qls
