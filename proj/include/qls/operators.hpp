#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qls/states.hpp"

namespace qls {

struct DenseOperatorMatrix {
  int n = 0; // qubit count; dim = 2^n
  Eigen::MatrixXcd m;
  bool hermitian = false;

  Eigen::Index dim() const { return m.rows(); }
  void validate() const; // hermitian flag => max |M - M†| <= 1e-10
};

// One term beta_k * U_k; U_k is a Pauli string (pauli backend) or a dense
// unitary shared across copies of the operator (dense backend).
struct OpTerm {
  double beta = 0;
  std::variant<PauliString, std::shared_ptr<const DenseOperatorMatrix>> u;
};

struct DecomposedOperator {
  int n = 0;
  Backend backend = Backend::pauli;
  std::vector<OpTerm> terms;
  bool hermitian_flag = false;
  bool normalized_flag = false;

  int K() const { return static_cast<int>(terms.size()); }
  double beta_l1() const;
  void validate() const;
};

struct SystemMetadata {
  std::string family;      // "pauli-sum" | "haar-sum" | "orth-sum" | "custom"
  std::uint64_t seed = 0;
  int S = 0;
  double scale = 1.0;      // divisor applied to raw coefficients
  double coeff_lo = -2.0, coeff_hi = 2.0;
};

struct LinearSystem {
  DecomposedOperator A;
  std::variant<ProductState, DenseState> b;
  std::optional<double> kappa_bound;
  SystemMetadata metadata;

  int n() const { return A.n; }
  DenseState b_dense() const;
  double b_norm() const;
};

// A = sum_i alpha_i (U_i + U_i†), Haar unitaries, rescaled by the exact
// spectral norm; b = |0^n>. kappa_bound holds the exact condition number.
LinearSystem gen_haar_sum_system(int dim = 256, int S = 10,
                                 std::pair<double, double> coeff_range = {-2, 2},
                                 std::uint64_t seed = 0);

// A = sum_i alpha_i P_i with uniform Pauli letters (duplicate rays merged),
// rescaled by sum |beta|; b = |0^n>. letter_set restricts the per-qubit draw.
LinearSystem gen_pauli_sum_system(int n, int S = 8,
                                  std::pair<double, double> coeff_range = {-2, 2},
                                  std::uint64_t seed = 0,
                                  std::string_view letter_set = "IXYZ");

// A = sum_i alpha_i (O_i + O_i^T), Haar-random real orthogonal factors;
// real symmetric, rescaled by the exact spectral norm; b = |0^n>.
LinearSystem gen_orthogonal_sum_system(int dim, int S = 10,
                                       std::pair<double, double> coeff_range = {-2, 2},
                                       std::uint64_t seed = 0);

DenseOperatorMatrix haar_unitary(int dim, std::uint64_t seed);
DenseOperatorMatrix haar_orthogonal(int dim, std::uint64_t seed);

// e^{-iAt}|v> by eigendecomposition; Propagator caches it for many t values.
struct Propagator {
  explicit Propagator(const DenseOperatorMatrix& A);
  DenseState apply(double t, const DenseState& v) const;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
};
DenseState evolve_exp(const DenseOperatorMatrix& A, double t, const DenseState& v);

struct AdiabaticHamiltonian {
  double s = 0;
  DenseOperatorMatrix H; // on n+1 qubits
};

// H(s) = A(s) (I - |+,b><+,b|) A(s) with A(s) = (1-s) Z(x)I + s X(x)A.
AdiabaticHamiltonian build_H(double s, const LinearSystem& system);

struct SpectralBounds {
  double rho = 0;                  // dense: largest singular value; else sum |beta|
  std::optional<double> kappa;     // dense only
  bool bound_only = false;         // true when rho is the l1 coefficient bound
};
SpectralBounds spectral_bounds(const DecomposedOperator& A);

// Dense assembly of A (pauli backend requires n <= 10).
Eigen::MatrixXcd assemble_dense(const DecomposedOperator& A);

// Pauli-backend system with each term re-expressed as a dense unitary.
LinearSystem to_dense_backend(const LinearSystem& system);

// <u| A |v> and <u| A†A |v> over the decomposition, exact.
cmplx overlap_A(const DecomposedOperator& A, const DenseState& u, const DenseState& v);
cmplx overlap_A(const DecomposedOperator& A, const SymbolicState& u, const SymbolicState& v);

// A v (or A† v) summed over decomposition terms; works on either backend's
// terms as long as v is a dense amplitude vector.
Eigen::VectorXcd apply_A(const DecomposedOperator& A, const Eigen::VectorXcd& v,
                         bool adjoint = false);

// *.system.json with optional binary sidecar for dense terms / dense b.
void save_system(const std::string& path, const LinearSystem& system);
LinearSystem load_system(const std::string& path);

} // namespace qls
