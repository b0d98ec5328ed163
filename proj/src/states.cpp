#include "qls/states.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace qls {

ProductState ProductState::zero(int n) { return single(n, {1, 0}, {0, 0}); }

ProductState ProductState::single(int n, cmplx a, cmplx b) {
  if (n < 1 || n > PauliString::kMaxQubits)
    throw std::invalid_argument("ProductState: qubit count out of range");
  ProductState s;
  s.n = n;
  s.amps.assign(static_cast<std::size_t>(n), {a, b});
  s.validate();
  return s;
}

void ProductState::validate() const {
  for (int j = 0; j < n; ++j) {
    double nn = std::norm(amps[j][0]) + std::norm(amps[j][1]);
    if (std::abs(nn - 1.0) > 1e-12)
      throw std::invalid_argument("ProductState: qubit " + std::to_string(j) +
                                  " amplitude pair not unit norm");
  }
}

DenseState DenseState::basis(int n, std::uint64_t index) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("DenseState: qubit count out of range");
  DenseState v;
  v.n = n;
  v.amps = Eigen::VectorXcd::Zero(1LL << n);
  v.amps(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

cmplx expectation_product_state(const PauliString& p, const ProductState& s) {
  if (p.n != s.n) throw std::invalid_argument("expectation_product_state: dimension mismatch");
  cmplx acc = phase_value(p.phase_pow);
  for (int j = 0; j < p.n; ++j) {
    const cmplx a = s.amps[j][0], b = s.amps[j][1];
    bool xb = p.x(j), zb = p.z(j);
    cmplx f;
    if (!xb && !zb) continue;                                   // identity factor
    else if (!xb && zb) f = std::norm(a) - std::norm(b);        // Z
    else if (xb && !zb) f = 2.0 * std::real(std::conj(a) * b);  // X
    else f = cmplx(0, -2.0) * std::imag(std::conj(a) * b);      // XZ
    if (f == cmplx(0, 0)) return {0, 0};
    acc *= f;
  }
  return acc;
}

DenseState to_dense(const ProductState& s) {
  DenseState v;
  v.n = s.n;
  v.amps = Eigen::VectorXcd::Ones(1);
  for (int j = 0; j < s.n; ++j) {
    // qubit j enters as the least significant bit; earlier qubits shift up,
    // so qubit 0 ends at the most significant position.
    Eigen::VectorXcd out(v.amps.size() * 2);
    for (Eigen::Index i = 0; i < v.amps.size(); ++i) {
      out(2 * i) = v.amps(i) * s.amps[j][0];
      out(2 * i + 1) = v.amps(i) * s.amps[j][1];
    }
    v.amps = std::move(out);
  }
  return v;
}

DenseState to_dense(const SymbolicState& s) {
  DenseState v = to_dense(s.base);
  apply_pauli(s.op, v);
  v.amps *= s.scale;
  return v;
}

Eigen::MatrixXcd dense_matrix(const PauliString& p) {
  if (p.n > DenseState::kMaxQubits)
    throw std::invalid_argument("dense_matrix: too many qubits for dense backend");
  const Eigen::Index dim = 1LL << p.n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  // column e_c maps to phase * e_{c XOR xmask} with sign from Z bits
  for (Eigen::Index c = 0; c < dim; ++c) {
    std::uint64_t col = static_cast<std::uint64_t>(c);
    int sign = 0;
    std::uint64_t row = col;
    for (int j = 0; j < p.n; ++j) {
      std::uint64_t bit = 1ULL << (p.n - 1 - j);
      if (p.z(j) && (col & bit)) sign ^= 1;   // Z acts first
      if (p.x(j)) row ^= bit;
    }
    cmplx val = phase_value(p.phase_pow) * (sign ? -1.0 : 1.0);
    m(static_cast<Eigen::Index>(row), c) = val;
  }
  return m;
}

void apply_pauli(const PauliString& p, DenseState& v) {
  if (p.n != v.n) throw std::invalid_argument("apply_pauli: dimension mismatch");
  const Eigen::Index dim = v.amps.size();
  std::uint64_t xmask = 0, zmask = 0;
  for (int j = 0; j < p.n; ++j) {
    std::uint64_t bit = 1ULL << (p.n - 1 - j);
    if (p.x(j)) xmask |= bit;
    if (p.z(j)) zmask |= bit;
  }
  Eigen::VectorXcd out(dim);
  const cmplx ph = phase_value(p.phase_pow);
  for (Eigen::Index c = 0; c < dim; ++c) {
    std::uint64_t col = static_cast<std::uint64_t>(c);
    int sign = std::popcount(col & zmask) & 1;
    out(static_cast<Eigen::Index>(col ^ xmask)) = ph * (sign ? -v.amps(c) : v.amps(c));
  }
  v.amps = std::move(out);
}

cmplx overlap(const DenseState& u, const DenseState& v) {
  if (u.n != v.n) throw std::invalid_argument("overlap: dimension mismatch");
  return u.amps.dot(v.amps); // Eigen's dot conjugates the left argument
}

cmplx overlap(const SymbolicState& u, const SymbolicState& v) {
  if (u.op.n != v.op.n) throw std::invalid_argument("overlap: dimension mismatch");
  if (!(u.base == v.base))
    throw std::invalid_argument("overlap: symbolic states must share the base product state");
  PauliString prod = pauli_mul(pauli_adjoint(u.op), v.op);
  return std::conj(u.scale) * v.scale * expectation_product_state(prod, u.base);
}

} // namespace qls
