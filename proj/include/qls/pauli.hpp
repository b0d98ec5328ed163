#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qls {

// n-qubit Pauli operator P = i^phase_pow * prod_j X_j^{x_j} Z_j^{z_j}
// (X to the left of Z on each qubit; Y enters as i*XZ).
// Bits are packed into 64-bit words, qubit j at word j/64, bit j%64.
struct PauliString {
  int n = 0;
  int phase_pow = 0; // mod 4
  std::vector<std::uint64_t> x_bits;
  std::vector<std::uint64_t> z_bits;

  static constexpr int kMaxQubits = 1024;

  static PauliString identity(int n);
  // letters: one of I,X,Y,Z per qubit, index 0 = qubit 0 (leftmost).
  static PauliString from_letters(std::string_view letters);

  bool x(int j) const { return (x_bits[j >> 6] >> (j & 63)) & 1ULL; }
  bool z(int j) const { return (z_bits[j >> 6] >> (j & 63)) & 1ULL; }
  void set_x(int j, bool v);
  void set_z(int j, bool v);

  bool is_identity() const; // up to phase: x_bits == z_bits == 0
  bool is_hermitian() const;
  // Letter representation; requires phase_pow to equal the Y-count mod 4,
  // i.e. the string was assembled from letters (throws otherwise).
  std::string letters() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
};

PauliString pauli_mul(const PauliString& p, const PauliString& q);
PauliString pauli_adjoint(const PauliString& p);

inline std::complex<double> phase_value(int phase_pow) {
  static const std::complex<double> tab[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return tab[((phase_pow % 4) + 4) % 4];
}

// Ray = the operator up to global phase; the dedup key for tree nodes.
struct RayKey {
  std::vector<std::uint64_t> x, z;
  friend bool operator==(const RayKey&, const RayKey&) = default;
};

struct RayKeyHash {
  std::size_t operator()(const RayKey& k) const noexcept;
};

// Splits p into (ray, phase): strings equal up to global phase share the ray.
std::pair<RayKey, int> canonical_form(const PauliString& p);

// Text form "coeff * LETTERS", e.g. "-2.0 * XIZY".
std::string format_term(double coeff, const PauliString& p);
std::pair<double, PauliString> parse_term(std::string_view text);

} // namespace qls
