#include "qls/pauli.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace qls {

namespace {

int words_for(int n) { return (n + 63) / 64; }

void check_n(int n) {
  if (n < 1 || n > PauliString::kMaxQubits)
    throw std::invalid_argument("PauliString: qubit count out of range [1, 1024]: " +
                                std::to_string(n));
}

int popcount_and(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  int c = 0;
  for (std::size_t w = 0; w < a.size(); ++w) c += std::popcount(a[w] & b[w]);
  return c;
}

} // namespace

PauliString PauliString::identity(int n) {
  check_n(n);
  PauliString p;
  p.n = n;
  p.x_bits.assign(words_for(n), 0);
  p.z_bits.assign(words_for(n), 0);
  return p;
}

PauliString PauliString::from_letters(std::string_view letters) {
  PauliString p = identity(static_cast<int>(letters.size()));
  int ys = 0;
  for (int j = 0; j < p.n; ++j) {
    switch (letters[j]) {
      case 'I': break;
      case 'X': p.set_x(j, true); break;
      case 'Z': p.set_z(j, true); break;
      case 'Y': p.set_x(j, true); p.set_z(j, true); ++ys; break;
      default:
        throw std::invalid_argument(std::string("PauliString: bad letter '") + letters[j] + "'");
    }
  }
  p.phase_pow = ys % 4;
  return p;
}

void PauliString::set_x(int j, bool v) {
  std::uint64_t m = 1ULL << (j & 63);
  if (v) x_bits[j >> 6] |= m; else x_bits[j >> 6] &= ~m;
}

void PauliString::set_z(int j, bool v) {
  std::uint64_t m = 1ULL << (j & 63);
  if (v) z_bits[j >> 6] |= m; else z_bits[j >> 6] &= ~m;
}

bool PauliString::is_identity() const {
  for (std::size_t w = 0; w < x_bits.size(); ++w)
    if (x_bits[w] | z_bits[w]) return false;
  return true;
}

bool PauliString::is_hermitian() const {
  // P† = i^(-p + 2*|x AND z|) X^x Z^z; Hermitian iff p + |x AND z| is even.
  return ((phase_pow + popcount_and(x_bits, z_bits)) % 2) == 0;
}

std::string PauliString::letters() const {
  int ys = 0;
  std::string out(static_cast<std::size_t>(n), 'I');
  for (int j = 0; j < n; ++j) {
    bool xb = x(j), zb = z(j);
    if (xb && zb) { out[j] = 'Y'; ++ys; }
    else if (xb) out[j] = 'X';
    else if (zb) out[j] = 'Z';
  }
  if (((phase_pow - ys) % 4 + 4) % 4 != 0)
    throw std::logic_error("PauliString::letters: residual global phase, not a plain letter string");
  return out;
}

PauliString pauli_mul(const PauliString& p, const PauliString& q) {
  if (p.n != q.n)
    throw std::invalid_argument("pauli_mul: dimension mismatch (" + std::to_string(p.n) +
                                " vs " + std::to_string(q.n) + ")");
  PauliString r = PauliString::identity(p.n);
  // Z^{z_p} X^{x_q} = (-1)^{|z_p AND x_q|} X^{x_q} Z^{z_p}
  int swaps = popcount_and(p.z_bits, q.x_bits);
  r.phase_pow = (p.phase_pow + q.phase_pow + 2 * swaps) % 4;
  for (std::size_t w = 0; w < r.x_bits.size(); ++w) {
    r.x_bits[w] = p.x_bits[w] ^ q.x_bits[w];
    r.z_bits[w] = p.z_bits[w] ^ q.z_bits[w];
  }
  return r;
}

PauliString pauli_adjoint(const PauliString& p) {
  PauliString r = p;
  r.phase_pow = ((-p.phase_pow + 2 * popcount_and(p.x_bits, p.z_bits)) % 4 + 4) % 4;
  return r;
}

std::size_t RayKeyHash::operator()(const RayKey& k) const noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  for (auto w : k.x) mix(w);
  for (auto w : k.z) mix(~w);
  return static_cast<std::size_t>(h);
}

std::pair<RayKey, int> canonical_form(const PauliString& p) {
  return {RayKey{p.x_bits, p.z_bits}, ((p.phase_pow % 4) + 4) % 4};
}

std::string format_term(double coeff, const PauliString& p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", coeff);
  return std::string(buf) + " * " + p.letters();
}

std::pair<double, PauliString> parse_term(std::string_view text) {
  auto star = text.find('*');
  if (star == std::string_view::npos)
    throw std::invalid_argument("parse_term: expected 'coeff * LETTERS', got: " + std::string(text));
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  std::string_view num = trim(text.substr(0, star));
  std::string_view let = trim(text.substr(star + 1));
  double coeff = 0;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), coeff);
  if (ec != std::errc() || ptr != num.data() + num.size())
    throw std::invalid_argument("parse_term: bad coefficient: " + std::string(num));
  return {coeff, PauliString::from_letters(let)};
}

} // namespace qls
