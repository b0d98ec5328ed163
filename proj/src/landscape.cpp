#include "qls/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qls/operators.hpp"
#include "qls/rng.hpp"

namespace qls {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

int weight(const std::vector<int>& k) {
  int w = 0;
  for (int b : k)
    if (b) ++w;
  return w;
}

double re_pow_minus_i(int m) { // Re[(-i)^m]
  switch (((m % 4) + 4) % 4) {
    case 0: return 1.0;
    case 2: return -1.0;
    default: return 0.0;
  }
}

} // namespace

ProductState product_ansatz_state(const ProductAnsatz& a) {
  if (a.n != a.thetas.size()) throw std::invalid_argument("product_ansatz_state: theta count");
  ProductState s;
  s.n = a.n + (a.ancilla_theta ? 1 : 0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  if (a.ancilla_theta) {
    // cos t |-> - i sin t |+> in the 0/1 basis
    const double c = std::cos(*a.ancilla_theta), sn = std::sin(*a.ancilla_theta);
    s.amps.push_back({cmplx(c, -sn) * inv_sqrt2, cmplx(-c, -sn) * inv_sqrt2});
  }
  for (int j = 0; j < a.n; ++j)
    s.amps.push_back({cmplx(std::cos(a.thetas(j)), 0), cmplx(0, -std::sin(a.thetas(j)))});
  return s;
}

double toy_loss_at(const std::vector<int>& k, const Eigen::VectorXd& thetas, LossKind loss) {
  const int n = static_cast<int>(k.size());
  if (thetas.size() != n) throw std::invalid_argument("toy_loss_at: theta count");
  if (loss == LossKind::LT) throw std::invalid_argument("toy_loss_at: LR or LH only");
  // LH path: 1 - prod m_j with m_j = sin^2 (k_j = 1) or cos^2 (k_j = 0)
  double log_prod = 0;
  cmplx amp = 1; // <b|A|x> for the LR path
  for (int j = 0; j < n; ++j) {
    const double c = std::cos(thetas(j)), sn = std::sin(thetas(j));
    const double m = k[j] ? sn * sn : c * c;
    log_prod += std::log(m);
    amp *= k[j] ? cmplx(0, -sn) : cmplx(c, 0);
  }
  if (loss == LossKind::LR) return 2.0 - 2.0 * amp.real();
  return 1.0 - std::exp(log_prod);
}

std::vector<double> toy_loss_cut(int n, const std::vector<int>& k, LossKind loss,
                                 const std::vector<double>& lambda_grid) {
  if (static_cast<int>(k.size()) != n) throw std::invalid_argument("toy_loss_cut: k length");
  std::vector<double> out;
  out.reserve(lambda_grid.size());
  Eigen::VectorXd th(n);
  for (double lam : lambda_grid) {
    for (int j = 0; j < n; ++j) th(j) = k[j] ? lam * kHalfPi : 0.0;
    out.push_back(toy_loss_at(k, th, loss));
  }
  return out;
}

double toy_gradient_norm(int n, const std::vector<int>& k, const Eigen::VectorXd& theta0) {
  if (static_cast<int>(k.size()) != n || theta0.size() != n)
    throw std::invalid_argument("toy_gradient_norm: length mismatch");
  // |d LH / d theta_i| = |sin 2theta_i| * prod_{j != i} m_j; prefix/suffix
  // log sums keep the n=100 case away from underflow
  std::vector<double> lg(n);
  for (int j = 0; j < n; ++j) {
    const double c = std::cos(theta0(j)), sn = std::sin(theta0(j));
    lg[j] = std::log(k[j] ? sn * sn : c * c);
  }
  std::vector<double> pre(n + 1, 0.0), suf(n + 1, 0.0);
  for (int j = 0; j < n; ++j) pre[j + 1] = pre[j] + lg[j];
  for (int j = n - 1; j >= 0; --j) suf[j] = suf[j + 1] + lg[j];
  double best = 0;
  for (int i = 0; i < n; ++i) {
    const double rest = pre[i] + suf[i + 1];
    best = std::max(best, std::abs(std::sin(2.0 * theta0(i))) * std::exp(rest));
  }
  return best;
}

Eigen::MatrixXd adiabatic_cut(int n, const std::vector<int>& k,
                              const std::vector<double>& s_grid,
                              const std::vector<double>& lambda_grid) {
  if (static_cast<int>(k.size()) != n) throw std::invalid_argument("adiabatic_cut: k length");
  const int w = weight(k);
  const double rho = re_pow_minus_i(w + 1); // cross-term sign
  Eigen::MatrixXd out(s_grid.size(), lambda_grid.size());
  for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
    const double c = std::cos(lambda_grid[li] * kHalfPi);
    const double sn = std::sin(lambda_grid[li] * kHalfPi);
    // ancilla contributes one more cos/sin factor than the w flipped qubits
    const double f = std::exp(2.0 * (w + 1) * std::log(std::abs(c)));
    const double g = std::exp(2.0 * (w + 1) * std::log(std::abs(sn)));
    const double h = rho * std::exp((w + 1) * (std::log(std::abs(c)) + std::log(std::abs(sn))));
    for (std::size_t si = 0; si < s_grid.size(); ++si) {
      const double s = s_grid[si];
      const double cs = 1.0 - 2.0 * s + 2.0 * s * s;
      out(si, li) = cs - (1.0 - s) * (1.0 - s) * f - s * s * g - 2.0 * s * (1.0 - s) * h;
    }
  }
  return out;
}

// ---- local-loss concentration ------------------------------------------------

namespace {

void apply_two_qubit(Eigen::VectorXcd& v, int n, int qa, int qb, const Eigen::Matrix4cd& g,
                     bool adjoint) {
  const Eigen::Index ba = Eigen::Index(1) << (n - 1 - qa);
  const Eigen::Index bb = Eigen::Index(1) << (n - 1 - qb);
  const Eigen::Matrix4cd m = adjoint ? g.adjoint() : g;
  const Eigen::Index dim = v.size();
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    if ((idx & ba) || (idx & bb)) continue;
    const Eigen::Index at[4] = {idx, idx | bb, idx | ba, idx | ba | bb};
    Eigen::Vector4cd in;
    for (int t = 0; t < 4; ++t) in(t) = v(at[t]);
    Eigen::Vector4cd outv = m * in;
    for (int t = 0; t < 4; ++t) v(at[t]) = outv(t);
  }
}

} // namespace

LocalLossInstance make_local_loss_instance(int n, int circuit_depth, std::uint64_t seed) {
  if (n < 2 || n > 12) throw std::invalid_argument("make_local_loss_instance: need 2 <= n <= 12");
  if (circuit_depth < 0) throw std::invalid_argument("make_local_loss_instance: negative depth");
  LocalLossInstance inst;
  inst.n = n;
  // brickwork wire pattern, alternating even/odd layers, until the target
  // two-qubit gate count is reached
  int layer = 0;
  while (static_cast<int>(inst.wires.size()) < circuit_depth) {
    for (int a = layer % 2; a + 1 < n; a += 2) {
      if (static_cast<int>(inst.wires.size()) >= circuit_depth) break;
      inst.wires.emplace_back(a, a + 1);
    }
    ++layer;
  }
  for (std::size_t g = 0; g < inst.wires.size(); ++g)
    inst.gates.push_back(haar_unitary(4, derive_seed(seed, 0x4c4f43u + g)).m);

  auto rng = make_rng(seed, 0x4c4f4341u);
  std::string letters(n, 'I');
  const char alphabet[4] = {'I', 'X', 'Y', 'Z'};
  do {
    for (int j = 0; j < n; ++j) letters[j] = alphabet[rng() % 4];
  } while (letters.find_first_not_of('I') == std::string::npos);
  inst.a = PauliString::from_letters(letters);
  return inst;
}

double local_loss_value(const LocalLossInstance& inst, const Eigen::VectorXd& thetas) {
  const int n = inst.n;
  if (thetas.size() != n) throw std::invalid_argument("local_loss_value: theta count");
  ProductAnsatz pa;
  pa.n = n;
  pa.thetas = thetas;
  DenseState phi = to_dense(product_ansatz_state(pa));
  apply_pauli(inst.a, phi);
  for (std::size_t g = inst.gates.size(); g-- > 0;)
    apply_two_qubit(phi.amps, n, inst.wires[g].first, inst.wires[g].second, inst.gates[g], true);

  const Eigen::Index dim = phi.amps.size();
  double sum_p0 = 0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Index bit = Eigen::Index(1) << (n - 1 - i);
    double p = 0;
    for (Eigen::Index idx = 0; idx < dim; ++idx)
      if (!(idx & bit)) p += std::norm(phi.amps(idx));
    sum_p0 += p;
  }
  return 1.0 - sum_p0 / n;
}

LocalLossStats local_loss_concentration(int n, int circuit_depth, int trials,
                                        std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("local_loss_concentration: trials < 1");
  LocalLossInstance inst = make_local_loss_instance(n, circuit_depth, seed);
  auto rng = make_rng(seed, 0x54484554u);
  std::uniform_real_distribution<double> uang(0.0, 2.0 * std::numbers::pi);

  LocalLossStats st;
  const int grad_trials = std::min(trials, 20);
  const double hstep = 1e-5;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd th(n);
    for (int j = 0; j < n; ++j) th(j) = uang(rng);
    st.losses.push_back(local_loss_value(inst, th));
    if (t < grad_trials) {
      double gmax = 0;
      Eigen::VectorXd tp = th;
      for (int j = 0; j < n; ++j) {
        tp(j) = th(j) + hstep;
        const double up = local_loss_value(inst, tp);
        tp(j) = th(j) - hstep;
        const double dn = local_loss_value(inst, tp);
        tp(j) = th(j);
        gmax = std::max(gmax, std::abs(up - dn) / (2.0 * hstep));
      }
      st.grad_maxabs.push_back(gmax);
    }
  }
  for (double v : st.losses) st.mean += v;
  st.mean /= trials;
  for (double v : st.losses) st.variance += (v - st.mean) * (v - st.mean);
  st.variance /= std::max(1, trials - 1);
  std::vector<double> dev;
  dev.reserve(st.losses.size());
  for (double v : st.losses) dev.push_back(std::abs(v - 0.5));
  std::nth_element(dev.begin(), dev.begin() + dev.size() / 2, dev.end());
  st.median_dev_half = dev[dev.size() / 2];
  return st;
}

} // namespace qls
