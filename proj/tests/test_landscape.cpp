#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qls/landscape.hpp"
#include "qls/operators.hpp"
#include "qls/rng.hpp"

using namespace qls;
using namespace qls::testing;

namespace {

std::vector<int> mask(int n, int w) {
  std::vector<int> k(n, 0);
  for (int i = 0; i < w; ++i) k[i] = 1;
  return k;
}

// flip-k system: A = product of X on the flipped qubits, b = |0^n>
LinearSystem flip_system(const std::vector<int>& k) {
  const int n = static_cast<int>(k.size());
  std::string word(n, 'I');
  for (int j = 0; j < n; ++j)
    if (k[j]) word[j] = 'X';
  LinearSystem sys;
  sys.A.n = n;
  sys.A.backend = Backend::pauli;
  sys.A.terms = {{1.0, PauliString::from_letters(word)}};
  sys.A.hermitian_flag = true;
  sys.A.normalized_flag = true;
  sys.b = ProductState::zero(n);
  sys.metadata.family = "custom";
  return sys;
}

} // namespace

TEST_CASE("toy cut endpoints and midpoint are exact") {
  const int n = 100, w = 50;
  std::vector<double> grid{0.0, 0.5, 1.0};
  std::vector<double> vals = toy_loss_cut(n, mask(n, w), LossKind::LH, grid);
  CHECK(vals[0] == 1.0);
  CHECK(vals[2] == 0.0);
  CHECK(std::abs(vals[1] - (1.0 - std::pow(2.0, -w))) < 1e-12);
}

TEST_CASE("toy losses match dense bra-kets on small systems") {
  auto rng = make_rng(501);
  std::uniform_real_distribution<double> ang(0, 2 * M_PI);
  std::uniform_int_distribution<int> nq(2, 8), bit(0, 1);
  for (int it = 0; it < 100; ++it) {
    const int n = nq(rng);
    std::vector<int> k(n);
    int wsum = 0;
    for (int j = 0; j < n; ++j) wsum += (k[j] = bit(rng));
    if (wsum == 0) k[0] = 1;

    Eigen::VectorXd th(n);
    for (int j = 0; j < n; ++j) th(j) = ang(rng);
    ProductAnsatz pa;
    pa.n = n;
    pa.thetas = th;
    Eigen::VectorXcd x = to_dense(product_ansatz_state(pa)).amps;

    LinearSystem sys = flip_system(k);
    Eigen::MatrixXcd A = assemble_dense(sys.A);
    Eigen::VectorXcd b = sys.b_dense().amps;
    // A is an X-product: A^2 = 1, so L_H = 1 - |<b|A|x>|^2
    const double lh = 1.0 - std::norm(b.dot(A * x));
    const double lr = (A * x - b).squaredNorm();
    CHECK(toy_loss_at(k, th, LossKind::LH) == doctest::Approx(lh).epsilon(1e-10));
    CHECK(toy_loss_at(k, th, LossKind::LR) == doctest::Approx(lr).epsilon(1e-10));
    CHECK(toy_loss_at(k, th, LossKind::LH) >= -1e-12);
    CHECK(toy_loss_at(k, th, LossKind::LH) <= 1 + 1e-12);
    CHECK(toy_loss_at(k, th, LossKind::LR) >= -1e-12);
    CHECK(toy_loss_at(k, th, LossKind::LR) <= 4 + 1e-12);
  }
}

TEST_CASE("gradient norm matches finite differences") {
  auto rng = make_rng(502);
  std::uniform_real_distribution<double> ang(0, 2 * M_PI);
  const int n = 4;
  std::vector<int> k = mask(n, 2);
  for (int it = 0; it < 20; ++it) {
    Eigen::VectorXd th(n);
    for (int j = 0; j < n; ++j) th(j) = ang(rng);
    double want = 0;
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd tp = th, tm = th;
      tp(i) += h;
      tm(i) -= h;
      want = std::max(want, std::abs(toy_loss_at(k, tp, LossKind::LH) -
                                     toy_loss_at(k, tm, LossKind::LH)) /
                                (2 * h));
    }
    CHECK(toy_gradient_norm(n, k, th) == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("random restarts at n = 100 sit on an exponentially flat plateau") {
  const int n = 100;
  std::vector<int> k = mask(n, 50);
  auto rng = make_rng(503);
  std::uniform_real_distribution<double> ang(0, 2 * M_PI);
  int flat = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    Eigen::VectorXd th(n);
    for (int j = 0; j < n; ++j) th(j) = ang(rng);
    if (toy_gradient_norm(n, k, th) <= std::pow(2.0, -20)) ++flat;
  }
  CHECK(flat >= 95);
}

TEST_CASE("interpolated cut agrees with the dense hamiltonian") {
  const int n = 4;
  std::vector<int> k = mask(n, 2);
  LinearSystem sys = flip_system(k);
  std::vector<double> sg{0.0, 0.3, 0.5, 0.8, 1.0};
  std::vector<double> lg{0.0, 0.2, 0.5, 0.7, 1.0};
  Eigen::MatrixXd cut = adiabatic_cut(n, k, sg, lg);
  for (std::size_t si = 0; si < sg.size(); ++si) {
    Eigen::MatrixXcd H = build_H(sg[si], sys).H.m;
    for (std::size_t li = 0; li < lg.size(); ++li) {
      ProductAnsatz pa;
      pa.n = n;
      pa.thetas = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < n; ++j) pa.thetas(j) = k[j] ? lg[li] * M_PI / 2 : 0.0;
      pa.ancilla_theta = lg[li] * M_PI / 2;
      Eigen::VectorXcd psi = to_dense(product_ansatz_state(pa)).amps;
      const double want = psi.dot(H * psi).real();
      CHECK(cut(si, li) == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("interpolated cut endpoints") {
  const int n = 6;
  std::vector<int> k = mask(n, 3);
  Eigen::MatrixXd cut = adiabatic_cut(n, k, {0.0, 1.0}, {0.0, 1.0});
  CHECK(cut(0, 0) == doctest::Approx(0.0));        // s=0: start is the ground state
  CHECK(cut(1, 1) == doctest::Approx(0.0));        // s=1: solution reached
  CHECK(cut(1, 0) == doctest::Approx(1.0));        // s=1 at lambda=0: loss s^2
  CHECK(cut(0, 1) == doctest::Approx(1.0));        // s=0 at lambda=1
}

TEST_CASE("interpolated path descends for s past one half") {
  const int n = 5;
  std::vector<int> k = mask(n, 3);
  Eigen::MatrixXd cut = adiabatic_cut(n, k, {0.75}, {0.0, 1.0});
  CHECK(cut(0, 1) < cut(0, 0)); // (1-s)^2 < s^2 at s = 0.75
}

TEST_CASE("local loss instance: identity circuit gives a letter-count loss") {
  LocalLossInstance inst = make_local_loss_instance(4, 0, 9);
  CHECK(inst.gates.empty());
  CHECK(!inst.a.is_identity());
  Eigen::VectorXd th = Eigen::VectorXd::Zero(4);
  // x = |0000>, so P(qubit i = 0 in A|x>) is 1 unless A flips qubit i
  int flips = 0;
  for (int j = 0; j < 4; ++j)
    if (inst.a.x(j)) ++flips;
  CHECK(local_loss_value(inst, th) == doctest::Approx(flips / 4.0).epsilon(1e-12));
}

TEST_CASE("local loss value is a proper mean of marginals") {
  auto rng = make_rng(504);
  std::uniform_real_distribution<double> ang(0, 2 * M_PI);
  LocalLossInstance inst = make_local_loss_instance(5, 25, 10);
  CHECK(static_cast<int>(inst.gates.size()) == 25);
  for (int it = 0; it < 10; ++it) {
    Eigen::VectorXd th(5);
    for (int j = 0; j < 5; ++j) th(j) = ang(rng);
    const double v = local_loss_value(inst, th);
    CHECK(v >= -1e-12);
    CHECK(v <= 1 + 1e-12);
  }
}

TEST_CASE("local loss concentrates around one half as qubits grow") {
  LocalLossStats small = local_loss_concentration(4, 16, 60, 11);
  LocalLossStats large = local_loss_concentration(8, 64, 60, 11);
  CHECK(static_cast<int>(small.losses.size()) == 60);
  CHECK(small.variance > large.variance);
  CHECK(large.median_dev_half < small.median_dev_half + 0.25); // coarse sanity
  CHECK(!small.grad_maxabs.empty());
}
