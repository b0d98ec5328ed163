#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qls/rng.hpp"
#include "qls/states.hpp"

using namespace qls;
using namespace qls::testing;

TEST_CASE("dense index convention: qubit 0 is the most significant bit") {
  // |1> on qubit 0 of three -> basis index 100_2 = 4
  ProductState s = ProductState::zero(3);
  s.amps[0] = {cmplx(0, 0), cmplx(1, 0)};
  DenseState d = to_dense(s);
  CHECK(d.amps(4) == cmplx(1, 0));
  CHECK(d.amps.cwiseAbs().sum() == 1.0);
  DenseState b = DenseState::basis(3, 4);
  CHECK((b.amps - d.amps).norm() == 0.0);
}

TEST_CASE("product-state conversion matches the Kronecker oracle") {
  auto rng = make_rng(31);
  for (int it = 0; it < 100; ++it) {
    ProductState s = random_product_state(5, rng);
    CHECK((to_dense(s).amps - oracle_vector(s)).norm() < 1e-14);
  }
}

TEST_CASE("pauli application on dense states matches the oracle matrix") {
  auto rng = make_rng(32);
  for (int it = 0; it < 200; ++it) {
    PauliString p = random_pauli(4, rng);
    ProductState s = random_product_state(4, rng);
    DenseState v = to_dense(s);
    apply_pauli(p, v);
    CHECK((v.amps - oracle_matrix(p) * oracle_vector(s)).norm() < 1e-14);
  }
}

TEST_CASE("dense_matrix equals the oracle") {
  auto rng = make_rng(33);
  for (int it = 0; it < 200; ++it) {
    PauliString p = random_pauli(3, rng);
    CHECK((dense_matrix(p) - oracle_matrix(p)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("product-state expectations match dense bra-kets") {
  auto rng = make_rng(34);
  for (int it = 0; it < 300; ++it) {
    PauliString p = random_pauli(3, rng);
    ProductState s = random_product_state(3, rng);
    Eigen::VectorXcd v = oracle_vector(s);
    cmplx expect = v.dot(oracle_matrix(p) * v);
    CHECK(std::abs(expectation_product_state(p, s) - expect) < 1e-12);
  }
}

TEST_CASE("symbolic overlaps agree with dense overlaps") {
  auto rng = make_rng(35);
  std::uniform_int_distribution<int> nq(1, 10);
  std::uniform_real_distribution<double> ur(-1, 1);
  for (int it = 0; it < 1000; ++it) {
    const int n = nq(rng);
    ProductState base = random_product_state(n, rng);
    SymbolicState u{base, random_pauli(n, rng), cmplx(ur(rng), ur(rng))};
    SymbolicState v{base, random_pauli(n, rng), cmplx(ur(rng), ur(rng))};
    CHECK(std::abs(overlap(u, v) - overlap(to_dense(u), to_dense(v))) < 1e-9);
  }
}

TEST_CASE("overlap conjugates its first argument") {
  DenseState u = DenseState::basis(1, 0), v = DenseState::basis(1, 0);
  u.amps(0) = cmplx(0, 1);
  CHECK(std::abs(overlap(u, v) - cmplx(0, -1)) < 1e-15);
}

TEST_CASE("symbolic-to-dense honors op and scale") {
  auto rng = make_rng(36);
  for (int it = 0; it < 100; ++it) {
    ProductState base = random_product_state(4, rng);
    SymbolicState s{base, random_pauli(4, rng), cmplx(0.5, -0.25)};
    Eigen::VectorXcd want = s.scale * (oracle_matrix(s.op) * oracle_vector(base));
    CHECK((to_dense(s).amps - want).norm() < 1e-14);
  }
}

TEST_CASE("expectation bails out to zero on orthogonal single-qubit factors") {
  // <0|X|0> = 0 regardless of the other qubits
  PauliString p = PauliString::from_letters("XZZZZZ");
  ProductState s = ProductState::zero(6);
  CHECK(expectation_product_state(p, s) == cmplx(0, 0));
}

TEST_CASE("product states validate per-qubit norms") {
  ProductState s = ProductState::zero(2);
  s.validate();
  s.amps[1] = {cmplx(0.9, 0), cmplx(0.9, 0)};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
