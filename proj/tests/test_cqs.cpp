#include <cmath>
#include <memory>
#include <random>
#include <unordered_map>

#include "doctest.h"
#include "oracles.hpp"
#include "qls/checks.hpp"
#include "qls/cqs.hpp"
#include "qls/rng.hpp"

using namespace qls;
using namespace qls::testing;

namespace {

// A with eigenvalues cos(theta) on [1/kappa, 1] from two conjugated-unitary
// terms W = V e^{i Theta} V†, A = (W + W†)/2; the exact kappa is controlled.
LinearSystem controlled_kappa_system(int dim, double kappa, std::uint64_t seed) {
  DenseOperatorMatrix V = haar_unitary(dim, seed);
  auto rng = make_rng(seed, 0xC0FFEE);
  std::uniform_real_distribution<double> u(1.0 / kappa, 1.0);
  Eigen::VectorXd costh(dim);
  costh(0) = 1.0;
  costh(1) = 1.0 / kappa;
  for (int i = 2; i < dim; ++i) costh(i) = u(rng);
  Eigen::VectorXcd phase(dim);
  for (int i = 0; i < dim; ++i) phase(i) = std::exp(cmplx(0, std::acos(costh(i))));

  auto W = std::make_shared<DenseOperatorMatrix>();
  W->n = V.n;
  W->m = V.m * phase.asDiagonal() * V.m.adjoint();
  auto Wd = std::make_shared<DenseOperatorMatrix>();
  Wd->n = V.n;
  Wd->m = W->m.adjoint();

  LinearSystem sys;
  sys.A.n = V.n;
  sys.A.backend = Backend::dense;
  sys.A.terms = {{0.5, std::shared_ptr<const DenseOperatorMatrix>(W)},
                 {0.5, std::shared_ptr<const DenseOperatorMatrix>(Wd)}};
  sys.A.hermitian_flag = true;
  sys.A.normalized_flag = true;
  DenseState b;
  b.n = V.n;
  b.amps = Eigen::VectorXcd::Zero(dim);
  b.amps(0) = 1;
  sys.b = b;
  sys.kappa_bound = kappa;
  sys.metadata.family = "custom";
  return sys;
}

double direct_loss(const LinearSystem& sys, const Eigen::VectorXcd& x, LossKind loss) {
  Eigen::MatrixXcd A = assemble_dense(sys.A);
  Eigen::VectorXcd r = A * x - sys.b_dense().amps;
  double v = r.squaredNorm();
  if (loss == LossKind::LT) v += 0.5 * x.squaredNorm();
  return v;
}

// combination vector from a report's paths and alpha, on the dense backend
Eigen::VectorXcd combination_vector(const LinearSystem& sys, const SolveReport& rep) {
  Eigen::VectorXcd b = sys.b_dense().amps;
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(b.size());
  for (std::size_t i = 0; i < rep.chosen_paths.size(); ++i) {
    Eigen::VectorXcd v = b;
    for (int t : rep.chosen_paths[i]) {
      if (sys.A.backend == Backend::pauli) {
        DenseState w;
        w.n = sys.n();
        w.amps = v;
        apply_pauli(std::get<PauliString>(sys.A.terms[t].u), w);
        v = w.amps;
      } else {
        v = std::get<std::shared_ptr<const DenseOperatorMatrix>>(sys.A.terms[t].u)->m * v;
      }
    }
    x += rep.alpha(i) * v;
  }
  return x;
}

} // namespace

TEST_CASE("real embedding reproduces the complex objective") {
  auto rng = make_rng(201);
  std::normal_distribution<double> g;
  for (int it = 0; it < 1000; ++it) {
    const int m = 1 + static_cast<int>(rng() % 5);
    Eigen::MatrixXcd V(2 * m, m);
    for (Eigen::Index i = 0; i < V.rows(); ++i)
      for (Eigen::Index j = 0; j < V.cols(); ++j) V(i, j) = cmplx(g(rng), g(rng));
    Eigen::MatrixXcd M = V.adjoint() * V;
    Eigen::VectorXcd q(m), alpha(m);
    for (int i = 0; i < m; ++i) {
      q(i) = cmplx(g(rng), g(rng));
      alpha(i) = cmplx(g(rng), g(rng));
    }
    QPProblem qp = real_embedding(M, q);
    Eigen::VectorXd z(2 * m);
    z.head(m) = alpha.real();
    z.tail(m) = alpha.imag();
    const double real_obj = z.dot(qp.Qmat * z) - 2.0 * qp.rvec.dot(z);
    const double cplx_obj = alpha.dot(M * alpha).real() - 2.0 * q.dot(alpha).real();
    CHECK(real_obj == doctest::Approx(cplx_obj).epsilon(1e-10));
  }
}

TEST_CASE("qp solution matches a dense least-squares oracle") {
  Estimator est = Estimator::exact();
  LinearSystem sys = gen_pauli_sum_system(5, 6, {-2, 2}, 210);
  std::vector<AnsatzNode> nodes = expand_bfs(sys, 1);
  Subspace sub = build_gram(est, nodes, sys, LossKind::LR);
  QPSolution sol = solve_qp(sub, LossKind::LR);

  // oracle: stack the node columns densely and least-squares against b
  Eigen::MatrixXcd A = assemble_dense(sys.A);
  Eigen::MatrixXcd cols(A.rows(), sub.m());
  for (int i = 0; i < sub.m(); ++i)
    cols.col(i) = to_dense(std::get<SymbolicState>(nodes[i].reduced)).amps;
  Eigen::VectorXcd xls = (A * cols).colPivHouseholderQr().solve(sys.b_dense().amps);
  const double oracle = (A * cols * xls - sys.b_dense().amps).squaredNorm();
  CHECK(sol.loss == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(direct_loss(sys, cols * sol.alpha, LossKind::LR) == doctest::Approx(sol.loss).epsilon(1e-9));
}

TEST_CASE("bfs nodes: rays are xor path sums, reduced states match paths") {
  LinearSystem sys = gen_pauli_sum_system(6, 8, {-2, 2}, 211);
  std::vector<AnsatzNode> nodes = expand_bfs(sys, 3);

  // term rays for xor accumulation
  std::vector<RayKey> term_rays;
  for (const auto& t : sys.A.terms)
    term_rays.push_back(canonical_form(std::get<PauliString>(t.u)).first);

  std::unordered_map<RayKey, int, RayKeyHash> seen;
  for (const auto& node : nodes) {
    REQUIRE(node.ray.has_value());
    RayKey acc = canonical_form(PauliString::identity(6)).first;
    for (int t : node.path)
      for (std::size_t w = 0; w < acc.x.size(); ++w) {
        acc.x[w] ^= term_rays[t].x[w];
        acc.z[w] ^= term_rays[t].z[w];
      }
    CHECK(acc == *node.ray);
    ++seen[*node.ray];
  }
  for (const auto& [ray, cnt] : seen) CHECK(cnt == 1); // deduped

  // reduced symbolic state equals the dense product of path unitaries
  LinearSystem dense = to_dense_backend(sys);
  for (const auto& node : nodes) {
    Eigen::VectorXcd v = sys.b_dense().amps;
    for (int t : node.path) {
      DenseState w;
      w.n = 6;
      w.amps = v;
      apply_pauli(std::get<PauliString>(sys.A.terms[t].u), w);
      v = w.amps;
    }
    CHECK((to_dense(std::get<SymbolicState>(node.reduced)).amps - v).norm() < 1e-12);
  }

  // the dense backend dedups by state (up to phase), which can merge rays
  // that act identically on b; the result is a subset spanning the same space
  std::vector<AnsatzNode> dnodes = expand_bfs(dense, 3);
  REQUIRE(dnodes.size() <= nodes.size());
  for (const auto& dn : dnodes) {
    const auto& dv = std::get<DenseState>(dn.reduced).amps;
    bool matched = false;
    for (const auto& pn : nodes)
      if (std::abs(dv.dot(to_dense(std::get<SymbolicState>(pn.reduced)).amps)) > 1 - 1e-9)
        matched = true;
    CHECK(matched);
  }
  Estimator est = Estimator::exact();
  Subspace ps = build_gram(est, nodes, sys, LossKind::LR);
  Subspace ds = build_gram(est, dnodes, dense, LossKind::LR);
  CHECK(solve_qp(ps, LossKind::LR).loss ==
        doctest::Approx(solve_qp(ds, LossKind::LR).loss).epsilon(1e-9));
}

TEST_CASE("gradient expansion decreases the loss with zero guarantee violations") {
  for (std::uint64_t seed : {301ull, 302ull}) {
    LinearSystem sys = gen_pauli_sum_system(8, 8, {-2, 2}, seed);
    CqsOptions opt;
    opt.strategy = CqsOptions::Strategy::gradient;
    opt.max_iters = 20;
    SolveReport rep = cqs_solve(sys, opt);
    CHECK(rep.decrease_violations == 0);
    for (std::size_t i = 1; i < rep.loss_trace.size(); ++i)
      CHECK(rep.loss_trace[i] <= rep.loss_trace[i - 1] + 1e-12);
    // reported loss equals the honest dense residual of the combination
    CHECK(direct_loss(sys, combination_vector(sys, rep), LossKind::LR) ==
          doctest::Approx(rep.final_loss).epsilon(1e-9));
  }
}

TEST_CASE("condition-bounded systems converge at logarithmic tree depth") {
  // spectrum in [1/3, 1]: depth ceil(kappa ln(kappa/eps)) = 11 at eps = 0.1
  LinearSystem sys = controlled_kappa_system(16, 3.0, 99);
  SpectralBounds sb = spectral_bounds(sys.A);
  CHECK(sb.rho == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(sb.kappa.has_value());
  CHECK(*sb.kappa == doctest::Approx(3.0).epsilon(1e-9));

  const double eps = 0.1;
  const int depth = static_cast<int>(std::ceil(3.0 * std::log(3.0 / eps)));
  CHECK(depth == 11);
  CqsOptions opt;
  opt.strategy = CqsOptions::Strategy::bfs;
  opt.depth = depth;
  SolveReport rep = cqs_solve(sys, opt);
  // the two terms commute, so the tree collapses to 2*depth + 1 distinct states
  CHECK(rep.nodes <= 2 * depth + 1);
  CHECK(rep.final_loss <= eps);
}

TEST_CASE("bfs prefix trace is monotone and consistent") {
  LinearSystem sys = gen_haar_sum_system(32, 3, {-2, 2}, 88);
  CqsOptions opt;
  opt.strategy = CqsOptions::Strategy::bfs;
  opt.depth = 2;
  opt.max_nodes = 10;
  SolveReport rep = cqs_solve(sys, opt);
  CHECK(rep.nodes == 10);
  CHECK(rep.loss_trace.size() == 10);
  for (std::size_t i = 1; i < rep.loss_trace.size(); ++i)
    CHECK(rep.loss_trace[i] <= rep.loss_trace[i - 1] + 1e-12);
  CHECK(rep.final_loss == rep.loss_trace.back());
  CHECK(direct_loss(sys, combination_vector(sys, rep), LossKind::LR) ==
        doctest::Approx(rep.final_loss).epsilon(1e-9));
}

TEST_CASE("chebyshev expansion approximates the regularized inverse") {
  for (int K0 = 2; K0 <= 8; ++K0) {
    std::vector<double> coeffs = chebyshev_tikhonov(K0); // monomial basis, degree K0
    double sup = 0;
    for (int i = -500; i <= 500; ++i) {
      const double z = i / 500.0;
      double poly = 0;
      for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) poly = poly * z + *it;
      sup = std::max(sup, std::abs(poly - z / (2 * z * z + 1)));
    }
    CHECK(sup <= chebyshev_eta(K0));
  }
}

TEST_CASE("closed-form regularized minimum matches the normal equations") {
  LinearSystem sys = gen_haar_sum_system(64, 4, {-2, 2}, 77);
  Eigen::MatrixXcd A = assemble_dense(sys.A);
  Eigen::VectorXcd b = sys.b_dense().amps;
  const Eigen::Index d = A.rows();
  // unrestricted minimizer of ||Ax-b||^2 + 1/2||x||^2
  Eigen::VectorXcd x = (A.adjoint() * A + 0.5 * Eigen::MatrixXcd::Identity(d, d))
                           .ldlt()
                           .solve(A.adjoint() * b);
  const double direct = (A * x - b).squaredNorm() + 0.5 * x.squaredNorm();
  CHECK(min_tikhonov_loss(sys) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("time-grid strategy reaches the accuracy target") {
  LinearSystem sys = controlled_kappa_system(16, 2.0, 101);
  CqsOptions opt;
  opt.strategy = CqsOptions::Strategy::hamiltonian;
  opt.eps = 0.25;
  SolveReport rep = cqs_solve(sys, opt); // kappa from the system
  CHECK(rep.final_loss <= opt.eps);
  CHECK(rep.nodes == static_cast<int>(hamiltonian_time_grid(2.0, 0.25).size()));
}

TEST_CASE("time grid layout and state cap") {
  std::vector<double> ts = hamiltonian_time_grid(2.0, 0.5);
  const double lg = std::log(2.0 / 0.5);
  const int J = static_cast<int>(std::ceil(4.0 * lg * lg / 0.5));
  REQUIRE(static_cast<int>(ts.size()) == 2 * J + 1);
  CHECK(ts[J] == 0.0);
  const double step = 0.5 / (2.0 * lg);
  CHECK(ts[J + 1] == doctest::Approx(step).epsilon(1e-12));
  CHECK(ts[0] == doctest::Approx(-J * step).epsilon(1e-12));

  bool threw = false;
  try {
    hamiltonian_time_grid(100.0, 0.01);
  } catch (const std::exception& e) {
    threw = true;
    CHECK(std::string(e.what()).find("smaller kappa") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("circuit-probability reduction recovers outcome weights") {
  Estimator est = Estimator::exact();
  SUBCASE("identity circuit") {
    std::vector<Eigen::MatrixXcd> circuit{Eigen::MatrixXcd::Identity(8, 8)};
    BqpCheck r = bqp_reduction_check(est, circuit, 3, 1e-9);
    CHECK(r.P0 == doctest::Approx(1.0));
    CHECK(std::abs(r.alpha1 - cmplx(1, 0)) < 1e-9);
    CHECK(std::abs(r.alpha2) < 1e-9);
    CHECK(r.ok);
  }
  SUBCASE("hadamard on the measured qubit") {
    Eigen::Matrix2cd H;
    H << 1, 1, 1, -1;
    H /= std::sqrt(2.0);
    std::vector<Eigen::MatrixXcd> circuit{kron(H, Eigen::MatrixXcd::Identity(4, 4))};
    BqpCheck r = bqp_reduction_check(est, circuit, 3, 1e-9);
    CHECK(r.P0 == doctest::Approx(0.5));
    CHECK(std::abs(r.alpha1 - cmplx(0.5, 0)) < 1e-9);
    CHECK(std::abs(r.alpha2 - cmplx(0.5, 0)) < 1e-9);
    CHECK(r.ok);
  }
  SUBCASE("random circuits") {
    for (int c = 0; c < 5; ++c) {
      std::vector<Eigen::MatrixXcd> circuit{haar_unitary(8, derive_seed(55, c)).m,
                                            haar_unitary(8, derive_seed(56, c)).m};
      BqpCheck r = bqp_reduction_check(est, circuit, 3, 1e-6);
      CHECK(r.ok);
      CHECK(r.P0 + r.P1 == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::abs(r.alpha1 - cmplx(r.P0, 0)) < 1e-6);
      CHECK(std::abs(r.alpha2 - cmplx(r.P1, 0)) < 1e-6);
    }
  }
}

TEST_CASE("provable-guarantee suites pass") {
  // quick members of the acceptance set; the slower ones run there
  CHECK(checks::qp_suite(1).pass);
  CHECK(checks::sampling_suite(1).pass);
}

TEST_CASE("shot-mode solve stays close to the exact trajectory") {
  LinearSystem sys = gen_pauli_sum_system(6, 8, {-2, 2}, 404);
  CqsOptions exact_opt;
  exact_opt.strategy = CqsOptions::Strategy::gradient;
  exact_opt.max_iters = 6;
  SolveReport exact_rep = cqs_solve(sys, exact_opt);

  CqsOptions noisy = exact_opt;
  noisy.mode = EstMode::shots;
  noisy.shots = 2000000;
  noisy.seed = 5;
  SolveReport noisy_rep = cqs_solve(sys, noisy);
  CHECK(noisy_rep.shots_used > 0);
  REQUIRE(noisy_rep.shots_trace.size() == noisy_rep.loss_trace.size());
  CHECK(noisy_rep.shots_trace.back() == noisy_rep.shots_used);
  // the honest dense loss of the noisy combination is near the exact one
  const double honest = direct_loss(sys, combination_vector(sys, noisy_rep), LossKind::LR);
  CHECK(honest <= exact_rep.loss_trace[std::min<std::size_t>(noisy_rep.loss_trace.size(),
                                                             exact_rep.loss_trace.size()) -
                                       1] +
                      0.05);
}
