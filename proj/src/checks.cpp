#include "qls/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "qls/cqs.hpp"
#include "qls/rng.hpp"

namespace qls::checks {

namespace {

// stacked real least-squares loss oracle: min over complex alpha of
// ||V alpha - b||^2 (+ 1/2 ||U alpha||^2 for LT) via QR on the real form
double stacked_ls_loss(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& U,
                       const Eigen::VectorXcd& b, LossKind loss) {
  const Eigen::Index d = V.rows(), m = V.cols();
  const Eigen::Index rows = loss == LossKind::LT ? 4 * d : 2 * d;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(rows, 2 * m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  G.block(0, 0, d, m) = V.real();
  G.block(0, m, d, m) = -V.imag();
  G.block(d, 0, d, m) = V.imag();
  G.block(d, m, d, m) = V.real();
  rhs.head(d) = b.real();
  rhs.segment(d, d) = b.imag();
  if (loss == LossKind::LT) {
    const double w = 1.0 / std::sqrt(2.0);
    G.block(2 * d, 0, d, m) = w * U.real();
    G.block(2 * d, m, d, m) = -w * U.imag();
    G.block(3 * d, 0, d, m) = w * U.imag();
    G.block(3 * d, m, d, m) = w * U.real();
  }
  Eigen::VectorXd sol = G.colPivHouseholderQr().solve(rhs);
  return (G * sol - rhs).squaredNorm();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

} // namespace

SuiteResult decrease_suite(std::uint64_t seed) {
  SuiteResult res{"guaranteed-decrease", false, ""};
  int violations = 0, steps = 0;
  for (int i = 0; i < 20; ++i) {
    LinearSystem sys = i < 10
                           ? gen_haar_sum_system(64, 10, {-2, 2}, derive_seed(seed, i))
                           : gen_pauli_sum_system(20, 8, {-2, 2}, derive_seed(seed, 100 + i));
    CqsOptions opt;
    opt.strategy = CqsOptions::Strategy::gradient;
    opt.loss = LossKind::LR;
    opt.max_iters = i < 10 ? 15 : 10;
    opt.tol = 1e-12;
    SolveReport rep = cqs_solve(sys, opt);
    violations += rep.decrease_violations;
    steps += static_cast<int>(rep.gradient_overlaps.size());
  }
  res.pass = violations == 0;
  res.detail = "20 runs, " + std::to_string(steps) + " expansion steps, " +
               std::to_string(violations) + " decrease violations";
  return res;
}

SuiteResult depth_suite(std::uint64_t seed) {
  SuiteResult res{"depth-bound", false, ""};
  struct Case {
    double eps;
    int depth;
  };
  // ceil(0.76 ln(1/2eps)): eps=0.1 -> 2, eps=0.02 -> 3; depth 4 re-checked
  // against the tighter eps as well.
  const Case cases[] = {{0.1, 2}, {0.02, 3}, {0.02, 4}};
  double worst = -1e300;
  int fails = 0;
  for (int i = 0; i < 20; ++i) {
    LinearSystem sys = gen_pauli_sum_system(6, 8, {-2, 2}, derive_seed(seed, 200 + i));
    const double lt_min = min_tikhonov_loss(sys);
    for (const Case& c : cases) {
      CqsOptions opt;
      opt.strategy = CqsOptions::Strategy::bfs;
      opt.loss = LossKind::LT;
      opt.depth = c.depth;
      SolveReport rep = cqs_solve(sys, opt);
      double margin = rep.final_loss - lt_min - c.eps;
      worst = std::max(worst, margin);
      if (margin > 1e-9) ++fails;
    }
  }
  res.pass = fails == 0;
  res.detail = "20 systems x 3 depth cases, worst loss-gap margin " + fmt(worst) +
               " (must be <= 0), " + std::to_string(fails) + " failures";
  return res;
}

SuiteResult qp_suite(std::uint64_t seed) {
  SuiteResult res{"qp-optimality", false, ""};
  double worst = 0;
  int fails = 0;
  for (int i = 0; i < 50; ++i) {
    LinearSystem sys = gen_haar_sum_system(64, 4, {-2, 2}, derive_seed(seed, 300 + i));
    std::vector<AnsatzNode> pool = expand_bfs(sys, 2);
    auto rng = make_rng(seed, 400 + i);
    std::shuffle(pool.begin(), pool.end(), rng);
    const int m = 1 + static_cast<int>(rng() % 6);
    pool.resize(std::min<std::size_t>(pool.size(), m));

    Estimator est = Estimator::exact();
    Subspace sub = build_gram(est, pool, sys, LossKind::LT);
    Eigen::MatrixXcd Ad = assemble_dense(sys.A);
    Eigen::MatrixXcd U(Ad.rows(), sub.m());
    for (int j = 0; j < sub.m(); ++j)
      U.col(j) = std::get<DenseState>(sub.nodes[j].reduced).amps;
    Eigen::MatrixXcd V = Ad * U;
    const Eigen::VectorXcd b = sys.b_dense().amps;

    for (LossKind loss : {LossKind::LR, LossKind::LT}) {
      QPSolution sol = solve_qp(sub, loss);
      double oracle = stacked_ls_loss(V, U, b, loss);
      double err = std::abs(sol.loss - oracle);
      worst = std::max(worst, err);
      if (err > 1e-9) ++fails;
    }
  }
  res.pass = fails == 0;
  res.detail = "50 systems x 2 losses, worst |qp - least-squares| = " + fmt(worst);
  return res;
}

SuiteResult sampling_suite(std::uint64_t seed) {
  SuiteResult res{"shot-suboptimality-scaling", false, ""};
  // pick a system whose exact 4-node Gram is well-conditioned so the 1/T
  // constant is stable across repeats
  LinearSystem sys;
  std::vector<AnsatzNode> nodes;
  Subspace exact_sub;
  double lmin = 0;
  Estimator exact = Estimator::exact();
  for (int t = 0; t < 100; ++t) {
    sys = gen_pauli_sum_system(4, 8, {-2, 2}, derive_seed(seed, 500 + t));
    nodes = expand_bfs(sys, 1);
    if (nodes.size() < 4) continue;
    nodes.resize(4);
    exact_sub = build_gram(exact, nodes, sys, LossKind::LR);
    Eigen::MatrixXcd M = 0.5 * (exact_sub.gram_AA + exact_sub.gram_AA.adjoint().eval());
    lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(M).eigenvalues().minCoeff();
    if (lmin >= 0.05) break;
  }
  if (lmin < 0.05) {
    res.detail = "no well-conditioned instance found";
    return res;
  }
  QPSolution best = solve_qp(exact_sub, LossKind::LR);

  const long long Ts[] = {100, 1000, 10000};
  double means[3] = {0, 0, 0};
  for (int ti = 0; ti < 3; ++ti) {
    for (int r = 0; r < 50; ++r) {
      Estimator est =
          Estimator::sampled(Ts[ti], 0.05, derive_seed(seed, 600 + 64 * ti + r));
      Subspace noisy = build_gram(est, nodes, sys, LossKind::LR);
      QPSolution sol = solve_qp(noisy, LossKind::LR);
      double subopt = subspace_loss(exact_sub, LossKind::LR, sol.alpha) - best.loss;
      means[ti] += std::max(subopt, 0.0);
    }
    means[ti] /= 50.0;
  }
  double r01 = means[0] / means[1], r12 = means[1] / means[2];
  const double lo = 10.0 / 3.0, hi = 30.0;
  res.pass = means[2] > 0 && r01 >= lo && r01 <= hi && r12 >= lo && r12 <= hi;
  const double B = sys.A.beta_l1() * sys.A.beta_l1();
  res.detail = "mean suboptimality " + fmt(means[0]) + " / " + fmt(means[1]) + " / " +
               fmt(means[2]) + " at T=1e2/1e3/1e4; ratios " + fmt(r01) + ", " + fmt(r12) +
               " (want within [3.33, 30]); B = " + fmt(B);
  return res;
}

std::vector<SuiteResult> run_all(std::uint64_t seed) {
  return {decrease_suite(seed), depth_suite(seed), qp_suite(seed), sampling_suite(seed)};
}

} // namespace qls::checks
