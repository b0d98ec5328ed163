#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qls/measurement.hpp"
#include "qls/operators.hpp"

namespace qls {

enum class LossKind { LR, LT, LH }; // ||Ax-b||^2; + 1/2 ||x||^2; Hamiltonian form

// Node of the ansatz tree: |b> at the root, children apply decomposition
// unitaries; path holds the term indices from the root.
struct AnsatzNode {
  std::vector<int> path;
  std::variant<SymbolicState, DenseState> reduced;
  std::optional<RayKey> ray; // pauli backend only
};

AnsatzNode make_root(const LinearSystem& system);
AnsatzNode child_node(const LinearSystem& system, const AnsatzNode& parent, int term);

// Ordered node set with cached Gram data for the combination-coefficient QP.
struct Subspace {
  std::vector<AnsatzNode> nodes;
  Eigen::MatrixXcd gram_AA; // <u_i| A†A |u_j>
  Eigen::MatrixXcd gram_I;  // <u_i|u_j>
  Eigen::VectorXcd q;       // <u_i| A† |b>
  std::optional<Eigen::VectorXcd> alpha;

  int m() const { return static_cast<int>(nodes.size()); }
};

// 2m-dimensional real form of min over alpha of alpha†M alpha - 2Re(q†alpha) + 1.
struct QPProblem {
  Eigen::MatrixXd Qmat;
  Eigen::VectorXd rvec;
  std::optional<Eigen::VectorXd> z;
};

// Q = [[Re M, -Im M], [Im M, Re M]], r = [Re q; Im q]; the real objective
// z^T Q z - 2 r^T z + 1 at z = [Re alpha; Im alpha] equals the complex one.
QPProblem real_embedding(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& q);
// Minimum-norm minimizer via eigendecomposition pseudo-inverse
// (relative cutoff 1e-10, negative eigenvalues floored at 0); fills z.
void solve_qp_problem(QPProblem& qp);

struct QPSolution {
  Eigen::VectorXcd alpha;
  double loss = 0;
};

Subspace build_gram(Estimator& est, const std::vector<AnsatzNode>& nodes,
                    const LinearSystem& system, LossKind loss);
QPSolution solve_qp(Subspace& sub, LossKind loss);
double subspace_loss(const Subspace& sub, LossKind loss, const Eigen::VectorXcd& alpha);

// <psi| grad L_R(x)> = 2 sum_i alpha_i <psi|A†A|u_i> - 2 <psi|A†|b>
cmplx gradient_overlap(Estimator& est, const AnsatzNode& node, const Subspace& sub,
                       const LinearSystem& system);

// All distinct nodes with path length <= depth, path-lexicographic order.
std::vector<AnsatzNode> expand_bfs(const LinearSystem& system, int depth);

struct ExpandResult {
  AnsatzNode node;
  cmplx g{0, 0};
  bool frontier_exhausted = false;
};
// Argmax of |gradient overlap| over children of the subspace not already in
// it; ties broken path-lexicographically.
ExpandResult expand_gradient(Estimator& est, const LinearSystem& system, const Subspace& sub);

struct CqsOptions {
  enum class Strategy { bfs, gradient, hamiltonian };
  Strategy strategy = Strategy::gradient;
  LossKind loss = LossKind::LR;
  int depth = 3;                // bfs: tree depth
  int max_nodes = -1;           // bfs: cap on node count (-1 = no cap)
  int max_iters = 50;           // gradient: expansion steps
  double tol = 1e-10;           // stop when loss <= tol
  double grad_tol_scale = 1e-8; // gradient stop: |g| <= scale * sum|beta|
  double kappa = 0;             // hamiltonian: 0 = use system.kappa_bound
  double eps = 0.1;             // hamiltonian: target accuracy
  EstMode mode = EstMode::exact;
  long long shots = 10000;
  double delta = 0.01;
  std::uint64_t seed = 0;
};

struct SolveReport {
  std::vector<double> loss_trace; // loss after each node-count increment
  std::vector<std::vector<int>> chosen_paths;
  Eigen::VectorXcd alpha;
  std::vector<cmplx> gradient_overlaps;          // winning g per gradient expansion
  std::vector<unsigned long long> shots_trace;   // cumulative, per trace row
  unsigned long long shots_used = 0;
  std::string config_echo;
  double wall_seconds = 0;
  bool converged = false;
  std::string stop_reason;
  int decrease_violations = 0; // exact-mode decrease check failures
  double final_loss = 0;
  int nodes = 0;
};

SolveReport cqs_solve(const LinearSystem& system, const CqsOptions& opt);

// t_j = eps*j / (kappa ln(kappa/eps)), j = -J..J, J = ceil(kappa^2 ln^2(kappa/eps)/eps)
std::vector<double> hamiltonian_time_grid(double kappa, double eps);

// Monomial coefficients of sum_{k<=floor((K0-1)/2)} c_k T_{2k+1}(z) with
// c_k = (sqrt(3)-2)^k (1 - 1/sqrt(3)); approximates z / (2z^2 + 1) on [-1,1]
// within eta(K0). (The limit of this series is z/(2z^2+1); see README.)
std::vector<double> chebyshev_tikhonov(int K0);
double chebyshev_eta(int K0); // (2-sqrt(3))^(K0/2) * (1-1/sqrt(3)) / (sqrt(3)-1)

// Closed-form minimum of L_T for a dense hermitian system (per-eigenvalue
// optimum): min L_T = sum_i |b_i|^2 / (1 + 2 lambda_i^2).
double min_tikhonov_loss(const LinearSystem& system);

struct BqpCheck {
  cmplx alpha1, alpha2;
  double P0 = 0, P1 = 0;
  bool ok = false;
};
// Builds b = |0>(x)U|0^n>, u2 = |1>(x)U|0^n>, A = CNOT(control: first circuit
// qubit, target: the added qubit); the QP optimum recovers (P0, P1), the
// first-qubit outcome probabilities of the circuit.
BqpCheck bqp_reduction_check(Estimator& est, const std::vector<Eigen::MatrixXcd>& circuit,
                             int n_circuit_qubits, double eps);

} // namespace qls
