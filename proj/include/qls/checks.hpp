#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qls::checks {

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Per-step guaranteed decrease of the gradient expansion: after adding the
// node with winning overlap g, L_R drops by at least g^2/4 (rho(A) <= 1).
// 10 Haar-sum 64x64 runs + 10 Pauli n=20 runs, exact mode, zero violations.
SuiteResult decrease_suite(std::uint64_t seed);

// Depth bound for the regularized loss: BFS depth ceil(0.76 ln(1/2eps))
// reaches L_T <= min L_T + eps (eps in {0.1, 0.02}); depth 4 also checked
// against eps = 0.02. min L_T from the per-eigenvalue closed form.
SuiteResult depth_suite(std::uint64_t seed);

// solve_qp subspace optimality against a stacked real least-squares oracle
// (QR factorization, independent of the eigen-pseudo-inverse path); 50
// random systems, random subspaces m <= 6, both losses, 1e-9.
SuiteResult qp_suite(std::uint64_t seed);

// QP suboptimality under shot-estimated Gram data decays ~ 1/T: consecutive
// mean-suboptimality ratios over T in {1e2, 1e3, 1e4} fall in [10/3, 30].
SuiteResult sampling_suite(std::uint64_t seed);

std::vector<SuiteResult> run_all(std::uint64_t seed);

} // namespace qls::checks
