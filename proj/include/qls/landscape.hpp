#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qls/cqs.hpp"
#include "qls/pauli.hpp"
#include "qls/states.hpp"

namespace qls {

// Product of single-qubit X-rotations applied to |0...0>: per-qubit
// amplitudes (cos t, -i sin t). The optional ancilla (prepended as qubit 0)
// follows cos t |-> - i sin t |+> instead, so t: 0 -> pi/2 carries it from
// the s=0 ground state to the s=1 one.
struct ProductAnsatz {
  int n = 0;
  Eigen::VectorXd thetas;
  std::optional<double> ancilla_theta;
};

ProductState product_ansatz_state(const ProductAnsatz& a);

// Closed-form losses for the flip-k toy system A = prod_{j: k_j=1} X_j,
// b = |0^n>, solution |k>, evaluated in log space (stable at n = 100+).
double toy_loss_at(const std::vector<int>& k, const Eigen::VectorXd& thetas, LossKind loss);

// Straight-line cut theta(lambda) = lambda*(pi/2)*k between the initial point
// and the solution.
std::vector<double> toy_loss_cut(int n, const std::vector<int>& k, LossKind loss,
                                 const std::vector<double>& lambda_grid);

// Exact max_i |dL_H/dtheta_i| at theta0 (closed form, log space).
double toy_gradient_norm(int n, const std::vector<int>& k, const Eigen::VectorXd& theta0);

// Interpolated-Hamiltonian loss <x~|H(s)|x~> on the (n+1)-qubit product
// ansatz along the same cut, as c(s) - (1-s)^2 f - s^2 g - 2s(1-s) h.
// Rows index s_grid, columns lambda_grid.
Eigen::MatrixXd adiabatic_cut(int n, const std::vector<int>& k,
                              const std::vector<double>& s_grid,
                              const std::vector<double>& lambda_grid);

// ---- local-loss concentration ------------------------------------------------

// Fixed random instance: 1-D brickwork of Haar two-qubit gates (wires listed
// bottom-up, gate count = circuit_depth) and a random non-identity Pauli A.
struct LocalLossInstance {
  int n = 0;
  std::vector<std::pair<int, int>> wires;
  std::vector<Eigen::Matrix4cd> gates;
  PauliString a{};
};

LocalLossInstance make_local_loss_instance(int n, int circuit_depth, std::uint64_t seed);

// L_L(theta) = 1 - (1/n) sum_i P(qubit i = 0) in U_b† A |x(theta)>
double local_loss_value(const LocalLossInstance& inst, const Eigen::VectorXd& thetas);

struct LocalLossStats {
  std::vector<double> losses;
  std::vector<double> grad_maxabs; // finite-difference, first few draws only
  double mean = 0;
  double variance = 0;
  double median_dev_half = 0; // median |L_L - 1/2|
};

LocalLossStats local_loss_concentration(int n, int circuit_depth, int trials,
                                        std::uint64_t seed);

} // namespace qls
