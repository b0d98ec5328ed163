#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qls/operators.hpp"

namespace qls {

enum class Topology { star, line, ring, complete };

Topology topology_from_string(const std::string& s);
std::string topology_name(Topology t);

// Real-amplitude layered circuit: per layer, a Y-rotation (full-angle
// convention, Ry(t) = [[cos t, -sin t], [sin t, cos t]]) on every qubit,
// then the topology's CNOT set. Parameter count n * layers. States are
// real by construction.
struct LayeredAnsatz {
  int n = 0;
  int layers = 1;
  Topology topology = Topology::line;

  int param_count() const { return n * layers; }
};

std::vector<std::pair<int, int>> cnot_pairs(Topology t, int n);
Eigen::VectorXd layered_state(const LayeredAnsatz& a, const Eigen::VectorXd& thetas);

// ---- Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2) ----

struct NmOptions {
  int max_iters = 2000;
  double ftol = 1e-12; // spread of simplex values
  double step = 0.5;   // initial simplex offset per coordinate
};

struct NmResult {
  Eigen::VectorXd x;
  double f = 0;
  int iters = 0;
  std::vector<double> trace; // best value per iteration
};

NmResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x0, const NmOptions& opt);

// ---- VQE on L_H (ancilla-free n-qubit form) -----------------------------------

struct VqeOptions {
  Topology topology = Topology::line;
  int layers = 1;
  int restarts = 5;
  int nm_iters = 0; // 0 = scaled default
  std::uint64_t seed = 0;
};

struct VqeResult {
  Eigen::VectorXd thetas;
  double loss = 0;
  double fidelity_sq = 0; // |<x(theta)|x*>|^2, used for acceptance
  double fidelity = 0;    // unsquared overlap magnitude
  std::vector<double> restart_losses;
  std::vector<double> restart_fidelity_sq;
  std::vector<double> loss_trace; // winning restart
};

// Minimizes L_H(x) = <x|A^2|x> - <x|A|b><b|A|x> over the layered ansatz;
// requires a real symmetric dense-backend system.
VqeResult vqe_solve(const LinearSystem& system, const VqeOptions& opt);

// ---- AAVQE --------------------------------------------------------------------

struct AavqeResult {
  Eigen::VectorXd thetas;
  std::vector<double> energies; // minimized <x|H(s_t)|x> per schedule point
  double fidelity_sq = 0;       // vs |+> (x) x*
  double fidelity = 0;
};

// Warm-started sweep over s_t = t/T, t = 0..T; the ansatz lives on n+1
// qubits. T = steps; step 0 uses restarts, later steps reuse theta*.
AavqeResult aavqe_solve(const LinearSystem& system, const VqeOptions& opt, int steps);

// ---- variational imaginary time ------------------------------------------------

struct ImagTimeState {
  Eigen::VectorXd thetas;
  Eigen::MatrixXd M; // Re <d_i psi | d_j psi>, refreshed each step
  Eigen::VectorXd C; // Re <d_i psi | H | psi>
  double dt = 0.1;
};

enum class StepStatus { ok, stalled };

// theta' = theta - pinv(M) C dt (relative cutoff 1e-8), halving dt (max 20
// times) until the energy <x|H|x> does not increase; stalled when M ~ 0 or
// no acceptable step exists.
StepStatus imaginary_time_step(ImagTimeState& st, const Eigen::MatrixXd& H,
                               const LayeredAnsatz& ansatz);

// ---- alternating-operator ansatz ------------------------------------------------

// H1 = 1 (x) A^2, H2 = |-,b><-,b|, H3 = (1 (x) A)|+,b><+,b|(1 (x) A),
// H4 = |-,b><+,b|(1 (x) A) + (1 (x) A)|+,b><-,b|; the interpolated
// Hamiltonian decomposes as
// H(s) = (1-s)^2 + s^2 H1 - (1-s)^2 H2 - s^2 H3 - s(1-s) H4.
std::array<Eigen::MatrixXcd, 4> ao_hamiltonians(const LinearSystem& system);

struct AOAnsatz {
  int n = 0; // system qubits; states live on n+1
  int p = 1; // layers; parameter matrix is p x 4
  std::array<Eigen::MatrixXcd, 4> evecs;
  std::array<Eigen::VectorXd, 4> evals;
  Eigen::VectorXcd start;  // |+,b>
  Eigen::MatrixXcd h_full; // H(1), the loss operator
};

AOAnsatz make_ao_ansatz(const LinearSystem& system, int p);

// Applies, per layer k = 1..p, exp(-i theta_{k,1} H1) ... exp(-i theta_{k,4} H4)
// in ascending j within the layer (the rightmost factor acts first).
Eigen::VectorXcd ao_ansatz_state(const AOAnsatz& a, const Eigen::MatrixXd& thetas);

double ao_loss(const AOAnsatz& a, const Eigen::MatrixXd& thetas);

} // namespace qls
