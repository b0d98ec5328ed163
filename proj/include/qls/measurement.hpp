#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "qls/operators.hpp"
#include "qls/states.hpp"

namespace qls {

enum class EstMode { exact, shots };
enum class Part { real, imag };

// Evaluation context: exact bra-kets, or +-1 shot sampling with a fixed RNG
// stream and a cumulative shot ledger.
struct Estimator {
  EstMode mode = EstMode::exact;
  long long shots_per_sample = 0;
  double delta = 0.01;
  std::uint64_t seed = 0;

  static Estimator exact();
  static Estimator sampled(long long shots, double delta, std::uint64_t seed);

  // independent stream for a parallel worker; ledgers merge via add_shots
  Estimator split(std::uint64_t salt) const;

  // mean of `shots` +-1 draws with E = mu, via one binomial draw
  double sample_pm1_mean(double mu, long long shots);
  void add_shots(unsigned long long s) { shot_ledger += s; }
  unsigned long long ledger() const { return shot_ledger; }

 private:
  std::mt19937_64 rng_;
  unsigned long long shot_ledger = 0;
};

// shots for additive accuracy eps with failure probability delta on a +-1
// outcome (Hoeffding, width-2 interval): ceil(2 ln(2/delta) / eps^2)
long long hoeffding_shots(double eps, double delta);

using PauliSumObservable = std::vector<std::pair<double, PauliString>>;

double pauli_expectation(Estimator& est, const DenseState& state, const PauliString& p);
double pauli_expectation(Estimator& est, const ProductState& state, const PauliString& p);
double pauli_expectation(Estimator& est, const SymbolicState& state, const PauliString& p);

double hadamard_test(Estimator& est, const DenseState& v0, const DenseState& v1, Part part);
double hadamard_test(Estimator& est, const SymbolicState& v0, const SymbolicState& v1, Part part);

double modified_hadamard_test(Estimator& est, const DenseState& v0, const DenseState& v1,
                              const PauliSumObservable& obs, Part part);
double modified_hadamard_test(Estimator& est, const SymbolicState& v0, const SymbolicState& v1,
                              const PauliSumObservable& obs, Part part);

double swap_test(Estimator& est, const DenseState& u, const DenseState& v);
double swap_test(Estimator& est, const SymbolicState& u, const SymbolicState& v);

// <x|A^2|x> - |<b|A|x>|^2 over the unitary decomposition. Shot mode spends
// est.shots_per_sample total: half on the A^2 double sum (allocated
// proportionally to |beta_k beta_l|), a quarter on each of two independent
// estimates of <b|A|x> whose product gives the unbiased projection term.
double hamiltonian_loss_estimate(Estimator& est, const DenseState& x, const LinearSystem& system);

// total budget for accuracy eps at failure probability delta:
// ceil(mult * (sum|beta|)^4 / eps^2 * ln(max(K,2)/delta)), empirical mult = 4
long long hamiltonian_loss_shot_budget(const LinearSystem& system, double eps, double delta);

} // namespace qls
