#include "qls/cqs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace qls {

namespace {

// ---- merged A†A term list (pauli backend) ----------------------------------
// A†A = sum_{k,l} beta_k beta_l U_k† U_l; products sharing a ray are merged
// with the relative phase folded into a complex coefficient on the phase-0
// representative X^x Z^z.
struct A2Term {
  cmplx coeff;
  PauliString rep; // phase_pow == 0
};

std::vector<A2Term> a2_terms(const DecomposedOperator& A) {
  std::vector<A2Term> out;
  std::unordered_map<RayKey, std::size_t, RayKeyHash> index;
  for (const auto& tk : A.terms) {
    PauliString pk_dag = pauli_adjoint(std::get<PauliString>(tk.u));
    for (const auto& tl : A.terms) {
      PauliString prod = pauli_mul(pk_dag, std::get<PauliString>(tl.u));
      cmplx c = tk.beta * tl.beta * phase_value(prod.phase_pow);
      prod.phase_pow = 0;
      auto [ray, ph] = canonical_form(prod);
      auto it = index.find(ray);
      if (it == index.end()) {
        index.emplace(std::move(ray), out.size());
        out.push_back({c, std::move(prod)});
      } else {
        out[it->second].coeff += c;
      }
    }
  }
  std::erase_if(out, [](const A2Term& t) { return std::abs(t.coeff) < 1e-15; });
  return out;
}

cmplx sampled_complex(Estimator& est, cmplx mean) {
  double re = est.sample_pm1_mean(mean.real(), est.shots_per_sample);
  double im = est.sample_pm1_mean(mean.imag(), est.shots_per_sample);
  return {re, im};
}

// ---- backend-specific entry evaluation --------------------------------------

struct PauliGramCtx {
  const LinearSystem* sys = nullptr;
  std::vector<A2Term> a2;
  const ProductState* base = nullptr;

  cmplx entry_AA(Estimator& est, const PauliString& op_i, const PauliString& op_j) const {
    PauliString adj = pauli_adjoint(op_i);
    cmplx acc = 0;
    for (const auto& t : a2) {
      PauliString left = pauli_mul(adj, t.rep);
      cmplx mean = expectation_product_state(pauli_mul(left, op_j), *base);
      acc += t.coeff * (est.mode == EstMode::exact ? mean : sampled_complex(est, mean));
    }
    return acc;
  }
  cmplx entry_I(Estimator& est, const PauliString& op_i, const PauliString& op_j) const {
    cmplx mean = expectation_product_state(pauli_mul(pauli_adjoint(op_i), op_j), *base);
    return est.mode == EstMode::exact ? mean : sampled_complex(est, mean);
  }
  cmplx entry_q(Estimator& est, const PauliString& op_i) const {
    PauliString adj = pauli_adjoint(op_i);
    cmplx acc = 0;
    for (const auto& t : sys->A.terms) {
      cmplx mean = expectation_product_state(
          pauli_mul(adj, pauli_adjoint(std::get<PauliString>(t.u))), *base);
      acc += t.beta * (est.mode == EstMode::exact ? mean : sampled_complex(est, mean));
    }
    return acc;
  }
};

struct DenseGramCtx {
  const LinearSystem* sys = nullptr;
  Eigen::VectorXcd bvec, Adag_b;
  std::vector<Eigen::VectorXcd> u, Au; // per node (exact-mode caches)

  void push_node(const DenseState& s) {
    u.push_back(s.amps);
    Au.push_back(apply_A(sys->A, s.amps));
  }
  cmplx entry_AA(Estimator& est, int i, int j) const {
    if (est.mode == EstMode::exact) return Au[i].dot(Au[j]);
    // termwise over U_k† U_l products, +-1 sampling per part
    cmplx acc = 0;
    const auto& terms = sys->A.terms;
    for (const auto& tk : terms) {
      Eigen::VectorXcd wk = apply_term(tk, u[i]);
      for (const auto& tl : terms) {
        Eigen::VectorXcd wl = apply_term(tl, u[j]);
        cmplx mean = wk.dot(wl);
        acc += tk.beta * tl.beta * sampled_complex(est, mean);
      }
    }
    return acc;
  }
  cmplx entry_I(Estimator& est, int i, int j) const {
    cmplx mean = u[i].dot(u[j]);
    return est.mode == EstMode::exact ? mean : sampled_complex(est, mean);
  }
  cmplx entry_q(Estimator& est, int i) const {
    if (est.mode == EstMode::exact) return u[i].dot(Adag_b);
    cmplx acc = 0;
    for (const auto& t : sys->A.terms) {
      cmplx mean = u[i].dot(apply_term_adjoint(t, bvec));
      acc += t.beta * sampled_complex(est, mean);
    }
    return acc;
  }

  static Eigen::VectorXcd apply_term(const OpTerm& t, const Eigen::VectorXcd& v) {
    if (std::holds_alternative<PauliString>(t.u)) {
      DenseState s;
      s.n = std::get<PauliString>(t.u).n;
      s.amps = v;
      apply_pauli(std::get<PauliString>(t.u), s);
      return s.amps;
    }
    return std::get<std::shared_ptr<const DenseOperatorMatrix>>(t.u)->m * v;
  }
  static Eigen::VectorXcd apply_term_adjoint(const OpTerm& t, const Eigen::VectorXcd& v) {
    if (std::holds_alternative<PauliString>(t.u)) {
      DenseState s;
      s.n = std::get<PauliString>(t.u).n;
      s.amps = v;
      apply_pauli(pauli_adjoint(std::get<PauliString>(t.u)), s);
      return s.amps;
    }
    return std::get<std::shared_ptr<const DenseOperatorMatrix>>(t.u)->m.adjoint() * v;
  }
};

// Incrementally grown Gram data; rebuilding from scratch per iteration would
// repeat O(m^2) estimator calls.
struct GramBuilder {
  const LinearSystem* sys;
  LossKind loss;
  bool fill_I;
  Subspace sub;
  PauliGramCtx pauli;
  DenseGramCtx dense;
  bool is_pauli;

  GramBuilder(const LinearSystem& system, LossKind l, EstMode mode)
      : sys(&system), loss(l) {
    is_pauli = system.A.backend == Backend::pauli;
    fill_I = mode == EstMode::exact || loss == LossKind::LT;
    if (is_pauli) {
      pauli.sys = &system;
      pauli.a2 = a2_terms(system.A);
      if (!std::holds_alternative<ProductState>(system.b))
        throw std::invalid_argument("build_gram: pauli backend requires a product-state b");
      pauli.base = &std::get<ProductState>(system.b);
    } else {
      dense.sys = &system;
      dense.bvec = system.b_dense().amps;
      dense.Adag_b = apply_A(system.A, dense.bvec, /*adjoint=*/true);
    }
  }

  void add_node(Estimator& est, AnsatzNode node) {
    const int m = sub.m();
    if (is_pauli) {
      if (!std::holds_alternative<SymbolicState>(node.reduced))
        throw std::invalid_argument("build_gram: backend mismatch between system and node");
    } else {
      if (!std::holds_alternative<DenseState>(node.reduced))
        throw std::invalid_argument("build_gram: backend mismatch between system and node");
      dense.push_node(std::get<DenseState>(node.reduced));
    }
    sub.nodes.push_back(std::move(node));
    sub.gram_AA.conservativeResize(m + 1, m + 1);
    sub.gram_I.conservativeResize(m + 1, m + 1);
    sub.q.conservativeResize(m + 1);

    auto op = [&](int i) -> const PauliString& {
      return std::get<SymbolicState>(sub.nodes[i].reduced).op;
    };
    for (int j = 0; j <= m; ++j) {
      cmplx aa, ii;
      if (is_pauli) {
        aa = pauli.entry_AA(est, op(m), op(j));
        ii = fill_I ? pauli.entry_I(est, op(m), op(j)) : cmplx(0, 0);
      } else {
        aa = dense.entry_AA(est, m, j);
        ii = fill_I ? dense.entry_I(est, m, j) : cmplx(0, 0);
      }
      if (j == m) {
        sub.gram_AA(m, m) = aa.real(); // hermitian diagonal
        sub.gram_I(m, m) = ii.real();
      } else if (est.mode == EstMode::exact) {
        sub.gram_AA(m, j) = aa;
        sub.gram_AA(j, m) = std::conj(aa);
        sub.gram_I(m, j) = ii;
        sub.gram_I(j, m) = std::conj(ii);
      } else {
        // independent estimates of (m,j) and (j,m), hermitian-symmetrized
        cmplx aa2, ii2;
        if (is_pauli) {
          aa2 = pauli.entry_AA(est, op(j), op(m));
          ii2 = fill_I ? pauli.entry_I(est, op(j), op(m)) : cmplx(0, 0);
        } else {
          aa2 = dense.entry_AA(est, j, m);
          ii2 = fill_I ? dense.entry_I(est, j, m) : cmplx(0, 0);
        }
        sub.gram_AA(m, j) = 0.5 * (aa + std::conj(aa2));
        sub.gram_AA(j, m) = std::conj(sub.gram_AA(m, j));
        sub.gram_I(m, j) = 0.5 * (ii + std::conj(ii2));
        sub.gram_I(j, m) = std::conj(sub.gram_I(m, j));
      }
    }
    sub.q(m) = is_pauli ? pauli.entry_q(est, op(m)) : dense.entry_q(est, m);
    sub.alpha.reset();
  }
};

std::vector<int> concat_path(const std::vector<int>& p, int k) {
  std::vector<int> out = p;
  out.push_back(k);
  return out;
}

bool dense_duplicate(const Eigen::VectorXcd& cand, const std::vector<AnsatzNode>& nodes) {
  for (const auto& n : nodes) {
    const auto& v = std::get<DenseState>(n.reduced).amps;
    if (std::abs(cand.dot(v)) >= 1.0 - 1e-9) return true;
  }
  return false;
}

} // namespace

AnsatzNode make_root(const LinearSystem& system) {
  AnsatzNode node;
  node.path = {};
  if (system.A.backend == Backend::pauli) {
    if (!std::holds_alternative<ProductState>(system.b))
      throw std::invalid_argument("make_root: pauli backend requires a product-state b");
    SymbolicState s{std::get<ProductState>(system.b), PauliString::identity(system.n()), {1, 0}};
    node.ray = canonical_form(s.op).first;
    node.reduced = std::move(s);
  } else {
    node.reduced = system.b_dense();
  }
  return node;
}

AnsatzNode child_node(const LinearSystem& system, const AnsatzNode& parent, int term) {
  if (term < 0 || term >= system.A.K())
    throw std::invalid_argument("child_node: term index out of range");
  AnsatzNode node;
  node.path = concat_path(parent.path, term);
  if (system.A.backend == Backend::pauli) {
    const auto& p = std::get<SymbolicState>(parent.reduced);
    SymbolicState s{p.base, pauli_mul(std::get<PauliString>(system.A.terms[term].u), p.op),
                    p.scale};
    node.ray = canonical_form(s.op).first;
    node.reduced = std::move(s);
  } else {
    const auto& p = std::get<DenseState>(parent.reduced);
    DenseState s;
    s.n = p.n;
    s.amps = DenseGramCtx::apply_term(system.A.terms[term], p.amps);
    node.reduced = std::move(s);
  }
  return node;
}

QPProblem real_embedding(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& q) {
  const Eigen::Index m = M.rows();
  QPProblem qp;
  qp.Qmat.resize(2 * m, 2 * m);
  Eigen::MatrixXd R = M.real(), S = M.imag();
  qp.Qmat.topLeftCorner(m, m) = R;
  qp.Qmat.bottomRightCorner(m, m) = R;
  qp.Qmat.topRightCorner(m, m) = -S;
  qp.Qmat.bottomLeftCorner(m, m) = S;
  qp.rvec.resize(2 * m);
  qp.rvec.head(m) = q.real();
  qp.rvec.tail(m) = q.imag();
  return qp;
}

void solve_qp_problem(QPProblem& qp) {
  const Eigen::Index d = qp.Qmat.rows();
  Eigen::MatrixXd Qs = 0.5 * (qp.Qmat + qp.Qmat.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Qs);
  double lmax = eig.eigenvalues().maxCoeff();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
  if (lmax > 0) {
    const double cutoff = 1e-10 * lmax;
    Eigen::VectorXd proj = eig.eigenvectors().transpose() * qp.rvec;
    for (Eigen::Index i = 0; i < d; ++i) {
      double lam = eig.eigenvalues()(i); // negatives floored at 0 (noisy grams)
      if (lam > cutoff) z += (proj(i) / lam) * eig.eigenvectors().col(i);
    }
  }
  qp.z = std::move(z);
}

Subspace build_gram(Estimator& est, const std::vector<AnsatzNode>& nodes,
                    const LinearSystem& system, LossKind loss) {
  if (nodes.empty()) throw std::invalid_argument("build_gram: empty node list");
  if (loss == LossKind::LH) throw std::invalid_argument("build_gram: loss must be lr or lt");
  GramBuilder gb(system, loss, est.mode);
  for (const auto& n : nodes) gb.add_node(est, n);
  return std::move(gb.sub);
}

double subspace_loss(const Subspace& sub, LossKind loss, const Eigen::VectorXcd& alpha) {
  Eigen::MatrixXcd M = sub.gram_AA;
  if (loss == LossKind::LT) M += 0.5 * sub.gram_I;
  M = 0.5 * (M + M.adjoint().eval());
  cmplx quad = alpha.dot(M * alpha);
  return quad.real() - 2.0 * sub.q.dot(alpha).real() + 1.0;
}

QPSolution solve_qp(Subspace& sub, LossKind loss) {
  if (sub.m() == 0) throw std::invalid_argument("solve_qp: empty subspace");
  Eigen::MatrixXcd M = sub.gram_AA;
  if (loss == LossKind::LT) M += 0.5 * sub.gram_I;
  M = 0.5 * (M + M.adjoint().eval());
  QPProblem qp = real_embedding(M, sub.q);
  solve_qp_problem(qp);
  const int m = sub.m();
  QPSolution sol;
  sol.alpha = qp.z->head(m) + cmplx(0, 1) * qp.z->tail(m);
  sol.loss = subspace_loss(sub, loss, sol.alpha);
  sub.alpha = sol.alpha;
  return sol;
}

cmplx gradient_overlap(Estimator& est, const AnsatzNode& node, const Subspace& sub,
                       const LinearSystem& system) {
  if (!sub.alpha) throw std::invalid_argument("gradient_overlap: subspace alpha unset");
  const Eigen::VectorXcd& alpha = *sub.alpha;
  if (system.A.backend == Backend::pauli) {
    PauliGramCtx ctx;
    ctx.sys = &system;
    ctx.a2 = a2_terms(system.A);
    ctx.base = &std::get<ProductState>(system.b);
    const auto& psi = std::get<SymbolicState>(node.reduced).op;
    cmplx acc = 0;
    for (int i = 0; i < sub.m(); ++i)
      acc += alpha(i) * ctx.entry_AA(est, psi, std::get<SymbolicState>(sub.nodes[i].reduced).op);
    return 2.0 * acc - 2.0 * ctx.entry_q(est, psi);
  }
  DenseGramCtx ctx;
  ctx.sys = &system;
  ctx.bvec = system.b_dense().amps;
  ctx.Adag_b = apply_A(system.A, ctx.bvec, true);
  for (int i = 0; i < sub.m(); ++i)
    ctx.push_node(std::get<DenseState>(sub.nodes[i].reduced));
  const auto& psiv = std::get<DenseState>(node.reduced);
  ctx.push_node(psiv);
  const int p = sub.m();
  cmplx acc = 0;
  for (int i = 0; i < sub.m(); ++i) acc += alpha(i) * ctx.entry_AA(est, p, i);
  return 2.0 * acc - 2.0 * ctx.entry_q(est, p);
}

std::vector<AnsatzNode> expand_bfs(const LinearSystem& system, int depth) {
  if (depth < 0) throw std::invalid_argument("expand_bfs: negative depth");
  std::vector<AnsatzNode> accepted{make_root(system)};
  std::unordered_set<RayKey, RayKeyHash> seen;
  const bool is_pauli = system.A.backend == Backend::pauli;
  if (is_pauli) seen.insert(*accepted[0].ray);

  std::size_t layer_begin = 0;
  for (int d = 0; d < depth; ++d) {
    std::size_t layer_end = accepted.size();
    for (std::size_t i = layer_begin; i < layer_end; ++i) {
      for (int k = 0; k < system.A.K(); ++k) {
        AnsatzNode child = child_node(system, accepted[i], k);
        if (is_pauli) {
          if (seen.contains(*child.ray)) continue;
          seen.insert(*child.ray);
        } else if (dense_duplicate(std::get<DenseState>(child.reduced).amps, accepted)) {
          continue;
        }
        accepted.push_back(std::move(child));
      }
    }
    if (accepted.size() == layer_end) break; // no new rays
    layer_begin = layer_end;
  }
  return accepted;
}

ExpandResult expand_gradient(Estimator& est, const LinearSystem& system, const Subspace& sub) {
  if (!sub.alpha) throw std::invalid_argument("expand_gradient: subspace alpha unset");
  const bool is_pauli = system.A.backend == Backend::pauli;
  const bool exact = est.mode == EstMode::exact;

  // candidates: children of all subspace nodes, minus nodes already present
  std::unordered_set<RayKey, RayKeyHash> in_sub, cand_seen;
  if (is_pauli)
    for (const auto& n : sub.nodes) in_sub.insert(*n.ray);
  std::vector<AnsatzNode> cands;
  for (const auto& parent : sub.nodes)
    for (int k = 0; k < system.A.K(); ++k) {
      AnsatzNode child = child_node(system, parent, k);
      if (is_pauli) {
        if (in_sub.contains(*child.ray) || cand_seen.contains(*child.ray)) continue;
        cand_seen.insert(*child.ray);
      } else if (dense_duplicate(std::get<DenseState>(child.reduced).amps, sub.nodes)) {
        continue;
      }
      cands.push_back(std::move(child));
    }
  if (cands.empty()) return {AnsatzNode{}, {0, 0}, true};
  std::sort(cands.begin(), cands.end(),
            [](const AnsatzNode& a, const AnsatzNode& b) { return a.path < b.path; });

  // shared per-scan work: merged A†A list (pauli) or y = A†(Ax - b) (dense)
  PauliGramCtx pctx;
  Eigen::VectorXcd y;
  const Eigen::VectorXcd& alpha = *sub.alpha;
  if (is_pauli) {
    pctx.sys = &system;
    pctx.a2 = a2_terms(system.A);
    pctx.base = &std::get<ProductState>(system.b);
  } else if (exact) {
    const Eigen::Index dim = Eigen::Index(1) << system.n();
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
    for (int i = 0; i < sub.m(); ++i)
      x += alpha(i) * std::get<DenseState>(sub.nodes[i].reduced).amps;
    Eigen::VectorXcd r = apply_A(system.A, x) - system.b_dense().amps;
    y = apply_A(system.A, r, true);
  }

  ExpandResult best;
  best.frontier_exhausted = false;
  double best_mag = -1;
  for (auto& cand : cands) {
    cmplx g;
    if (is_pauli && exact) {
      const auto& psi = std::get<SymbolicState>(cand.reduced).op;
      cmplx acc = 0;
      for (int i = 0; i < sub.m(); ++i)
        acc += alpha(i) * pctx.entry_AA(est, psi, std::get<SymbolicState>(sub.nodes[i].reduced).op);
      g = 2.0 * acc - 2.0 * pctx.entry_q(est, psi);
    } else if (!is_pauli && exact) {
      g = 2.0 * std::get<DenseState>(cand.reduced).amps.dot(y);
    } else {
      g = gradient_overlap(est, cand, sub, system);
    }
    if (std::abs(g) > best_mag) {
      best_mag = std::abs(g);
      best.g = g;
      best.node = std::move(cand);
    }
  }
  return best;
}

std::vector<double> hamiltonian_time_grid(double kappa, double eps) {
  if (kappa < 1) throw std::invalid_argument("hamiltonian_time_grid: kappa must be >= 1");
  if (eps <= 0 || eps >= 1) throw std::invalid_argument("hamiltonian_time_grid: eps must be in (0,1)");
  const double lg = std::log(kappa / eps);
  const long long J = static_cast<long long>(std::ceil(kappa * kappa * lg * lg / eps));
  constexpr long long kMaxStates = 100000;
  if (2 * J + 1 > kMaxStates)
    throw std::invalid_argument(
        "hamiltonian_time_grid: grid of " + std::to_string(2 * J + 1) +
        " states exceeds the cap of " + std::to_string(kMaxStates) +
        "; use a smaller kappa or a larger eps");
  std::vector<double> ts;
  ts.reserve(2 * J + 1);
  const double step = eps / (kappa * lg);
  for (long long j = -J; j <= J; ++j) ts.push_back(step * static_cast<double>(j));
  return ts;
}

std::vector<double> chebyshev_tikhonov(int K0) {
  if (K0 < 1) throw std::invalid_argument("chebyshev_tikhonov: K0 must be >= 1");
  const int kmax = (K0 - 1) / 2;
  const double c_base = 1.0 - 1.0 / std::sqrt(3.0);
  std::vector<double> poly(static_cast<std::size_t>(K0) + 1, 0.0);
  // Chebyshev polynomials in the monomial basis via the three-term recurrence
  std::vector<double> Tm{1.0}, Tc{0.0, 1.0};
  auto add_scaled = [&poly](const std::vector<double>& t, double c) {
    for (std::size_t i = 0; i < t.size(); ++i) poly[i] += c * t[i];
  };
  int deg = 1;
  for (int k = 0; k <= kmax; ++k) {
    while (deg < 2 * k + 1) {
      std::vector<double> Tn(Tc.size() + 1, 0.0);
      for (std::size_t i = 0; i < Tc.size(); ++i) Tn[i + 1] += 2.0 * Tc[i];
      for (std::size_t i = 0; i < Tm.size(); ++i) Tn[i] -= Tm[i];
      Tm = std::move(Tc);
      Tc = std::move(Tn);
      ++deg;
    }
    add_scaled(Tc, std::pow(std::sqrt(3.0) - 2.0, k) * c_base);
  }
  return poly;
}

double chebyshev_eta(int K0) {
  const double s3 = std::sqrt(3.0);
  return std::pow(2.0 - s3, K0 / 2.0) * (1.0 - 1.0 / s3) / (s3 - 1.0);
}

double min_tikhonov_loss(const LinearSystem& system) {
  Eigen::MatrixXcd A = assemble_dense(system.A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(A);
  Eigen::VectorXcd bt = eig.eigenvectors().adjoint() * system.b_dense().amps;
  double acc = 0;
  for (Eigen::Index i = 0; i < bt.size(); ++i) {
    double lam = eig.eigenvalues()(i);
    acc += std::norm(bt(i)) / (1.0 + 2.0 * lam * lam);
  }
  return acc;
}

// ---- solver -----------------------------------------------------------------

namespace {

std::string echo_config(const LinearSystem& sys, const CqsOptions& o) {
  std::ostringstream s;
  s << "strategy=";
  switch (o.strategy) {
    case CqsOptions::Strategy::bfs: s << "bfs depth=" << o.depth; break;
    case CqsOptions::Strategy::gradient: s << "gradient max_iters=" << o.max_iters; break;
    case CqsOptions::Strategy::hamiltonian:
      s << "hamiltonian kappa=" << o.kappa << " eps=" << o.eps;
      break;
  }
  s << " loss=" << (o.loss == LossKind::LR ? "lr" : "lt") << " tol=" << o.tol
    << " mode=" << (o.mode == EstMode::exact ? "exact" : "shots");
  if (o.mode == EstMode::shots) s << " shots=" << o.shots << " delta=" << o.delta;
  s << " seed=" << o.seed << " family=" << sys.metadata.family << " n=" << sys.n()
    << " K=" << sys.A.K();
  return s.str();
}

SolveReport solve_bfs(const LinearSystem& system, const CqsOptions& opt, Estimator& est) {
  SolveReport rep;
  std::vector<AnsatzNode> nodes = expand_bfs(system, opt.depth);
  if (opt.max_nodes > 0 && static_cast<int>(nodes.size()) > opt.max_nodes)
    nodes.resize(opt.max_nodes);
  GramBuilder gb(system, opt.loss, est.mode);
  std::vector<unsigned long long> ledger_per_node;
  for (auto& n : nodes) {
    rep.chosen_paths.push_back(n.path);
    gb.add_node(est, std::move(n));
    ledger_per_node.push_back(est.ledger());
  }
  Subspace& sub = gb.sub;

  if (opt.max_nodes > 0) {
    // per-node-count trace: prefix Gram blocks are valid subspaces
    for (int m = 1; m <= sub.m(); ++m) {
      Subspace prefix;
      prefix.nodes.assign(sub.nodes.begin(), sub.nodes.begin() + m);
      prefix.gram_AA = sub.gram_AA.topLeftCorner(m, m);
      prefix.gram_I = sub.gram_I.topLeftCorner(m, m);
      prefix.q = sub.q.head(m);
      QPSolution sol = solve_qp(prefix, opt.loss);
      rep.loss_trace.push_back(sol.loss);
      rep.shots_trace.push_back(ledger_per_node[m - 1]);
      if (m == sub.m()) rep.alpha = sol.alpha;
    }
  } else {
    QPSolution sol = solve_qp(sub, opt.loss);
    rep.loss_trace.push_back(sol.loss);
    rep.shots_trace.push_back(est.ledger());
    rep.alpha = sol.alpha;
  }
  rep.nodes = sub.m();
  rep.final_loss = rep.loss_trace.back();
  rep.converged = rep.final_loss <= opt.tol;
  rep.stop_reason = rep.converged ? "tol" : "depth-exhausted";
  return rep;
}

SolveReport solve_gradient(const LinearSystem& system, const CqsOptions& opt, Estimator& est) {
  SolveReport rep;
  const double grad_tol = opt.grad_tol_scale * system.A.beta_l1();
  GramBuilder gb(system, opt.loss, est.mode);
  gb.add_node(est, make_root(system));
  QPSolution sol = solve_qp(gb.sub, opt.loss);
  rep.loss_trace.push_back(sol.loss);
  rep.shots_trace.push_back(est.ledger());
  rep.chosen_paths.push_back({});
  const bool check_decrease = est.mode == EstMode::exact && system.A.normalized_flag &&
                              opt.loss == LossKind::LR;

  for (int it = 0; it < opt.max_iters; ++it) {
    if (rep.loss_trace.back() <= opt.tol) {
      rep.converged = true;
      rep.stop_reason = "tol";
      break;
    }
    ExpandResult ex = expand_gradient(est, system, gb.sub);
    if (ex.frontier_exhausted) {
      rep.stop_reason = "frontier-exhausted";
      break;
    }
    // grad_tol_scale = 0 disables this stop: stationary subspaces then keep
    // accepting the best (zero-overlap) candidate and the trace runs flat
    if (grad_tol > 0 && std::abs(ex.g) <= grad_tol) {
      rep.stop_reason = "grad-tol";
      break;
    }
    rep.gradient_overlaps.push_back(ex.g);
    rep.chosen_paths.push_back(ex.node.path);
    gb.add_node(est, std::move(ex.node));
    sol = solve_qp(gb.sub, opt.loss);
    double prev = rep.loss_trace.back();
    rep.loss_trace.push_back(sol.loss);
    rep.shots_trace.push_back(est.ledger());
    // guaranteed decrease: loss(t+1) <= loss(t) - |g|^2/4 for rho(A) <= 1
    if (check_decrease && sol.loss > prev - std::norm(ex.g) / 4.0 + 1e-9) ++rep.decrease_violations;
  }
  if (rep.stop_reason.empty())
    rep.stop_reason = rep.loss_trace.back() <= opt.tol ? "tol" : "max-iters";
  if (rep.loss_trace.back() <= opt.tol) rep.converged = true;
  rep.alpha = *gb.sub.alpha;
  rep.nodes = gb.sub.m();
  rep.final_loss = rep.loss_trace.back();
  return rep;
}

SolveReport solve_hamiltonian(const LinearSystem& system, const CqsOptions& opt, Estimator& est) {
  if (est.mode != EstMode::exact)
    throw std::invalid_argument("cqs_solve: hamiltonian strategy supports exact estimation only");
  double kappa = opt.kappa;
  if (kappa <= 0) {
    if (!system.kappa_bound)
      throw std::invalid_argument("cqs_solve: hamiltonian strategy needs kappa (none in system)");
    kappa = *system.kappa_bound;
  }
  std::vector<double> ts = hamiltonian_time_grid(kappa, opt.eps);

  DenseOperatorMatrix Ad;
  Ad.n = system.n();
  Ad.m = assemble_dense(system.A);
  Ad.hermitian = true;
  Ad.validate();
  Propagator prop(Ad);
  DenseState b = system.b_dense();

  const Eigen::Index dim = b.amps.size();
  Eigen::MatrixXcd V(dim, static_cast<Eigen::Index>(ts.size()));
  SolveReport rep;
  const int J = static_cast<int>(ts.size() / 2);
  for (std::size_t j = 0; j < ts.size(); ++j) {
    DenseState u = prop.apply(ts[j], b);
    V.col(static_cast<Eigen::Index>(j)) = Ad.m * u.amps;
    rep.chosen_paths.push_back({static_cast<int>(j) - J}); // signed grid index
  }
  // min-norm least squares on V alpha = b; identical to the QP minimum
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXcd alpha = svd.solve(b.amps);
  double loss = (V * alpha - b.amps).squaredNorm();
  rep.loss_trace.push_back(loss);
  rep.shots_trace.push_back(0);
  rep.alpha = alpha;
  rep.nodes = static_cast<int>(ts.size());
  rep.final_loss = loss;
  rep.converged = loss <= opt.tol;
  rep.stop_reason = rep.converged ? "tol" : "grid-exhausted";
  return rep;
}

} // namespace

SolveReport cqs_solve(const LinearSystem& system, const CqsOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  Estimator est = opt.mode == EstMode::exact
                      ? Estimator::exact()
                      : Estimator::sampled(opt.shots, opt.delta, opt.seed);
  SolveReport rep;
  switch (opt.strategy) {
    case CqsOptions::Strategy::bfs: rep = solve_bfs(system, opt, est); break;
    case CqsOptions::Strategy::gradient: rep = solve_gradient(system, opt, est); break;
    case CqsOptions::Strategy::hamiltonian: rep = solve_hamiltonian(system, opt, est); break;
  }
  rep.shots_used = est.ledger();
  rep.config_echo = echo_config(system, opt);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

BqpCheck bqp_reduction_check(Estimator& est, const std::vector<Eigen::MatrixXcd>& circuit,
                             int n_circuit_qubits, double eps) {
  const int n = n_circuit_qubits;
  if (n < 1 || n > 6) throw std::invalid_argument("bqp_reduction_check: need 1..6 circuit qubits");
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi(0) = 1.0;
  for (const auto& u : circuit) {
    if (u.rows() != dim || u.cols() != dim)
      throw std::invalid_argument("bqp_reduction_check: gate dimension mismatch");
    psi = u * psi;
  }
  double P0 = 0;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (!((i >> (n - 1)) & 1)) P0 += std::norm(psi(i));
  double P1 = 1.0 - P0;

  // n+1 qubits, added qubit most significant; A = CNOT(control: first circuit
  // qubit = index bit n-1, target: added qubit = index bit n)
  const Eigen::Index dim2 = 2 * dim;
  Eigen::MatrixXcd cnot = Eigen::MatrixXcd::Zero(dim2, dim2);
  for (Eigen::Index c = 0; c < dim2; ++c) {
    Eigen::Index r = c;
    if ((c >> (n - 1)) & 1) r = c ^ (Eigen::Index(1) << n);
    cnot(r, c) = 1.0;
  }
  auto term = std::make_shared<DenseOperatorMatrix>();
  term->n = n + 1;
  term->m = std::move(cnot);
  term->hermitian = true;

  LinearSystem sys;
  sys.A.n = n + 1;
  sys.A.backend = Backend::dense;
  sys.A.hermitian_flag = true;
  sys.A.normalized_flag = true;
  sys.A.terms.push_back({1.0, term});
  DenseState u1, u2;
  u1.n = u2.n = n + 1;
  u1.amps = Eigen::VectorXcd::Zero(dim2);
  u2.amps = Eigen::VectorXcd::Zero(dim2);
  u1.amps.head(dim) = psi;
  u2.amps.tail(dim) = psi;
  sys.b = u1;
  sys.metadata.family = "bqp-reduction";

  AnsatzNode n1, n2;
  n1.path = {0};
  n1.reduced = u1;
  n2.path = {1};
  n2.reduced = u2;
  Subspace sub = build_gram(est, {n1, n2}, sys, LossKind::LR);
  QPSolution sol = solve_qp(sub, LossKind::LR);

  BqpCheck out;
  out.alpha1 = sol.alpha(0);
  out.alpha2 = sol.alpha(1);
  out.P0 = P0;
  out.P1 = P1;
  out.ok = std::norm(out.alpha1 - P0) + std::norm(out.alpha2 - P1) <= eps;
  return out;
}

} // namespace qls
