#include "qls/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "qls/rng.hpp"

namespace qls {

Topology topology_from_string(const std::string& s) {
  if (s == "star") return Topology::star;
  if (s == "line") return Topology::line;
  if (s == "ring") return Topology::ring;
  if (s == "complete") return Topology::complete;
  throw std::invalid_argument("topology: expected star|line|ring|complete, got '" + s + "'");
}

std::string topology_name(Topology t) {
  switch (t) {
    case Topology::star: return "star";
    case Topology::line: return "line";
    case Topology::ring: return "ring";
    case Topology::complete: return "complete";
  }
  return "?";
}

std::vector<std::pair<int, int>> cnot_pairs(Topology t, int n) {
  std::vector<std::pair<int, int>> out;
  if (n < 2) return out;
  switch (t) {
    case Topology::star:
      for (int i = 1; i < n; ++i) out.emplace_back(0, i);
      break;
    case Topology::line:
      for (int i = 0; i + 1 < n; ++i) out.emplace_back(i, i + 1);
      break;
    case Topology::ring:
      for (int i = 0; i + 1 < n; ++i) out.emplace_back(i, i + 1);
      out.emplace_back(n - 1, 0);
      break;
    case Topology::complete:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (j != i) out.emplace_back(i, j);
      break;
  }
  return out;
}

namespace {

void apply_ry(Eigen::VectorXd& v, int n, int qubit, double theta) {
  const Eigen::Index bit = Eigen::Index(1) << (n - 1 - qubit);
  const double c = std::cos(theta), s = std::sin(theta);
  const Eigen::Index dim = v.size();
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    if (idx & bit) continue;
    const double a = v(idx), b = v(idx | bit);
    v(idx) = c * a - s * b;
    v(idx | bit) = s * a + c * b;
  }
}

void apply_cnot(Eigen::VectorXd& v, int n, int control, int target) {
  const Eigen::Index cb = Eigen::Index(1) << (n - 1 - control);
  const Eigen::Index tb = Eigen::Index(1) << (n - 1 - target);
  const Eigen::Index dim = v.size();
  for (Eigen::Index idx = 0; idx < dim; ++idx)
    if ((idx & cb) && !(idx & tb)) std::swap(v(idx), v(idx | tb));
}

} // namespace

Eigen::VectorXd layered_state(const LayeredAnsatz& a, const Eigen::VectorXd& thetas) {
  if (a.n < 1 || a.n > 14) throw std::invalid_argument("layered_state: need 1 <= n <= 14");
  if (thetas.size() != a.param_count())
    throw std::invalid_argument("layered_state: expected " + std::to_string(a.param_count()) +
                                " angles");
  const auto pairs = cnot_pairs(a.topology, a.n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Eigen::Index(1) << a.n);
  v(0) = 1.0;
  for (int l = 0; l < a.layers; ++l) {
    for (int q = 0; q < a.n; ++q) apply_ry(v, a.n, q, thetas(l * a.n + q));
    for (const auto& [c, t] : pairs) apply_cnot(v, a.n, c, t);
  }
  return v;
}

NmResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x0, const NmOptions& opt) {
  const int d = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> xs(d + 1, x0);
  std::vector<double> fs(d + 1);
  for (int i = 1; i <= d; ++i) xs[i](i - 1) += opt.step;
  for (int i = 0; i <= d; ++i) fs[i] = f(xs[i]);

  std::vector<int> order(d + 1);
  NmResult res;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = order[0], worst = order[d], second = order[d - 1];
    res.trace.push_back(fs[best]);
    if (fs[worst] - fs[best] <= opt.ftol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i <= d; ++i)
      if (i != worst) centroid += xs[i];
    centroid /= d;

    Eigen::VectorXd xr = centroid + (centroid - xs[worst]); // reflection
    const double fr = f(xr);
    if (fr < fs[best]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]); // expansion
      const double fe = f(xe);
      if (fe < fr) {
        xs[worst] = std::move(xe);
        fs[worst] = fe;
      } else {
        xs[worst] = std::move(xr);
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      xs[worst] = std::move(xr);
      fs[worst] = fr;
      continue;
    }
    // contraction toward the better of reflected/worst
    const bool outside = fr < fs[worst];
    Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                : Eigen::VectorXd(centroid - 0.5 * (centroid - xs[worst]));
    const double fc = f(xc);
    if (fc < std::min(fr, fs[worst])) {
      xs[worst] = std::move(xc);
      fs[worst] = fc;
      continue;
    }
    for (int i = 0; i <= d; ++i) { // shrink
      if (i == best) continue;
      xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
      fs[i] = f(xs[i]);
    }
  }
  int best = 0;
  for (int i = 1; i <= d; ++i)
    if (fs[i] < fs[best]) best = i;
  res.x = xs[best];
  res.f = fs[best];
  res.iters = it;
  return res;
}

namespace {

struct RealSystem {
  int nq = 0;
  Eigen::MatrixXd A, A2;
  Eigen::VectorXd b, Ab, xstar; // xstar normalized
};

RealSystem realize(const LinearSystem& system) {
  Eigen::MatrixXcd Ac = assemble_dense(system.A);
  if (Ac.imag().cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("vqe_solve: system matrix must be real");
  RealSystem rs;
  rs.nq = system.n();
  rs.A = Ac.real();
  rs.A2 = rs.A * rs.A;
  Eigen::VectorXcd bc = system.b_dense().amps;
  if (bc.imag().cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("vqe_solve: b must be real");
  rs.b = bc.real();
  rs.Ab = rs.A * rs.b;
  rs.xstar = rs.A.fullPivLu().solve(rs.b);
  rs.xstar.normalize();
  return rs;
}

int scaled_nm_iters(int requested, int dim) {
  return requested > 0 ? requested : std::max(2000, 250 * dim);
}

} // namespace

VqeResult vqe_solve(const LinearSystem& system, const VqeOptions& opt) {
  RealSystem rs = realize(system);
  LayeredAnsatz ansatz{rs.nq, opt.layers, opt.topology};
  const int dim = ansatz.param_count();
  auto loss = [&](const Eigen::VectorXd& th) {
    Eigen::VectorXd x = layered_state(ansatz, th);
    const double xab = x.dot(rs.Ab);
    return x.dot(rs.A2 * x) - xab * xab;
  };

  NmOptions nm;
  nm.max_iters = scaled_nm_iters(opt.nm_iters, dim);
  VqeResult res;
  res.loss = std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> uang(-std::numbers::pi, std::numbers::pi);
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    auto rng = make_rng(opt.seed, 0x56514500u + r);
    Eigen::VectorXd th0(dim);
    for (int i = 0; i < dim; ++i) th0(i) = uang(rng);
    NmResult nr = nelder_mead(loss, th0, nm);
    Eigen::VectorXd x = layered_state(ansatz, nr.x);
    const double ov = std::abs(x.dot(rs.xstar));
    res.restart_losses.push_back(nr.f);
    res.restart_fidelity_sq.push_back(ov * ov);
    if (nr.f < res.loss) {
      res.loss = nr.f;
      res.thetas = nr.x;
      res.fidelity = ov;
      res.fidelity_sq = ov * ov;
      res.loss_trace = std::move(nr.trace);
    }
  }
  return res;
}

AavqeResult aavqe_solve(const LinearSystem& system, const VqeOptions& opt, int steps) {
  if (steps < 1) throw std::invalid_argument("aavqe_solve: steps must be >= 1");
  RealSystem rs = realize(system);
  LayeredAnsatz ansatz{rs.nq + 1, opt.layers, opt.topology};
  const int dim = ansatz.param_count();

  AavqeResult res;
  Eigen::VectorXd theta;
  NmOptions nm;
  nm.max_iters = scaled_nm_iters(opt.nm_iters, dim);
  std::uniform_real_distribution<double> uang(-std::numbers::pi, std::numbers::pi);
  for (int t = 0; t <= steps; ++t) {
    const double s = static_cast<double>(t) / steps;
    Eigen::MatrixXd Hs = build_H(s, system).H.m.real();
    auto energy = [&](const Eigen::VectorXd& th) {
      Eigen::VectorXd x = layered_state(ansatz, th);
      return x.dot(Hs * x);
    };
    if (t == 0) {
      double fbest = std::numeric_limits<double>::infinity();
      for (int r = 0; r < std::max(1, opt.restarts); ++r) {
        auto rng = make_rng(opt.seed, 0x41415600u + r);
        Eigen::VectorXd th0(dim);
        for (int i = 0; i < dim; ++i) th0(i) = uang(rng);
        NmResult nr = nelder_mead(energy, th0, nm);
        if (nr.f < fbest) {
          fbest = nr.f;
          theta = nr.x;
        }
      }
      res.energies.push_back(fbest);
    } else {
      NmResult nr = nelder_mead(energy, theta, nm); // warm start
      theta = nr.x;
      res.energies.push_back(nr.f);
    }
  }
  res.thetas = theta;
  Eigen::VectorXd x = layered_state(ansatz, theta);
  Eigen::VectorXd target(x.size());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  target.head(x.size() / 2) = inv_sqrt2 * rs.xstar;
  target.tail(x.size() / 2) = inv_sqrt2 * rs.xstar;
  const double ov = std::abs(x.dot(target));
  res.fidelity = ov;
  res.fidelity_sq = ov * ov;
  return res;
}

StepStatus imaginary_time_step(ImagTimeState& st, const Eigen::MatrixXd& H,
                               const LayeredAnsatz& ansatz) {
  const int m = static_cast<int>(st.thetas.size());
  if (m != ansatz.param_count())
    throw std::invalid_argument("imaginary_time_step: theta count");
  Eigen::VectorXd psi = layered_state(ansatz, st.thetas);
  // d/dtheta_i of a full-angle Y rotation is the same circuit with theta_i
  // shifted by pi/2, so every derivative state is one extra evaluation
  std::vector<Eigen::VectorXd> dpsi(m);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd th = st.thetas;
    th(i) += std::numbers::pi / 2.0;
    dpsi[i] = layered_state(ansatz, th);
  }
  st.M.resize(m, m);
  st.C.resize(m);
  Eigen::VectorXd Hpsi = H * psi;
  for (int i = 0; i < m; ++i) {
    st.C(i) = dpsi[i].dot(Hpsi);
    for (int j = 0; j <= i; ++j) {
      st.M(i, j) = dpsi[i].dot(dpsi[j]);
      st.M(j, i) = st.M(i, j);
    }
  }
  if (st.M.cwiseAbs().maxCoeff() < 1e-14) return StepStatus::stalled;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(st.M);
  const double cutoff = 1e-8 * std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd proj = eig.eigenvectors().transpose() * st.C;
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i)
    if (eig.eigenvalues()(i) > cutoff) dir += (proj(i) / eig.eigenvalues()(i)) * eig.eigenvectors().col(i);

  const double e0 = psi.dot(Hpsi);
  double dt = st.dt;
  for (int h = 0; h <= 20; ++h) {
    Eigen::VectorXd cand = st.thetas - dir * dt;
    Eigen::VectorXd x = layered_state(ansatz, cand);
    if (x.dot(H * x) <= e0 + 1e-12) {
      st.thetas = std::move(cand);
      st.dt = dt;
      return StepStatus::ok;
    }
    dt *= 0.5;
  }
  return StepStatus::stalled;
}

std::array<Eigen::MatrixXcd, 4> ao_hamiltonians(const LinearSystem& system) {
  if (system.n() > 8) throw std::invalid_argument("ao_hamiltonians: need n <= 8");
  const Eigen::Index dim = Eigen::Index(1) << system.n();
  Eigen::MatrixXcd A = assemble_dense(system.A);
  Eigen::VectorXcd b = system.b_dense().amps;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::VectorXcd vp(2 * dim), vm(2 * dim), w(2 * dim);
  vp.head(dim) = inv_sqrt2 * b;
  vp.tail(dim) = inv_sqrt2 * b;
  vm.head(dim) = inv_sqrt2 * b;
  vm.tail(dim) = -inv_sqrt2 * b;
  Eigen::VectorXcd Ab = A * b;
  w.head(dim) = inv_sqrt2 * Ab;
  w.tail(dim) = inv_sqrt2 * Ab;

  std::array<Eigen::MatrixXcd, 4> H;
  H[0] = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
  Eigen::MatrixXcd A2 = A * A;
  H[0].topLeftCorner(dim, dim) = A2;
  H[0].bottomRightCorner(dim, dim) = A2;
  H[1] = vm * vm.adjoint();
  H[2] = w * w.adjoint();
  H[3] = vm * w.adjoint() + w * vm.adjoint();
  return H;
}

AOAnsatz make_ao_ansatz(const LinearSystem& system, int p) {
  if (p < 1) throw std::invalid_argument("make_ao_ansatz: p must be >= 1");
  AOAnsatz a;
  a.n = system.n();
  a.p = p;
  auto Hs = ao_hamiltonians(system);
  for (int j = 0; j < 4; ++j) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(Hs[j]);
    a.evecs[j] = eig.eigenvectors();
    a.evals[j] = eig.eigenvalues();
  }
  const Eigen::Index dim = Eigen::Index(1) << a.n;
  Eigen::VectorXcd b = system.b_dense().amps;
  a.start.resize(2 * dim);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  a.start.head(dim) = inv_sqrt2 * b;
  a.start.tail(dim) = inv_sqrt2 * b;
  a.h_full = build_H(1.0, system).H.m;
  return a;
}

Eigen::VectorXcd ao_ansatz_state(const AOAnsatz& a, const Eigen::MatrixXd& thetas) {
  if (thetas.rows() != a.p || thetas.cols() != 4)
    throw std::invalid_argument("ao_ansatz_state: thetas must be p x 4");
  Eigen::VectorXcd v = a.start;
  for (int k = 0; k < a.p; ++k)
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXcd coeff = a.evecs[j].adjoint() * v;
      for (Eigen::Index i = 0; i < coeff.size(); ++i)
        coeff(i) *= std::exp(cmplx(0, -thetas(k, j) * a.evals[j](i)));
      v = a.evecs[j] * coeff;
    }
  return v;
}

double ao_loss(const AOAnsatz& a, const Eigen::MatrixXd& thetas) {
  Eigen::VectorXcd v = ao_ansatz_state(a, thetas);
  return (v.adjoint() * (a.h_full * v))(0).real();
}

} // namespace qls
