#include "qls/operators.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "qls/rng.hpp"
#include "qls/version.hpp"

namespace qls {

using json = nlohmann::json;

namespace {

int log2_exact(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index(1) << n) < dim) ++n;
  if ((Eigen::Index(1) << n) != dim)
    throw std::invalid_argument("dimension must be a power of two, got " + std::to_string(dim));
  return n;
}

std::shared_ptr<const DenseOperatorMatrix> dense_term(Eigen::MatrixXcd m, bool herm = false) {
  auto p = std::make_shared<DenseOperatorMatrix>();
  p->n = log2_exact(m.rows());
  p->m = std::move(m);
  p->hermitian = herm;
  return p;
}

} // namespace

void DenseOperatorMatrix::validate() const {
  if (m.rows() != m.cols() || m.rows() != (Eigen::Index(1) << n))
    throw std::invalid_argument("DenseOperatorMatrix: shape does not match qubit count");
  if (hermitian) {
    double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-10)
      throw std::invalid_argument("DenseOperatorMatrix: hermitian flag violated, max dev " +
                                  std::to_string(dev));
  }
}

double DecomposedOperator::beta_l1() const {
  double s = 0;
  for (const auto& t : terms) s += std::abs(t.beta);
  return s;
}

void DecomposedOperator::validate() const {
  for (const auto& t : terms) {
    int tn = std::holds_alternative<PauliString>(t.u)
                 ? std::get<PauliString>(t.u).n
                 : std::get<std::shared_ptr<const DenseOperatorMatrix>>(t.u)->n;
    bool tp = std::holds_alternative<PauliString>(t.u);
    if (tn != n) throw std::invalid_argument("DecomposedOperator: term qubit count mismatch");
    if (tp != (backend == Backend::pauli))
      throw std::invalid_argument("DecomposedOperator: term backend mismatch");
  }
  if (n <= 10 && hermitian_flag) {
    Eigen::MatrixXcd M = assemble_dense(*this);
    double dev = (M - M.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-10)
      throw std::invalid_argument("DecomposedOperator: hermitian flag violated");
  }
}

DenseState LinearSystem::b_dense() const {
  if (std::holds_alternative<ProductState>(b)) return to_dense(std::get<ProductState>(b));
  return std::get<DenseState>(b);
}

double LinearSystem::b_norm() const {
  if (std::holds_alternative<ProductState>(b)) return 1.0;
  return std::get<DenseState>(b).norm();
}

DenseOperatorMatrix haar_unitary(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be >= 1");
  auto rng = make_rng(seed, 0x48414152);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = cmplx(g(rng), g(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::VectorXcd d = qr.matrixQR().diagonal();
  for (int i = 0; i < dim; ++i) q.col(i) *= d(i) / std::abs(d(i));
  DenseOperatorMatrix u;
  u.n = (dim & (dim - 1)) == 0 ? log2_exact(dim) : 0;
  u.m = std::move(q);
  return u;
}

DenseOperatorMatrix haar_orthogonal(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("haar_orthogonal: dim must be >= 1");
  auto rng = make_rng(seed, 0x4f525448);
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd d = qr.matrixQR().diagonal();
  for (int i = 0; i < dim; ++i) q.col(i) *= d(i) >= 0 ? 1.0 : -1.0;
  DenseOperatorMatrix u;
  u.n = (dim & (dim - 1)) == 0 ? log2_exact(dim) : 0;
  u.m = q.cast<cmplx>();
  return u;
}

LinearSystem gen_haar_sum_system(int dim, int S, std::pair<double, double> coeff_range,
                                 std::uint64_t seed) {
  if (dim > (1 << 14)) throw std::invalid_argument("gen_haar_sum_system: dim too large (max 2^14)");
  int n = log2_exact(dim);
  auto rng = make_rng(seed, 0x4753594d);
  std::uniform_real_distribution<double> coeff(coeff_range.first, coeff_range.second);

  std::vector<double> alphas(S);
  std::vector<std::shared_ptr<const DenseOperatorMatrix>> us(S);
  for (int i = 0; i < S; ++i) {
    alphas[i] = coeff(rng);
    us[i] = dense_term(haar_unitary(dim, rng()).m);
  }

  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < S; ++i) M += alphas[i] * (us[i]->m + us[i]->m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(M);
  double rho = eig.eigenvalues().cwiseAbs().maxCoeff();
  double smin = eig.eigenvalues().cwiseAbs().minCoeff();

  LinearSystem sys;
  sys.A.n = n;
  sys.A.backend = Backend::dense;
  sys.A.hermitian_flag = true;
  sys.A.normalized_flag = true;
  for (int i = 0; i < S; ++i) {
    sys.A.terms.push_back({alphas[i] / rho, us[i]});
    sys.A.terms.push_back({alphas[i] / rho, dense_term(us[i]->m.adjoint())});
  }
  sys.b = ProductState::zero(n);
  if (smin > 0) sys.kappa_bound = rho / smin;
  sys.metadata = {"haar-sum", seed, S, rho, coeff_range.first, coeff_range.second};
  return sys;
}

LinearSystem gen_pauli_sum_system(int n, int S, std::pair<double, double> coeff_range,
                                  std::uint64_t seed, std::string_view letter_set) {
  if (letter_set.empty()) throw std::invalid_argument("gen_pauli_sum_system: empty letter set");
  auto rng = make_rng(seed, 0x50535953);
  std::uniform_real_distribution<double> coeff(coeff_range.first, coeff_range.second);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(letter_set.size()) - 1);

  // merge duplicate rays by summing coefficients, keep first-draw order
  std::vector<std::pair<double, PauliString>> merged;
  std::unordered_map<RayKey, std::size_t, RayKeyHash> index;
  for (int i = 0; i < S; ++i) {
    double a = coeff(rng);
    std::string letters(static_cast<std::size_t>(n), 'I');
    for (int j = 0; j < n; ++j) letters[j] = letter_set[pick(rng)];
    PauliString p = PauliString::from_letters(letters);
    auto [ray, ph] = canonical_form(p);
    auto it = index.find(ray);
    if (it == index.end()) {
      index.emplace(std::move(ray), merged.size());
      merged.emplace_back(a, std::move(p));
    } else {
      merged[it->second].first += a;
    }
  }
  std::erase_if(merged, [](const auto& t) { return std::abs(t.first) < 1e-15; });
  if (merged.empty())
    throw std::runtime_error("gen_pauli_sum_system: all terms cancelled, retry with another seed");

  double l1 = 0;
  for (const auto& [a, p] : merged) l1 += std::abs(a);

  LinearSystem sys;
  sys.A.n = n;
  sys.A.backend = Backend::pauli;
  sys.A.hermitian_flag = true;
  sys.A.normalized_flag = true;
  for (auto& [a, p] : merged) sys.A.terms.push_back({a / l1, std::move(p)});
  sys.b = ProductState::zero(n);
  sys.metadata = {"pauli-sum", seed, S, l1, coeff_range.first, coeff_range.second};
  return sys;
}

LinearSystem gen_orthogonal_sum_system(int dim, int S, std::pair<double, double> coeff_range,
                                       std::uint64_t seed) {
  if (dim > (1 << 14)) throw std::invalid_argument("gen_orthogonal_sum_system: dim too large");
  int n = log2_exact(dim);
  auto rng = make_rng(seed, 0x4f535953);
  std::uniform_real_distribution<double> coeff(coeff_range.first, coeff_range.second);

  std::vector<double> alphas(S);
  std::vector<std::shared_ptr<const DenseOperatorMatrix>> os(S);
  for (int i = 0; i < S; ++i) {
    alphas[i] = coeff(rng);
    os[i] = dense_term(haar_orthogonal(dim, rng()).m);
  }
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < S; ++i) M += alphas[i] * (os[i]->m + os[i]->m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(M);
  double rho = eig.eigenvalues().cwiseAbs().maxCoeff();
  double smin = eig.eigenvalues().cwiseAbs().minCoeff();

  LinearSystem sys;
  sys.A.n = n;
  sys.A.backend = Backend::dense;
  sys.A.hermitian_flag = true;
  sys.A.normalized_flag = true;
  for (int i = 0; i < S; ++i) {
    sys.A.terms.push_back({alphas[i] / rho, os[i]});
    sys.A.terms.push_back({alphas[i] / rho, dense_term(os[i]->m.transpose())});
  }
  sys.b = ProductState::zero(n);
  if (smin > 0) sys.kappa_bound = rho / smin;
  sys.metadata = {"orth-sum", seed, S, rho, coeff_range.first, coeff_range.second};
  return sys;
}

Propagator::Propagator(const DenseOperatorMatrix& A) {
  if (!A.hermitian) throw std::invalid_argument("Propagator: operator must be hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(A.m);
  eigenvalues = eig.eigenvalues();
  eigenvectors = eig.eigenvectors();
}

DenseState Propagator::apply(double t, const DenseState& v) const {
  Eigen::VectorXcd coeffs = eigenvectors.adjoint() * v.amps;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i)
    coeffs(i) *= std::exp(cmplx(0, -eigenvalues(i) * t));
  DenseState out;
  out.n = v.n;
  out.amps = eigenvectors * coeffs;
  return out;
}

DenseState evolve_exp(const DenseOperatorMatrix& A, double t, const DenseState& v) {
  return Propagator(A).apply(t, v);
}

AdiabaticHamiltonian build_H(double s, const LinearSystem& system) {
  if (system.n() > 10) throw std::invalid_argument("build_H: n too large for dense assembly");
  const Eigen::Index dim = Eigen::Index(1) << system.n();
  Eigen::MatrixXcd A = assemble_dense(system.A);

  Eigen::MatrixXcd As = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
  // Z(x)I block-diagonal, X(x)A block-off-diagonal; added qubit is the most
  // significant index bit.
  As.topLeftCorner(dim, dim) = (1 - s) * Eigen::MatrixXcd::Identity(dim, dim);
  As.bottomRightCorner(dim, dim) = -(1 - s) * Eigen::MatrixXcd::Identity(dim, dim);
  As.topRightCorner(dim, dim) = s * A;
  As.bottomLeftCorner(dim, dim) = s * A;

  Eigen::VectorXcd b = system.b_dense().amps;
  Eigen::VectorXcd pb(2 * dim);
  pb.head(dim) = b / std::sqrt(2.0);
  pb.tail(dim) = b / std::sqrt(2.0);

  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(2 * dim, 2 * dim) - pb * pb.adjoint();
  Eigen::MatrixXcd H = As * proj * As;
  H = 0.5 * (H + H.adjoint().eval());

  AdiabaticHamiltonian out;
  out.s = s;
  out.H.n = system.n() + 1;
  out.H.m = std::move(H);
  out.H.hermitian = true;
  return out;
}

SpectralBounds spectral_bounds(const DecomposedOperator& A) {
  SpectralBounds out;
  if (A.backend == Backend::pauli) {
    out.rho = A.beta_l1();
    out.bound_only = true;
    return out;
  }
  Eigen::MatrixXcd M = assemble_dense(A);
  if (A.hermitian_flag) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(M);
    out.rho = eig.eigenvalues().cwiseAbs().maxCoeff();
    double smin = eig.eigenvalues().cwiseAbs().minCoeff();
    if (smin > 0) out.kappa = out.rho / smin;
  } else {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
    out.rho = svd.singularValues()(0);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin > 0) out.kappa = out.rho / smin;
  }
  return out;
}

Eigen::MatrixXcd assemble_dense(const DecomposedOperator& A) {
  if (A.n > 12) throw std::invalid_argument("assemble_dense: n too large");
  const Eigen::Index dim = Eigen::Index(1) << A.n;
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : A.terms) {
    if (std::holds_alternative<PauliString>(t.u))
      M += t.beta * dense_matrix(std::get<PauliString>(t.u));
    else
      M += t.beta * std::get<std::shared_ptr<const DenseOperatorMatrix>>(t.u)->m;
  }
  return M;
}

LinearSystem to_dense_backend(const LinearSystem& system) {
  if (system.A.backend == Backend::dense) return system;
  LinearSystem out = system;
  out.A.backend = Backend::dense;
  out.A.terms.clear();
  for (const auto& t : system.A.terms) {
    const auto& p = std::get<PauliString>(t.u);
    out.A.terms.push_back({t.beta, dense_term(dense_matrix(p), p.is_hermitian())});
  }
  return out;
}

cmplx overlap_A(const DecomposedOperator& A, const DenseState& u, const DenseState& v) {
  cmplx acc = 0;
  for (const auto& t : A.terms) {
    if (std::holds_alternative<PauliString>(t.u)) {
      DenseState w = v;
      apply_pauli(std::get<PauliString>(t.u), w);
      acc += t.beta * u.amps.dot(w.amps);
    } else {
      acc += t.beta *
             u.amps.dot(std::get<std::shared_ptr<const DenseOperatorMatrix>>(t.u)->m * v.amps);
    }
  }
  return acc;
}

Eigen::VectorXcd apply_A(const DecomposedOperator& A, const Eigen::VectorXcd& v, bool adjoint) {
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(v.size());
  for (const auto& t : A.terms) {
    if (std::holds_alternative<PauliString>(t.u)) {
      DenseState w;
      w.n = std::get<PauliString>(t.u).n;
      w.amps = v;
      apply_pauli(adjoint ? pauli_adjoint(std::get<PauliString>(t.u))
                          : std::get<PauliString>(t.u),
                  w);
      acc += t.beta * w.amps; // beta real, so no conjugation under adjoint
    } else {
      const auto& m = std::get<std::shared_ptr<const DenseOperatorMatrix>>(t.u)->m;
      acc += t.beta * (adjoint ? (m.adjoint() * v).eval() : (m * v).eval());
    }
  }
  return acc;
}

cmplx overlap_A(const DecomposedOperator& A, const SymbolicState& u, const SymbolicState& v) {
  if (A.backend != Backend::pauli)
    throw std::invalid_argument("overlap_A: symbolic states need the pauli backend");
  if (!(u.base == v.base))
    throw std::invalid_argument("overlap_A: symbolic states must share the base product state");
  PauliString ud = pauli_adjoint(u.op);
  cmplx acc = 0;
  for (const auto& t : A.terms) {
    PauliString prod = pauli_mul(ud, pauli_mul(std::get<PauliString>(t.u), v.op));
    acc += t.beta * expectation_product_state(prod, u.base);
  }
  return std::conj(u.scale) * v.scale * acc;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

constexpr char kSidecarMagic[8] = {'Q', 'L', 'S', 'D', 'N', 'S', '1', '\n'};

std::string sidecar_path(const std::string& json_path) {
  std::string p = json_path;
  const std::string suffix = ".json";
  if (p.size() >= suffix.size() && p.compare(p.size() - suffix.size(), suffix.size(), suffix) == 0)
    p.resize(p.size() - suffix.size());
  return p + ".dense.bin";
}

void write_matrix(std::ofstream& f, const Eigen::MatrixXcd& m) {
  std::uint64_t rows = m.rows(), cols = m.cols();
  f.write(reinterpret_cast<const char*>(&rows), 8);
  f.write(reinterpret_cast<const char*>(&cols), 8);
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) {
      double re = m(i, j).real(), im = m(i, j).imag();
      f.write(reinterpret_cast<const char*>(&re), 8);
      f.write(reinterpret_cast<const char*>(&im), 8);
    }
}

Eigen::MatrixXcd read_matrix(std::ifstream& f) {
  std::uint64_t rows = 0, cols = 0;
  f.read(reinterpret_cast<char*>(&rows), 8);
  f.read(reinterpret_cast<char*>(&cols), 8);
  if (!f || rows > (1u << 20) || cols > (1u << 20))
    throw std::runtime_error("system sidecar: corrupt matrix header");
  Eigen::MatrixXcd m(rows, cols);
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) {
      double re, im;
      f.read(reinterpret_cast<char*>(&re), 8);
      f.read(reinterpret_cast<char*>(&im), 8);
      m(i, j) = cmplx(re, im);
    }
  if (!f) throw std::runtime_error("system sidecar: truncated matrix data");
  return m;
}

} // namespace

void save_system(const std::string& path, const LinearSystem& system) {
  json j;
  j["format"] = "qls-system";
  j["version"] = kVersion;
  j["n"] = system.n();
  j["backend"] = system.A.backend == Backend::pauli ? "pauli" : "dense";
  j["hermitian"] = system.A.hermitian_flag;
  j["normalized"] = system.A.normalized_flag;
  j["metadata"] = {{"family", system.metadata.family}, {"seed", system.metadata.seed},
                   {"S", system.metadata.S},           {"scale", system.metadata.scale},
                   {"coeff_lo", system.metadata.coeff_lo}, {"coeff_hi", system.metadata.coeff_hi}};
  if (system.kappa_bound) j["kappa"] = *system.kappa_bound;

  bool need_sidecar = system.A.backend == Backend::dense ||
                      std::holds_alternative<DenseState>(system.b);

  json terms = json::array();
  for (const auto& t : system.A.terms) {
    if (std::holds_alternative<PauliString>(t.u))
      terms.push_back({{"coeff", t.beta}, {"pauli", std::get<PauliString>(t.u).letters()}});
    else
      terms.push_back({{"coeff", t.beta}});
  }
  j["terms"] = std::move(terms);

  if (std::holds_alternative<ProductState>(system.b)) {
    const auto& b = std::get<ProductState>(system.b);
    bool is_zero = b == ProductState::zero(b.n);
    if (is_zero) {
      j["b"] = {{"kind", "zero"}};
    } else {
      json amps = json::array();
      for (const auto& q : b.amps)
        amps.push_back({q[0].real(), q[0].imag(), q[1].real(), q[1].imag()});
      j["b"] = {{"kind", "product"}, {"amps", std::move(amps)}};
    }
  } else {
    j["b"] = {{"kind", "dense"}};
  }

  if (need_sidecar) {
    std::string sp = sidecar_path(path);
    j["dense_sidecar"] = sp.substr(sp.find_last_of('/') + 1);
    std::ofstream f(sp, std::ios::binary);
    if (!f) throw std::runtime_error("save_system: cannot open sidecar " + sp);
    f.write(kSidecarMagic, 8);
    std::uint32_t n = static_cast<std::uint32_t>(system.n());
    std::uint32_t nterm = 0;
    for (const auto& t : system.A.terms)
      if (!std::holds_alternative<PauliString>(t.u)) ++nterm;
    std::uint8_t has_b = std::holds_alternative<DenseState>(system.b) ? 1 : 0;
    f.write(reinterpret_cast<const char*>(&n), 4);
    f.write(reinterpret_cast<const char*>(&nterm), 4);
    f.write(reinterpret_cast<const char*>(&has_b), 1);
    for (const auto& t : system.A.terms)
      if (!std::holds_alternative<PauliString>(t.u))
        write_matrix(f, std::get<std::shared_ptr<const DenseOperatorMatrix>>(t.u)->m);
    if (has_b) {
      const auto& bv = std::get<DenseState>(system.b).amps;
      write_matrix(f, bv);
    }
    if (!f) throw std::runtime_error("save_system: sidecar write failed");
  }

  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_system: cannot open " + path);
  f << j.dump(1) << "\n";
}

LinearSystem load_system(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_system: cannot open " + path);
  json j = json::parse(f);
  if (j.value("format", "") != "qls-system")
    throw std::runtime_error("load_system: not a qls-system file: " + path);

  LinearSystem sys;
  int n = j.at("n").get<int>();
  sys.A.n = n;
  sys.A.backend = j.at("backend").get<std::string>() == "pauli" ? Backend::pauli : Backend::dense;
  sys.A.hermitian_flag = j.value("hermitian", false);
  sys.A.normalized_flag = j.value("normalized", false);
  if (j.contains("kappa")) sys.kappa_bound = j["kappa"].get<double>();
  if (j.contains("metadata")) {
    const auto& m = j["metadata"];
    sys.metadata.family = m.value("family", "custom");
    sys.metadata.seed = m.value("seed", std::uint64_t(0));
    sys.metadata.S = m.value("S", 0);
    sys.metadata.scale = m.value("scale", 1.0);
    sys.metadata.coeff_lo = m.value("coeff_lo", 0.0);
    sys.metadata.coeff_hi = m.value("coeff_hi", 0.0);
  }

  std::vector<Eigen::MatrixXcd> dense_terms;
  Eigen::MatrixXcd dense_b;
  bool has_dense_b = false;
  if (j.contains("dense_sidecar")) {
    std::string sp = sidecar_path(path);
    std::ifstream sf(sp, std::ios::binary);
    if (!sf) throw std::runtime_error("load_system: cannot open sidecar " + sp);
    char magic[8];
    sf.read(magic, 8);
    if (!sf || std::memcmp(magic, kSidecarMagic, 8) != 0)
      throw std::runtime_error("load_system: bad sidecar magic in " + sp);
    std::uint32_t sn = 0, nterm = 0;
    std::uint8_t has_b = 0;
    sf.read(reinterpret_cast<char*>(&sn), 4);
    sf.read(reinterpret_cast<char*>(&nterm), 4);
    sf.read(reinterpret_cast<char*>(&has_b), 1);
    if (static_cast<int>(sn) != n) throw std::runtime_error("load_system: sidecar n mismatch");
    for (std::uint32_t k = 0; k < nterm; ++k) dense_terms.push_back(read_matrix(sf));
    if (has_b) {
      dense_b = read_matrix(sf);
      has_dense_b = true;
    }
  }

  std::size_t dense_idx = 0;
  for (const auto& t : j.at("terms")) {
    double beta = t.at("coeff").get<double>();
    if (t.contains("pauli")) {
      sys.A.terms.push_back({beta, PauliString::from_letters(t["pauli"].get<std::string>())});
    } else {
      if (dense_idx >= dense_terms.size())
        throw std::runtime_error("load_system: dense term count mismatch");
      sys.A.terms.push_back({beta, dense_term(std::move(dense_terms[dense_idx++]))});
    }
  }

  const auto& bj = j.at("b");
  std::string kind = bj.at("kind").get<std::string>();
  if (kind == "zero") {
    sys.b = ProductState::zero(n);
  } else if (kind == "product") {
    ProductState b;
    b.n = n;
    for (const auto& q : bj.at("amps"))
      b.amps.push_back({cmplx(q[0].get<double>(), q[1].get<double>()),
                        cmplx(q[2].get<double>(), q[3].get<double>())});
    b.validate();
    sys.b = std::move(b);
  } else if (kind == "dense") {
    if (!has_dense_b) throw std::runtime_error("load_system: dense b missing from sidecar");
    DenseState b;
    b.n = n;
    b.amps = dense_b.col(0);
    sys.b = std::move(b);
  } else {
    throw std::runtime_error("load_system: unknown b kind: " + kind);
  }
  sys.A.validate();
  return sys;
}

} // namespace qls
