#include "qls/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qls/checks.hpp"
#include "qls/cqs.hpp"
#include "qls/landscape.hpp"
#include "qls/measurement.hpp"
#include "qls/operators.hpp"
#include "qls/rng.hpp"
#include "qls/variational.hpp"
#include "qls/version.hpp"

namespace qls::cli {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output path '" + path + "'");
  out << content;
  if (!out) throw std::invalid_argument("failed writing output path '" + path + "'");
}

// every emitted file starts with the echoed configuration and the version
std::string config_line(const std::string& echo) {
  return "# config: " + echo + " version=" + kVersion + "\n";
}

struct GenArgs {
  std::string family, letters = "IXYZ", out;
  int n = 6, dim = 256, S = 0;
  std::uint64_t seed = 0;
  double lo = -2, hi = 2;
};

int run_gen(const GenArgs& a) {
  if (a.out.empty()) throw std::invalid_argument("--out is required for gen");
  LinearSystem sys;
  if (a.family == "pauli") {
    sys = gen_pauli_sum_system(a.n, a.S > 0 ? a.S : 8, {a.lo, a.hi}, a.seed, a.letters);
  } else if (a.family == "haar") {
    sys = gen_haar_sum_system(a.dim, a.S > 0 ? a.S : 10, {a.lo, a.hi}, a.seed);
  } else if (a.family == "orthogonal") {
    sys = gen_orthogonal_sum_system(a.dim, a.S > 0 ? a.S : 10, {a.lo, a.hi}, a.seed);
  } else {
    throw std::invalid_argument("--family '" + a.family +
                                "' invalid (expected pauli|haar|orthogonal)");
  }
  save_system(a.out, sys);
  std::cout << "wrote " << a.out << " family=" << sys.metadata.family << " n=" << sys.n()
            << " K=" << sys.A.K() << " seed=" << a.seed << "\n";
  return 0;
}

struct SolveArgs {
  std::string system, strategy = "gradient", loss = "lr", out, trace;
  int depth = 3, max_nodes = -1, max_iters = 50;
  double tol = 1e-10, grad_tol_scale = 1e-8, kappa = 0, eps = 0.1, delta = 0.01;
  long long shots = 0;
  std::uint64_t seed = 0;
  bool exact = false, strict = false;
};

int run_solve(const SolveArgs& a) {
  LinearSystem sys = load_system(a.system);
  CqsOptions opt;
  if (a.strategy == "bfs")
    opt.strategy = CqsOptions::Strategy::bfs;
  else if (a.strategy == "gradient")
    opt.strategy = CqsOptions::Strategy::gradient;
  else if (a.strategy == "hamiltonian")
    opt.strategy = CqsOptions::Strategy::hamiltonian;
  else
    throw std::invalid_argument("--strategy '" + a.strategy +
                                "' invalid (expected bfs|gradient|hamiltonian)");
  if (a.loss == "lr")
    opt.loss = LossKind::LR;
  else if (a.loss == "lt")
    opt.loss = LossKind::LT;
  else
    throw std::invalid_argument("--loss '" + a.loss + "' invalid (expected lr|lt)");
  opt.depth = a.depth;
  opt.max_nodes = a.max_nodes;
  opt.max_iters = a.max_iters;
  opt.tol = a.tol;
  opt.grad_tol_scale = a.grad_tol_scale;
  opt.kappa = a.kappa;
  opt.eps = a.eps;
  opt.mode = (a.shots > 0 && !a.exact) ? EstMode::shots : EstMode::exact;
  opt.shots = a.shots > 0 ? a.shots : 10000;
  opt.delta = a.delta;
  opt.seed = a.seed;

  SolveReport rep = cqs_solve(sys, opt);

  if (!a.out.empty()) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config"] = rep.config_echo;
    j["loss_trace"] = rep.loss_trace;
    j["shots_trace"] = rep.shots_trace;
    j["chosen_paths"] = rep.chosen_paths;
    std::vector<double> are, aim;
    for (Eigen::Index i = 0; i < rep.alpha.size(); ++i) {
      are.push_back(rep.alpha(i).real());
      aim.push_back(rep.alpha(i).imag());
    }
    j["alpha_re"] = are;
    j["alpha_im"] = aim;
    std::vector<std::vector<double>> gs;
    for (const cmplx& g : rep.gradient_overlaps) gs.push_back({g.real(), g.imag()});
    j["gradient_overlaps"] = gs;
    j["shots_used"] = rep.shots_used;
    j["converged"] = rep.converged;
    j["stop_reason"] = rep.stop_reason;
    j["decrease_violations"] = rep.decrease_violations;
    j["final_loss"] = rep.final_loss;
    j["nodes"] = rep.nodes;
    j["wall_seconds"] = rep.wall_seconds;
    write_text(a.out, j.dump(2) + "\n");
  }
  if (!a.trace.empty()) {
    std::string csv = config_line(rep.config_echo);
    csv += "iter,loss,g,nodes,shots\n";
    const bool bfs = opt.strategy == CqsOptions::Strategy::bfs;
    for (std::size_t i = 0; i < rep.loss_trace.size(); ++i) {
      const double g = (!bfs && i > 0 && i - 1 < rep.gradient_overlaps.size())
                           ? std::abs(rep.gradient_overlaps[i - 1])
                           : 0.0;
      const int nodes = bfs || opt.strategy == CqsOptions::Strategy::gradient
                            ? static_cast<int>(i) + 1
                            : rep.nodes;
      const unsigned long long sh = i < rep.shots_trace.size() ? rep.shots_trace[i] : 0;
      csv += std::to_string(i) + "," + g17(rep.loss_trace[i]) + "," + g17(g) + "," +
             std::to_string(nodes) + "," + std::to_string(sh) + "\n";
    }
    write_text(a.trace, csv);
  }
  std::cout << "final_loss=" << g17(rep.final_loss) << " nodes=" << rep.nodes
            << " stop=" << rep.stop_reason << " shots=" << rep.shots_used << "\n";
  if (a.strict && !rep.converged) {
    std::cerr << "not converged (loss " << g17(rep.final_loss) << " > tol " << g17(opt.tol)
              << ")\n";
    return 2;
  }
  return 0;
}

std::vector<int> weight_mask(int n, int w) {
  std::vector<int> k(n, 0);
  for (int i = 0; i < w && i < n; ++i) k[i] = 1;
  return k;
}

std::vector<double> linspace(double a, double b, int pts) {
  std::vector<double> v;
  if (pts == 1) {
    v.push_back(a);
    return v;
  }
  for (int i = 0; i < pts; ++i) v.push_back(a + (b - a) * i / (pts - 1));
  return v;
}

struct ToyArgs {
  int n = 0, grid = 101, weight = -1;
  std::string loss = "lh", out;
};

int run_landscape_toy(const ToyArgs& a) {
  if (a.n < 1) throw std::invalid_argument("--n must be >= 1");
  const int w = a.weight > 0 ? a.weight : (a.n + 1) / 2;
  if (a.loss != "lh" && a.loss != "lr")
    throw std::invalid_argument("--loss '" + a.loss + "' invalid (expected lh|lr)");
  const LossKind loss = a.loss == "lr" ? LossKind::LR : LossKind::LH;
  std::vector<double> grid = linspace(0, 1, a.grid);
  std::vector<double> vals = toy_loss_cut(a.n, weight_mask(a.n, w), loss, grid);
  std::ostringstream echo;
  echo << "cmd=landscape-toy n=" << a.n << " weight=" << w << " loss=" << a.loss
       << " grid=" << a.grid;
  std::string csv = config_line(echo.str()) + "lambda,loss\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    csv += g17(grid[i]) + "," + g17(vals[i]) + "\n";
  if (a.out.empty())
    std::cout << csv;
  else
    write_text(a.out, csv);
  return 0;
}

struct AdiabaticArgs {
  int n = 0, grid = 21, s_points = 11, weight = -1;
  std::string out;
};

int run_landscape_adiabatic(const AdiabaticArgs& a) {
  if (a.n < 1) throw std::invalid_argument("--n must be >= 1");
  const int w = a.weight > 0 ? a.weight : (a.n + 1) / 2;
  std::vector<double> sg = linspace(0, 1, a.s_points);
  std::vector<double> lg = linspace(0, 1, a.grid);
  Eigen::MatrixXd m = adiabatic_cut(a.n, weight_mask(a.n, w), sg, lg);
  std::ostringstream echo;
  echo << "cmd=landscape-adiabatic n=" << a.n << " weight=" << w << " s_points=" << a.s_points
       << " grid=" << a.grid;
  std::string csv = config_line(echo.str()) + "s,lambda,loss\n";
  for (std::size_t si = 0; si < sg.size(); ++si)
    for (std::size_t li = 0; li < lg.size(); ++li)
      csv += g17(sg[si]) + "," + g17(lg[li]) + "," + g17(m(si, li)) + "\n";
  if (a.out.empty())
    std::cout << csv;
  else
    write_text(a.out, csv);
  return 0;
}

struct LocalityArgs {
  int n = 0, trials = 100, depth = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_landscape_locality(const LocalityArgs& a) {
  if (a.n < 2) throw std::invalid_argument("--n must be >= 2");
  const int depth = a.depth > 0 ? a.depth : a.n * a.n;
  LocalLossStats st = local_loss_concentration(a.n, depth, a.trials, a.seed);
  std::ostringstream echo;
  echo << "cmd=landscape-locality n=" << a.n << " depth=" << depth << " trials=" << a.trials
       << " seed=" << a.seed;
  std::string csv = config_line(echo.str()) + "trial,loss\n";
  for (std::size_t i = 0; i < st.losses.size(); ++i)
    csv += std::to_string(i) + "," + g17(st.losses[i]) + "\n";
  if (a.out.empty())
    std::cout << csv;
  else
    write_text(a.out, csv);
  std::cout << "mean=" << g17(st.mean) << " variance=" << g17(st.variance)
            << " median|L-1/2|=" << g17(st.median_dev_half) << "\n";
  return 0;
}

struct VqeArgs {
  std::string topology = "star", out;
  int layers = 3, n = 16, trials = 100, steps = 0, restarts = 5, nm_iters = 0;
  std::uint64_t seed = 0;
};

int run_vqe(const VqeArgs& a) {
  if (a.n < 2 || (a.n & (a.n - 1)) != 0)
    throw std::invalid_argument("--n must be a power-of-two system dimension >= 2");
  VqeOptions opt;
  opt.topology = topology_from_string(a.topology);
  opt.layers = a.layers;
  opt.restarts = a.restarts;
  opt.nm_iters = a.nm_iters;
  std::ostringstream echo;
  echo << "cmd=vqe topology=" << a.topology << " layers=" << a.layers << " n=" << a.n
       << " trials=" << a.trials << " aavqe_steps=" << a.steps << " restarts=" << a.restarts
       << " seed=" << a.seed;
  std::string csv = config_line(echo.str()) + "trial,layers,topology,steps,fidelity\n";
  double mean_sq = 0, mean_ov = 0;
  for (int t = 0; t < a.trials; ++t) {
    LinearSystem sys = gen_orthogonal_sum_system(a.n, 10, {-2, 2}, derive_seed(a.seed, t));
    double fid_sq, fid;
    opt.seed = derive_seed(a.seed, 100000 + t);
    if (a.steps > 0) {
      AavqeResult r = aavqe_solve(sys, opt, a.steps);
      fid_sq = r.fidelity_sq;
      fid = r.fidelity;
    } else {
      VqeResult r = vqe_solve(sys, opt);
      fid_sq = r.fidelity_sq;
      fid = r.fidelity;
    }
    mean_sq += fid_sq;
    mean_ov += fid;
    csv += std::to_string(t) + "," + std::to_string(a.layers) + "," + a.topology + "," +
           std::to_string(a.steps) + "," + g17(fid_sq) + "\n";
  }
  if (a.out.empty())
    std::cout << csv;
  else
    write_text(a.out, csv);
  std::cout << "mean_squared_fidelity=" << g17(mean_sq / a.trials)
            << " mean_fidelity=" << g17(mean_ov / a.trials) << "\n";
  return 0;
}

struct BenchArgs {
  std::string system, loss = "lr", out;
  int max_nodes = 50, dim = 256, S = 10;
  std::uint64_t seed = 0;
};

int run_bench(const BenchArgs& a) {
  LinearSystem sys = a.system.empty()
                         ? gen_haar_sum_system(a.dim, a.S, {-2, 2}, a.seed)
                         : load_system(a.system);
  const LossKind loss = a.loss == "lt" ? LossKind::LT : LossKind::LR;
  // smallest BFS depth whose full tree covers max_nodes
  int depth = 1;
  long long count = 1 + sys.A.K();
  while (count < a.max_nodes && depth < 12) {
    ++depth;
    count = count * sys.A.K() + 1;
  }
  CqsOptions ob;
  ob.strategy = CqsOptions::Strategy::bfs;
  ob.loss = loss;
  ob.depth = depth;
  ob.max_nodes = a.max_nodes;
  SolveReport rb = cqs_solve(sys, ob);
  CqsOptions og;
  og.strategy = CqsOptions::Strategy::gradient;
  og.loss = loss;
  og.max_iters = a.max_nodes - 1;
  og.tol = 0;
  og.grad_tol_scale = 0;
  SolveReport rg = cqs_solve(sys, og);

  std::ostringstream echo;
  echo << "cmd=bench family=" << sys.metadata.family << " n=" << sys.n()
       << " max_nodes=" << a.max_nodes << " loss=" << a.loss << " seed=" << a.seed;
  std::string csv = config_line(echo.str()) + "nodes,bfs_loss,gradient_loss\n";
  const std::size_t rows = std::max(rb.loss_trace.size(), rg.loss_trace.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const double lb = rb.loss_trace[std::min(i, rb.loss_trace.size() - 1)];
    const double lgr = rg.loss_trace[std::min(i, rg.loss_trace.size() - 1)];
    csv += std::to_string(i + 1) + "," + g17(lb) + "," + g17(lgr) + "\n";
  }
  if (a.out.empty())
    std::cout << csv;
  else
    write_text(a.out, csv);
  std::cout << "bfs_final=" << g17(rb.final_loss) << " gradient_final=" << g17(rg.final_loss)
            << "\n";
  return 0;
}

int run_check(const std::string& suite, std::uint64_t seed) {
  std::vector<checks::SuiteResult> results;
  if (suite == "all")
    results = checks::run_all(seed);
  else if (suite == "decrease")
    results = {checks::decrease_suite(seed)};
  else if (suite == "depth")
    results = {checks::depth_suite(seed)};
  else if (suite == "qp")
    results = {checks::qp_suite(seed)};
  else if (suite == "sampling")
    results = {checks::sampling_suite(seed)};
  else
    throw std::invalid_argument("--suite '" + suite +
                                "' invalid (expected all|decrease|depth|qp|sampling)");
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " — " << r.detail << "\n";
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

} // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"quantum linear-system solver emulation toolkit"};
  app.require_subcommand(1);
  int threads = 0; // accepted for interface stability; the engine is sequential
  app.add_option("--threads", threads, "worker thread cap (currently ignored)");

  GenArgs ga;
  CLI::App* gen = app.add_subcommand("gen", "generate a linear system instance");
  gen->add_option("--family", ga.family, "pauli|haar|orthogonal")->required();
  gen->add_option("--n", ga.n, "qubit count (pauli family)");
  gen->add_option("--dim", ga.dim, "dimension (haar/orthogonal families)");
  gen->add_option("--S", ga.S, "number of random terms");
  gen->add_option("--seed", ga.seed, "rng seed");
  gen->add_option("--coeff-lo", ga.lo, "coefficient range low");
  gen->add_option("--coeff-hi", ga.hi, "coefficient range high");
  gen->add_option("--letters", ga.letters, "pauli letter alphabet");
  gen->add_option("--out", ga.out, "output system file")->required();

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "run the combination solver");
  solve->add_option("--system", sa.system, "system file")->required();
  solve->add_option("--strategy", sa.strategy, "bfs|gradient|hamiltonian");
  solve->add_option("--loss", sa.loss, "lr|lt");
  solve->add_option("--depth", sa.depth, "bfs tree depth");
  solve->add_option("--max-nodes", sa.max_nodes, "bfs node cap");
  solve->add_option("--max-iters", sa.max_iters, "gradient expansion steps");
  solve->add_option("--tol", sa.tol, "loss tolerance");
  solve->add_option("--grad-tol-scale", sa.grad_tol_scale, "gradient stop scale");
  solve->add_option("--kappa", sa.kappa, "condition bound (hamiltonian strategy)");
  solve->add_option("--eps", sa.eps, "accuracy (hamiltonian strategy)");
  solve->add_option("--shots", sa.shots, "shot budget per estimate (enables shot mode)");
  solve->add_option("--delta", sa.delta, "failure probability");
  solve->add_flag("--exact", sa.exact, "force exact estimation");
  solve->add_flag("--strict", sa.strict, "exit 2 when not converged");
  solve->add_option("--seed", sa.seed, "rng seed");
  solve->add_option("--out", sa.out, "report JSON path");
  solve->add_option("--trace", sa.trace, "loss trace CSV path");

  CLI::App* land = app.add_subcommand("landscape", "loss-landscape evaluations");
  land->require_subcommand(1);
  ToyArgs ta;
  CLI::App* toy = land->add_subcommand("toy", "flip-k toy cut");
  toy->add_option("--n", ta.n, "qubit count")->required();
  toy->add_option("--loss", ta.loss, "lh|lr");
  toy->add_option("--grid", ta.grid, "lambda grid points");
  toy->add_option("--weight", ta.weight, "flipped-qubit count (default ceil(n/2))");
  toy->add_option("--out", ta.out, "CSV path (stdout when omitted)");
  AdiabaticArgs aa;
  CLI::App* adia = land->add_subcommand("adiabatic", "interpolated-Hamiltonian cut");
  adia->add_option("--n", aa.n, "qubit count")->required();
  adia->add_option("--grid", aa.grid, "lambda grid points");
  adia->add_option("--s-points", aa.s_points, "s grid points");
  adia->add_option("--weight", aa.weight, "flipped-qubit count (default ceil(n/2))");
  adia->add_option("--out", aa.out, "CSV path (stdout when omitted)");
  LocalityArgs la;
  CLI::App* loc = land->add_subcommand("locality", "local-loss concentration");
  loc->add_option("--n", la.n, "qubit count")->required();
  loc->add_option("--trials", la.trials, "random parameter draws");
  loc->add_option("--depth", la.depth, "two-qubit gate count (default n^2)");
  loc->add_option("--seed", la.seed, "rng seed");
  loc->add_option("--out", la.out, "CSV path (stdout when omitted)");

  VqeArgs va;
  CLI::App* vqe = app.add_subcommand("vqe", "layered-ansatz variational runs");
  vqe->add_option("--topology", va.topology, "star|line|ring|complete");
  vqe->add_option("--layers", va.layers, "ansatz layers");
  vqe->add_option("--n", va.n, "system dimension (power of two)");
  vqe->add_option("--trials", va.trials, "random systems");
  vqe->add_option("--aavqe-steps", va.steps, "adiabatic schedule steps (0 = plain)");
  vqe->add_option("--restarts", va.restarts, "optimizer restarts");
  vqe->add_option("--nm-iters", va.nm_iters, "optimizer iteration cap (0 = scaled)");
  vqe->add_option("--seed", va.seed, "rng seed");
  vqe->add_option("--out", va.out, "CSV path (stdout when omitted)");

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "bfs vs gradient loss-per-node comparison");
  bench->add_option("--system", ba.system, "system file (generated when omitted)");
  bench->add_option("--dim", ba.dim, "generated system dimension");
  bench->add_option("--S", ba.S, "generated system terms");
  bench->add_option("--max-nodes", ba.max_nodes, "node budget");
  bench->add_option("--loss", ba.loss, "lr|lt");
  bench->add_option("--seed", ba.seed, "rng seed");
  bench->add_option("--out", ba.out, "CSV path (stdout when omitted)");

  std::string suite = "all";
  std::uint64_t check_seed = 1;
  CLI::App* check = app.add_subcommand("check", "provable-guarantee suites");
  check->add_option("--suite", suite, "all|decrease|depth|qp|sampling");
  check->add_option("--seed", check_seed, "rng seed");

  try {
    app.parse(argc, argv);
    if (*gen) return run_gen(ga);
    if (*solve) return run_solve(sa);
    if (*toy) return run_landscape_toy(ta);
    if (*adia) return run_landscape_adiabatic(aa);
    if (*loc) return run_landscape_locality(la);
    if (*vqe) return run_vqe(va);
    if (*bench) return run_bench(ba);
    if (*check) return run_check(suite, check_seed);
    throw std::invalid_argument("no subcommand selected");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace qls::cli
