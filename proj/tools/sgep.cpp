// sgep: batch front end for the bordered-pencil eigensolver.
//   sgep solve  --generate quadratic --shift 1.1 --steps 20 --restarts 1
//   sgep rank   --generate tolerance --taus 2.2e-15,1e-5,0.2
//   sgep export --generate kronecker_toy --out-prefix toy_
// Exit status: 0 ok, 1 usage or input error, 2 numerical failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <sgep/sgep.hpp>

namespace {

struct InputArgs {
  std::string a, b, generator;
  sgep::Index n = 0;
  std::uint64_t problem_seed = 0;
};

void add_input_options(CLI::App* cmd, InputArgs& in) {
  auto* a = cmd->add_option("--a", in.a, "Matrix Market file for A");
  auto* b = cmd->add_option("--b", in.b, "Matrix Market file for B");
  auto* g = cmd->add_option("--generate", in.generator, "built-in problem generator")
                ->check(CLI::IsMember(sgep::generator_names()));
  a->needs(b);
  b->needs(a);
  g->excludes(a)->excludes(b);
  cmd->add_option("--n", in.n, "generator size (quadratic: block size; 0 = default)");
  cmd->add_option("--problem-seed", in.problem_seed, "seed of the generator's random factors (0 = generator default)");
}

// bare number is real, "re,im" complex
sgep::Scalar parse_complex(const std::string& s) {
  const auto comma = s.find(',');
  std::size_t used = 0;
  try {
    if (comma == std::string::npos) {
      const double re = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return {re, 0.0};
    }
    const std::string rs = s.substr(0, comma), is = s.substr(comma + 1);
    const double re = std::stod(rs, &used);
    if (used != rs.size()) throw std::invalid_argument(s);
    const double im = std::stod(is, &used);
    if (used != is.size()) throw std::invalid_argument(s);
    return {re, im};
  } catch (const std::logic_error&) {
    throw sgep::ArgumentError("cannot parse complex value '" + s + "'");
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw sgep::ArgumentError("cannot parse tolerance '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw sgep::ArgumentError("empty tolerance list");
  return out;
}

sgep::Pencil load_pencil(const InputArgs& in, sgep::InputDescriptor& desc) {
  if (!in.generator.empty()) {
    sgep::GeneratedProblem gp = sgep::generate(in.generator, in.n, in.problem_seed);
    desc.kind = "generator";
    desc.generator = in.generator;
    desc.n = in.n;
    desc.seed = in.problem_seed;
    return std::move(gp.pencil);
  }
  if (in.a.empty()) throw sgep::ArgumentError("give either --a/--b or --generate");
  desc.kind = "files";
  desc.a_path = in.a;
  desc.b_path = in.b;
  sgep::SparseMatrix a = sgep::read_matrix_market(in.a);
  sgep::SparseMatrix b = sgep::read_matrix_market(in.b);
  if (a.nrows() != b.nrows() || a.ncols() != b.ncols())
    throw sgep::DimensionError("A is " + std::to_string(a.nrows()) + "x" + std::to_string(a.ncols()) + " but B is " +
                               std::to_string(b.nrows()) + "x" + std::to_string(b.ncols()));
  return sgep::Pencil(std::move(a), std::move(b));
}

// stdout unless a path is given
struct Sink {
  std::unique_ptr<std::ofstream> file;
  std::ostream& get() { return file ? *file : std::cout; }
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file = std::make_unique<std::ofstream>(path);
    if (!*file) throw sgep::MatrixMarketError("cannot write '" + path + "'");
  }
};

struct SolveArgs {
  InputArgs in;
  std::string shift = "0", p = "identity", format = "text", out, manifest, trace, dump_factor, method = "krylov",
              sides = "auto";
  double tau = 1e-12, threshold = 1e-6;
  sgep::Index steps = 20, restarts = 1;
  std::uint64_t seed = 42;
};

int run_solve(const SolveArgs& s) {
  sgep::SolverConfig cfg;
  cfg.sigma = parse_complex(s.shift);
  cfg.tau = s.tau;
  cfg.krylov_steps = s.steps;
  cfg.implicit_restarts = s.restarts;
  cfg.classify_threshold = s.threshold;
  cfg.seed = s.seed;
  cfg.p_kind = s.p == "b" ? sgep::InnerProductKind::b_block : sgep::InnerProductKind::identity_block;
  cfg.mode = s.sides == "two" ? sgep::SideMode::two_sided
             : s.sides == "one" ? sgep::SideMode::one_sided
                                : sgep::SideMode::automatic;
  cfg.method = s.method == "dense" ? sgep::SolveMethod::dense : sgep::SolveMethod::krylov;
  cfg.validate();

  sgep::RunManifest man;
  man.config = cfg;
  const sgep::Pencil pencil = load_pencil(s.in, man.input);

  const auto t0 = std::chrono::steady_clock::now();
  const sgep::BorderedPencil bp = sgep::regularize(pencil, cfg.sigma, cfg.tau);
  const double tf = sgep::detail::seconds_since(t0);
  if (!s.dump_factor.empty()) sgep::write_factorization(s.dump_factor, bp.lu());

  std::unique_ptr<std::ofstream> trace;
  if (!s.trace.empty()) {
    trace = std::make_unique<std::ofstream>(s.trace);
    if (!*trace) throw sgep::MatrixMarketError("cannot write '" + s.trace + "'");
  }
  const sgep::SolveResult res = cfg.method == sgep::SolveMethod::dense
                                    ? sgep::solve_singular_dense(bp, cfg, tf)
                                    : sgep::solve_singular(bp, cfg, tf, trace.get());

  if (pencil.square() && bp.border_rows() == 0 && bp.border_cols() == 0)
    std::cerr << "warning: degenerate input: pencil is regular at this shift (empty border); "
                 "every finite eigenvalue is classified True\n";

  man.factor_seconds = res.factor_seconds;
  man.arnoldi_seconds = res.arnoldi_seconds;
  man.projection_seconds = res.projection_seconds;
  man.result_table = s.out;

  Sink sink(s.out);
  if (s.format == "json") {
    sink.get() << sgep::result_json(res, man).dump(2) << '\n';
  } else {
    if (s.format == "csv")
      sgep::write_csv_table(sink.get(), res);
    else
      sgep::write_text_table(sink.get(), res);
    std::string mpath = s.manifest;
    if (mpath.empty() && !s.out.empty()) mpath = s.out + ".manifest.json";
    if (!mpath.empty()) {
      Sink m(mpath);
      m.get() << sgep::manifest_json(man).dump(2) << '\n';
    }
  }
  return 0;
}

struct RankArgs {
  InputArgs in;
  std::string shift = "0", taus = "2.2e-15,1e-5,0.2", format = "text", out;
};

int run_rank(const RankArgs& r) {
  sgep::SolverConfig cfg;
  cfg.sigma = parse_complex(r.shift);
  sgep::InputDescriptor desc;
  const sgep::Pencil pencil = load_pencil(r.in, desc);
  const std::vector<double> taus = parse_list(r.taus);
  for (double t : taus)
    if (!(t >= 0.0 && t < 1.0)) throw sgep::ArgumentError("tolerance outside [0, 1)");
  const auto rows = sgep::tau_sweep(pencil, cfg, taus);
  Sink sink(r.out);
  if (r.format == "json")
    sink.get() << sgep::tau_sweep_json(rows).dump(2) << '\n';
  else if (r.format == "csv")
    sgep::write_tau_sweep_csv(sink.get(), rows);
  else
    sgep::write_tau_sweep_text(sink.get(), rows);
  return 0;
}

struct ExportArgs {
  std::string generator, prefix;
  sgep::Index n = 0;
  std::uint64_t problem_seed = 0;
};

int run_export(const ExportArgs& e) {
  const sgep::GeneratedProblem gp = sgep::generate(e.generator, e.n, e.problem_seed);
  sgep::write_matrix_market(e.prefix + "A.mtx", gp.pencil.A);
  sgep::write_matrix_market(e.prefix + "B.mtx", gp.pencil.B);
  nlohmann::json ev = nlohmann::json::array();
  for (const sgep::Scalar& z : gp.true_eigenvalues) ev.push_back({{"re", z.real()}, {"im", z.imag()}});
  const nlohmann::json truth{{"name", gp.name},
                             {"description", gp.description},
                             {"nrows", gp.pencil.nrows()},
                             {"ncols", gp.pencil.ncols()},
                             {"normal_rank", gp.normal_rank},
                             {"true_eigenvalues", ev}};
  Sink t(e.prefix + "truth.json");
  t.get() << truth.dump(2) << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalues of singular pencils via rank-completing borders"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "classify eigenvalues of a (singular) pencil");
  add_input_options(solve, sa.in);
  solve->add_option("--shift", sa.shift, "shift re[,im]");
  solve->add_option("--tau", sa.tau, "LU breakdown tolerance");
  solve->add_option("--steps", sa.steps, "Krylov steps");
  solve->add_option("--restarts", sa.restarts, "implicit restarts at infinity");
  solve->add_option("--threshold", sa.threshold, "border-norm threshold for True");
  solve->add_option("--seed", sa.seed, "seed for start vectors");
  solve->add_option("--p", sa.p, "semi-inner product")->check(CLI::IsMember({"identity", "b"}));
  solve->add_option("--format", sa.format)->check(CLI::IsMember({"text", "json", "csv"}));
  solve->add_option("--out", sa.out, "result table (default stdout)");
  solve->add_option("--manifest", sa.manifest, "manifest path for text/csv (default <out>.manifest.json)");
  solve->add_option("--method", sa.method, "krylov or dense (QZ on the bordered pencil)")
      ->check(CLI::IsMember({"krylov", "dense"}));
  solve->add_option("--sides", sa.sides, "auto, two or one")->check(CLI::IsMember({"auto", "two", "one"}));
  solve->add_option("--trace", sa.trace, "write the Arnoldi trace here");
  solve->add_option("--dump-factor", sa.dump_factor, "write the LU factorization with this prefix");

  RankArgs ra;
  auto* rank = app.add_subcommand("rank", "border size for several tolerances");
  add_input_options(rank, ra.in);
  rank->add_option("--shift", ra.shift, "shift re[,im]");
  rank->add_option("--taus", ra.taus, "comma-separated tolerances");
  rank->add_option("--format", ra.format)->check(CLI::IsMember({"text", "json", "csv"}));
  rank->add_option("--out", ra.out);

  ExportArgs ea;
  auto* exp = app.add_subcommand("export", "write a generated problem as Matrix Market plus truth");
  exp->add_option("--generate", ea.generator)->required()->check(CLI::IsMember(sgep::generator_names()));
  exp->add_option("--out-prefix", ea.prefix)->required();
  exp->add_option("--n", ea.n);
  exp->add_option("--problem-seed", ea.problem_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) {
      if (sa.in.a.empty() && sa.in.generator.empty()) throw sgep::ArgumentError("give either --a/--b or --generate");
      return run_solve(sa);
    }
    if (*rank) {
      if (ra.in.a.empty() && ra.in.generator.empty()) throw sgep::ArgumentError("give either --a/--b or --generate");
      return run_rank(ra);
    }
    return run_export(ea);
  } catch (const sgep::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
