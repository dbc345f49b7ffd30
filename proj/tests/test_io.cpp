#include <filesystem>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("sgep_io_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

SparseMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return read_matrix_market(in);
}

SparseMatrix round_trip(const SparseMatrix& m) {
  std::ostringstream out;
  write_matrix_market(out, m);
  return parse(out.str());
}

} // namespace

TEST_CASE("matrix market round trip is bitwise") {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 20; ++t) {
    const Index nr = 1 + rng() % 30, nc = 1 + rng() % 30;
    SparseMatrix m = random_sparse(nr, nc, 0.2, rng);
    CHECK(round_trip(m) == m);
  }
  // awkward doubles survive %.17g
  const SparseMatrix odd = SparseMatrix::from_triplets(
      2, 3, {{0, 0, {0.1, -1e-300}}, {1, 2, {std::nextafter(1.0, 2.0), 5e-324}}, {0, 1, {-123456789.123456789, 0.0}}});
  CHECK(round_trip(odd) == odd);
}

TEST_CASE("matrix market field selection") {
  const SparseMatrix real = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.5}, {1, 0, -2.0}});
  std::ostringstream out;
  write_matrix_market(out, real);
  CHECK(out.str().starts_with("%%MatrixMarket matrix coordinate real general\n2 2 2\n"));
  CHECK(round_trip(real) == real);

  const SparseMatrix cplx = SparseMatrix::from_triplets(2, 2, {{0, 1, {0.0, 1.0}}});
  std::ostringstream oc;
  write_matrix_market(oc, cplx);
  CHECK(oc.str().starts_with("%%MatrixMarket matrix coordinate complex general\n"));

  // empty matrices keep their shape
  const SparseMatrix empty(4, 7);
  const SparseMatrix back = round_trip(empty);
  CHECK(back.nrows() == 4);
  CHECK(back.ncols() == 7);
  CHECK(back.nnz() == 0);
}

TEST_CASE("matrix market reader details") {
  const SparseMatrix m = parse(
      "%%MatrixMarket matrix coordinate integer general\n"
      "% a comment\n"
      "\n"
      "3 2 3\n"
      "1 1 4\n"
      "% interleaved comment\n"
      "3 2 -1\n"
      "1 1 2\n");
  const DenseMatrix d = m.to_dense();
  CHECK(d(0, 0) == Scalar{6.0}); // duplicates summed
  CHECK(d(2, 1) == Scalar{-1.0});
  CHECK(m.nnz() == 2);

  // header keywords are case insensitive
  const SparseMatrix c = parse("%%MatrixMarket MATRIX Coordinate Complex General\n1 1 1\n1 1 2 -3\n");
  CHECK(c.to_dense()(0, 0) == Scalar(2.0, -3.0));
}

TEST_CASE("matrix market errors") {
  const std::vector<std::string> bad{
      "",
      "%%NotMarket matrix coordinate real general\n1 1 0\n",
      "%%MatrixMarket matrix array real general\n1 1\n1\n",
      "%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n",
      "%%MatrixMarket matrix coordinate real symmetric\n1 1 1\n1 1 1\n",
      "%%MatrixMarket matrix coordinate real general\n",
      "%%MatrixMarket matrix coordinate real general\n2 2 -1\n",
      "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
      "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
      "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1\n",
      "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n",
      "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1\n",
  };
  for (const std::string& s : bad) {
    INFO(s);
    CHECK_THROWS_AS(parse(s), MatrixMarketError);
  }
  CHECK_THROWS_AS(read_matrix_market(std::string("/nonexistent/dir/a.mtx")), MatrixMarketError);
  CHECK_THROWS_AS(write_matrix_market(std::string("/nonexistent/dir/a.mtx"), SparseMatrix(1, 1)), MatrixMarketError);
}

TEST_CASE("matrix market files") {
  const fs::path d = scratch_dir("mtx");
  const Pencil p = gen_tolerance_pencil(true, tolerance_default_seed).pencil;
  write_matrix_market((d / "A.mtx").string(), p.A);
  write_matrix_market((d / "B.mtx").string(), p.B);
  CHECK(read_matrix_market((d / "A.mtx").string()) == p.A);
  CHECK(read_matrix_market((d / "B.mtx").string()) == p.B);
  fs::remove_all(d);
}

TEST_CASE("factorization dump round trip") {
  const fs::path d = scratch_dir("lu");
  const BorderedPencil bp = regularize(gen_tolerance_pencil(false, tolerance_default_seed).pencil, 0.0, 0.2);
  const RankLU& f = bp.lu();
  REQUIRE(f.border_rows() == 3);
  const std::string prefix = (d / "f_").string();
  write_factorization(prefix, f);
  for (const char* name : {"P.txt", "L.mtx", "U.mtx", "V.mtx", "W.mtx", "M.mtx", "manifest.json"})
    CHECK(fs::exists(prefix + name));

  const RankLU g = read_factorization(prefix);
  CHECK(g.P == f.P);
  CHECK(g.L == f.L);
  CHECK(g.U == f.U);
  CHECK(g.V == f.V);
  CHECK(g.W == f.W);
  CHECK(g.matrix == f.matrix);
  CHECK(g.alpha == f.alpha);
  CHECK(g.tau == f.tau);
  CHECK(g.breakdown_steps == f.breakdown_steps);
  CHECK(g.breakdown_pivots == f.breakdown_pivots);
  CHECK(g.detected_rank == f.detected_rank);

  // the reloaded factors still solve the bordered system
  std::mt19937_64 rng(62);
  const Vector b = random_vector(g.size(), rng);
  CHECK(solve(g, b) == solve(f, b));
  CHECK_THROWS_AS(read_factorization((d / "missing_").string()), MatrixMarketError);
  fs::remove_all(d);
}

TEST_CASE("result json") {
  SolverConfig cfg;
  cfg.sigma = 0.3;
  cfg.krylov_steps = 4;
  cfg.seed = 5;
  const SolveResult r = solve_singular(toy(), cfg);
  RunManifest man;
  man.config = cfg;
  man.input.kind = "generator";
  man.input.generator = "kronecker_toy";
  man.factor_seconds = r.factor_seconds;
  const nlohmann::json j = result_json(r, man);

  CHECK(j.at("schema_version") == result_schema_version);
  CHECK(j.at("summary").at("border_rows") == r.border_rows);
  CHECK(j.at("summary").at("border_cols") == r.border_cols);
  CHECK(j.at("summary").at("normal_rank") == 3);
  CHECK(j.at("manifest").at("versions").at("sgep") == library_version);
  CHECK(j.at("manifest").at("config").at("sigma").at("re") == 0.3);
  CHECK(j.at("manifest").at("config").at("krylov_steps") == 4);
  CHECK(j.at("manifest").at("input").at("generator") == "kronecker_toy");
  CHECK(j.at("manifest").at("result_table").is_null());
  REQUIRE(j.at("triplets").size() == r.triplets.size());
  Index ntrue = 0;
  for (Index i = 0; i < r.triplets.size(); ++i) {
    const nlohmann::json& t = j.at("triplets")[i];
    const EigenTriplet& e = r.triplets[i];
    CHECK(t.at("index") == i);
    CHECK(t.at("label") == label_name(e.label));
    if (e.infinite)
      CHECK(t.at("lambda") == "inf");
    else {
      CHECK(t.at("lambda").at("re").get<double>() == e.lambda.real());
      CHECK(t.at("lambda").at("im").get<double>() == e.lambda.imag());
    }
    CHECK(t.at("x_border_norm").get<double>() == e.x_border_norm);
    CHECK(t.at("y_border_norm").get<double>() == e.y_border_norm);
    ntrue += e.label == Label::True;
  }
  CHECK(ntrue == 1);

  // dump and parse preserve every double
  CHECK(nlohmann::json::parse(j.dump()) == j);
}

TEST_CASE("one-sided results carry null left fields") {
  SolverConfig cfg;
  cfg.sigma = 0.9;
  cfg.krylov_steps = 10;
  cfg.implicit_restarts = 2;
  const SolveResult r = solve_singular(gen_rectangular(200, 1.0, 1.0).pencil, cfg);
  REQUIRE(r.one_sided);
  RunManifest man;
  man.config = cfg;
  man.input.kind = "files";
  man.input.a_path = "A.mtx";
  man.input.b_path = "B.mtx";
  const nlohmann::json j = result_json(r, man);
  CHECK(j.at("summary").at("one_sided") == true);
  CHECK(j.at("manifest").at("input").at("a") == "A.mtx");
  for (const nlohmann::json& t : j.at("triplets")) {
    CHECK(t.at("y_border_norm").is_null());
    CHECK(t.at("residual_left").is_null());
  }
}

TEST_CASE("text and csv tables") {
  SolverConfig cfg;
  cfg.sigma = 0.3;
  cfg.krylov_steps = 4;
  const SolveResult r = solve_singular(toy(), cfg);

  std::ostringstream text;
  write_text_table(text, r);
  std::istringstream tl(text.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(tl, line)) lines.push_back(line);
  REQUIRE(lines.size() == r.triplets.size() + 2);
  CHECK(lines[0].starts_with("border: V 1 cols, W 1 cols, normal rank 3"));
  CHECK(lines[1].find("eigenvalue") == 0);
  CHECK(text.str().find("True") != std::string::npos);

  std::ostringstream csv;
  write_csv_table(csv, r);
  std::istringstream cl(csv.str());
  std::getline(cl, line);
  CHECK(line.starts_with("index,lambda_re,lambda_im,infinite,"));
  Index rows = 0;
  while (std::getline(cl, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 10);
    ++rows;
  }
  CHECK(rows == r.triplets.size());
}

TEST_CASE("tau sweep output") {
  const std::vector<TauSweepRow> rows =
      tau_sweep(gen_tolerance_pencil(false, tolerance_default_seed).pencil, SolverConfig{}, {2.2e-15, 1e-5, 0.2});
  const nlohmann::json j = tau_sweep_json(rows);
  REQUIRE(j.size() == 3);
  CHECK(j[0].at("border_rows") == 2);
  CHECK(j[2].at("border_rows") == 3);
  CHECK(j[2].at("detected_rank") == 7);
  std::ostringstream csv;
  write_tau_sweep_csv(csv, rows);
  CHECK(csv.str().starts_with("tau,border_rows,border_cols,detected_rank\n"));
  std::ostringstream text;
  write_tau_sweep_text(text, rows);
  const std::string t = text.str();
  CHECK(std::count(t.begin(), t.end(), '\n') == 4);
}
