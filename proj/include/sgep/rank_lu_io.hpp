#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "matrix_market.hpp"
#include "rank_lu.hpp"

namespace sgep {

/// Debug dump of a factorization: <prefix>P.txt (0-based forward
/// permutation, one entry per line), <prefix>{L,U,V,W,M}.mtx and
/// <prefix>manifest.json.
inline void write_factorization(const std::string& prefix, const RankLU& f) {
  {
    std::ofstream p(prefix + "P.txt");
    if (!p) throw MatrixMarketError("cannot write '" + prefix + "P.txt'");
    p << "# row i of the bordered matrix moves to row P[i] (0-based)\n";
    for (Index i = 0; i < f.P.size(); ++i) p << f.P[i] << '\n';
  }
  write_matrix_market(prefix + "L.mtx", f.L);
  write_matrix_market(prefix + "U.mtx", f.U);
  write_matrix_market(prefix + "V.mtx", f.V);
  write_matrix_market(prefix + "W.mtx", f.W);
  write_matrix_market(prefix + "M.mtx", f.matrix);
  const nlohmann::json man{{"alpha", f.alpha},
                           {"tau", f.tau},
                           {"breakdown_steps", f.breakdown_steps},
                           {"breakdown_pivots", f.breakdown_pivots},
                           {"detected_rank", f.detected_rank},
                           {"nrows", f.nrows()},
                           {"ncols", f.ncols()},
                           {"size", f.size()}};
  std::ofstream m(prefix + "manifest.json");
  if (!m) throw MatrixMarketError("cannot write '" + prefix + "manifest.json'");
  m << man.dump(2) << '\n';
}

inline RankLU read_factorization(const std::string& prefix) {
  RankLU f;
  std::ifstream p(prefix + "P.txt");
  if (!p) throw MatrixMarketError("cannot open '" + prefix + "P.txt'");
  std::vector<Index> fwd;
  std::string line;
  while (std::getline(p, line)) {
    if (line.empty() || line[0] == '#') continue;
    fwd.push_back(static_cast<Index>(std::stoull(line)));
  }
  f.P = Permutation(std::move(fwd));
  f.L = read_matrix_market(prefix + "L.mtx");
  f.U = read_matrix_market(prefix + "U.mtx");
  f.V = read_matrix_market(prefix + "V.mtx");
  f.W = read_matrix_market(prefix + "W.mtx");
  f.matrix = read_matrix_market(prefix + "M.mtx");
  std::ifstream m(prefix + "manifest.json");
  if (!m) throw MatrixMarketError("cannot open '" + prefix + "manifest.json'");
  const nlohmann::json man = nlohmann::json::parse(m);
  f.alpha = man.at("alpha").get<double>();
  f.tau = man.at("tau").get<double>();
  f.breakdown_steps = man.at("breakdown_steps").get<std::vector<Index>>();
  f.breakdown_pivots = man.at("breakdown_pivots").get<std::vector<double>>();
  f.detected_rank = man.at("detected_rank").get<Index>();
  return f;
}

} // namespace sgep
