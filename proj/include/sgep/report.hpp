#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "two_sided.hpp"

namespace sgep {

inline constexpr const char* library_version = "0.1.0";
inline constexpr int result_schema_version = 1;

/// Where the pencil came from.
struct InputDescriptor {
  std::string kind; // "files" or "generator"
  std::string a_path, b_path;
  std::string generator;
  Index n = 0;
  std::uint64_t seed = 0;
};

struct RunManifest {
  SolverConfig config;
  InputDescriptor input;
  double factor_seconds = 0.0;
  double arnoldi_seconds = 0.0;
  double projection_seconds = 0.0;
  std::string result_table; // path of the table, empty for stdout
};

namespace detail {

inline nlohmann::json complex_json(Scalar z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string format_complex(Scalar z) {
  if (z.imag() == 0.0) return fmt("%.10f", z.real());
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.10f%+.3ei", z.real(), z.imag());
  return buf;
}

inline std::string compiler_string() {
#if defined(__clang__)
  return std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  return "gcc " + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__) + "." +
         std::to_string(__GNUC_PATCHLEVEL__);
#else
  return "unknown";
#endif
}

} // namespace detail

inline const char* p_kind_name(InnerProductKind k) { return k == InnerProductKind::b_block ? "b" : "identity"; }

inline const char* mode_name(SideMode m) {
  switch (m) {
  case SideMode::two_sided:
    return "two_sided";
  case SideMode::one_sided:
    return "one_sided";
  default:
    return "automatic";
  }
}

inline nlohmann::json config_json(const SolverConfig& c) {
  return {{"sigma", detail::complex_json(c.sigma)},
          {"tau", c.tau},
          {"krylov_steps", c.krylov_steps},
          {"implicit_restarts", c.implicit_restarts},
          {"classify_threshold", c.classify_threshold},
          {"seed", c.seed},
          {"p_kind", p_kind_name(c.p_kind)},
          {"mode", mode_name(c.mode)}};
}

inline nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json input{{"kind", m.input.kind}};
  if (m.input.kind == "files") {
    input["a"] = m.input.a_path;
    input["b"] = m.input.b_path;
  } else {
    input["generator"] = m.input.generator;
    input["n"] = m.input.n;
    input["seed"] = m.input.seed;
  }
  return {{"config", config_json(m.config)},
          {"input", input},
          {"versions", {{"sgep", library_version}, {"compiler", detail::compiler_string()}}},
          {"seed", m.config.seed},
          {"timings", {{"factor", m.factor_seconds}, {"arnoldi", m.arnoldi_seconds}, {"projection", m.projection_seconds}}},
          {"result_table", m.result_table.empty() ? nlohmann::json(nullptr) : nlohmann::json(m.result_table)}};
}

inline nlohmann::json triplet_json(const EigenTriplet& t, Index index) {
  nlohmann::json j;
  j["index"] = index;
  j["lambda"] = t.infinite ? nlohmann::json("inf") : detail::complex_json(t.lambda);
  j["theta"] = detail::complex_json(t.theta);
  j["label"] = label_name(t.label);
  j["x_border_norm"] = t.x_border_norm;
  j["y_border_norm"] = detail::number_or_null(t.has_left() ? t.y_border_norm : std::nan(""));
  j["residual_right"] = t.residual_right;
  j["residual_left"] = detail::number_or_null(t.has_left() ? t.residual_left : std::nan(""));
  j["residual_estimate"] = t.residual_estimate;
  j["sides_disagree"] = t.sides_disagree;
  j["ambiguous_pairing"] = t.ambiguous_pairing;
  return j;
}

inline nlohmann::json result_json(const SolveResult& r, const RunManifest& m) {
  nlohmann::json trip = nlohmann::json::array();
  for (Index i = 0; i < r.triplets.size(); ++i) trip.push_back(triplet_json(r.triplets[i], i));
  return {{"schema_version", result_schema_version},
          {"manifest", manifest_json(m)},
          {"summary",
           {{"border_rows", r.border_rows},
            {"border_cols", r.border_cols},
            {"normal_rank", r.normal_rank},
            {"alpha", r.alpha},
            {"one_sided", r.one_sided},
            {"forward_dim", r.forward_dim},
            {"left_dim", r.left_dim},
            {"restarts_applied", r.restarts_applied}}},
          {"triplets", trip}};
}

/// Fixed-width table: eigenvalue, residual, left and right border norms,
/// label. A '*' after the label marks left/right disagreement.
inline void write_text_table(std::ostream& out, const SolveResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "border: V %zu cols, W %zu cols, normal rank %zu%s\n", r.border_rows, r.border_cols,
                r.normal_rank, r.one_sided ? " (one-sided)" : "");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-36s %-12s %-12s %-12s %s\n", "eigenvalue", "residual", "|y2|", "|x2|", "label");
  out << buf;
  for (const EigenTriplet& t : r.triplets) {
    const std::string lam = t.infinite ? "inf" : detail::format_complex(t.lambda);
    const std::string y2 = t.has_left() ? detail::fmt("%.3e", t.y_border_norm) : "-";
    std::snprintf(buf, sizeof buf, "%-36s %-12s %-12s %-12s %s%s\n", lam.c_str(),
                  detail::fmt("%.3e", t.residual_estimate).c_str(), y2.c_str(),
                  detail::fmt("%.3e", t.x_border_norm).c_str(), label_name(t.label), t.sides_disagree ? " *" : "");
    out << buf;
  }
}

inline void write_csv_table(std::ostream& out, const SolveResult& r) {
  out << "index,lambda_re,lambda_im,infinite,residual_estimate,residual_right,residual_left,y_border_norm,"
         "x_border_norm,label,sides_disagree\n";
  char buf[512];
  for (Index i = 0; i < r.triplets.size(); ++i) {
    const EigenTriplet& t = r.triplets[i];
    const std::string rl = t.has_left() ? detail::fmt("%.17g", t.residual_left) : "";
    const std::string yb = t.has_left() ? detail::fmt("%.17g", t.y_border_norm) : "";
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d,%.17g,%.17g,%s,%s,%.17g,%s,%d\n", i,
                  t.infinite ? INFINITY : t.lambda.real(), t.infinite ? 0.0 : t.lambda.imag(), t.infinite ? 1 : 0,
                  t.residual_estimate, t.residual_right, rl.c_str(), yb.c_str(), t.x_border_norm, label_name(t.label),
                  t.sides_disagree ? 1 : 0);
    out << buf;
  }
}

inline nlohmann::json tau_sweep_json(const std::vector<TauSweepRow>& rows) {
  nlohmann::json a = nlohmann::json::array();
  for (const TauSweepRow& r : rows)
    a.push_back({{"tau", r.tau}, {"border_rows", r.border_rows}, {"border_cols", r.border_cols},
                 {"detected_rank", r.detected_rank}});
  return a;
}

inline void write_tau_sweep_text(std::ostream& out, const std::vector<TauSweepRow>& rows) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-12s %-8s %-8s %s\n", "tau", "ell", "w", "rank");
  out << buf;
  for (const TauSweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12.4g %-8zu %-8zu %zu\n", r.tau, r.border_rows, r.border_cols, r.detected_rank);
    out << buf;
  }
}

inline void write_tau_sweep_csv(std::ostream& out, const std::vector<TauSweepRow>& rows) {
  out << "tau,border_rows,border_cols,detected_rank\n";
  char buf[128];
  for (const TauSweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%zu,%zu\n", r.tau, r.border_rows, r.border_cols, r.detected_rank);
    out << buf;
  }
}

} // namespace sgep
