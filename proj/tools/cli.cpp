#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cubicwave/appendix.hpp"
#include "cubicwave/asymptotics.hpp"
#include "cubicwave/error.hpp"
#include "cubicwave/exterior.hpp"
#include "cubicwave/spectrum.hpp"
#include "cubicwave/stability.hpp"

#ifndef CUBICWAVE_VERSION
#define CUBICWAVE_VERSION "0.0.0"
#endif

namespace cubicwave::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr int n_cap = 10;

struct Config {
  std::string command;
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  std::string out_dir;
  std::string format = "json";
  int n = 0;
  int n_max = 6;
  std::optional<double> c;
  std::optional<double> b;
  std::string direction = "out";
  double rho_limit = 0.0;
  int grid = 1000;
  int k = 0;
  bool odd = false;
  bool lemmas = false;
  double c_min = 0.05;
  double c_max = 400.0;
  int samples = 400;
  double truncation = 0.0;
};

/// Plain table for CSV output; cells are numbers or strings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;
};

struct Output {
  std::string stem;
  json doc;
  Table table;
};

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

/// Every float is rounded to 9 significant digits so equal runs print equal bytes.
void round_numbers(json& j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (!std::isfinite(x)) {
      j = format_number(x);
      return;
    }
    j = std::strtod(format_number(x).c_str(), nullptr);
  } else if (j.is_structured()) {
    for (auto& v : j) round_numbers(v);
  }
}

std::string cell(const json& v) {
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
    os << '\n';
  }
}

json metadata(const Config& cfg) {
  return {{"program", "cubicwave"},
          {"version", CUBICWAVE_VERSION},
          {"command", cfg.command},
          {"rel_tol", cfg.rel_tol},
          {"abs_tol", cfg.abs_tol},
          {"format", cfg.format}};
}

SpectrumOptions spectrum_options(const Config& cfg) {
  SpectrumOptions o;
  o.interior.rel_tol = cfg.rel_tol;
  o.interior.abs_tol = cfg.abs_tol;
  return o;
}

json solution_json(const SelfSimilarSolution& s) {
  return {{"n", s.n},
          {"c", s.c},
          {"b", s.b},
          {"E", s.E},
          {"x_max", s.x_max},
          {"tail_bound", s.orbit.tail_bound},
          {"D", s.orbit.D},
          {"phase_residual", s.phase_residual},
          {"c_bisection", s.c_bisection},
          {"zeros", s.zeros}};
}

Table profile_table(const COrbitSummary& orbit) {
  Table t{{"x", "f", "b", "d", "phi", "G"}, {}};
  for (const ProfileSample& p : orbit.profile) t.rows.push_back({p.x, p.f, p.b, p.d, p.phi, p.G});
  return t;
}

Output cmd_solve(const Config& cfg) {
  Output o{"solve", {}, {}};
  if (cfg.c) {
    InteriorOptions io;
    io.rel_tol = cfg.rel_tol;
    io.abs_tol = cfg.abs_tol;
    const COrbitSummary s = evolve_c_orbit(*cfg.c, 1e-13, io);
    o.doc["orbit"] = {{"c", s.c},   {"B", s.B},         {"D", s.D},
                      {"Phi", s.Phi}, {"x_max", s.x_max}, {"tail_bound", s.tail_bound}};
    o.table = profile_table(s);
    return o;
  }
  const SelfSimilarSolution s = find_c_n(cfg.n, spectrum_options(cfg));
  const Prediction p = predict(cfg.n, default_constants());
  o.doc["solution"] = solution_json(s);
  o.doc["solution"]["predicted"] = {{"c", p.c}, {"b", p.b}};
  o.table = profile_table(s.orbit);
  return o;
}

Output cmd_table(const Config& cfg) {
  Output o{"table", {}, {}};
  o.table.header = {"n", "c", "b", "E", "c_pred", "b_pred", "c_deviation", "b_deviation"};
  json rows = json::array();
  for (const TableRow& r : table(cfg.n_max, spectrum_options(cfg))) {
    const auto& s = r.solution;
    rows.push_back({{"n", s.n},
                    {"c", s.c},
                    {"b", s.b},
                    {"E", s.E},
                    {"c_pred", r.predicted.c},
                    {"b_pred", r.predicted.b},
                    {"c_deviation", r.c_deviation},
                    {"b_deviation", r.b_deviation}});
    o.table.rows.push_back({s.n, s.c, s.b, s.E, r.predicted.c, r.predicted.b, r.c_deviation,
                            r.b_deviation});
  }
  o.doc["rows"] = rows;
  return o;
}

Output cmd_asymptotics(const Config&) {
  const AsymptoticConstants& k = default_constants();
  const LawCoefficients law = law_coefficients(k);
  Output o{"asymptotics", {}, {}};
  o.doc["constants"] = {{"T", k.T},           {"tau", k.tau},       {"A0", k.A0},
                        {"theta0", k.theta0}, {"A1", k.A1},         {"theta1", k.theta1}};
  o.doc["routes"] = {{"T_closed", k.T_closed},
                     {"T_quadrature", k.T_quadrature},
                     {"tau_closed", k.tau_closed},
                     {"tau_quadrature", k.tau_quadrature},
                     {"A0_energy", k.A0_energy},
                     {"A1_energy", k.A1_energy},
                     {"A0_drift", k.A0_drift},
                     {"A1_drift", k.A1_drift},
                     {"t_end", k.t_end},
                     {"zeros_fitted0", k.zeros_fitted0},
                     {"zeros_fitted1", k.zeros_fitted1}};
  o.doc["law"] = {{"half_tau", law.half_tau},
                  {"minus_theta_sum", law.minus_theta_sum},
                  {"A0T", law.A0T},
                  {"b2_over_c", law.b2_over_c}};
  o.table.header = {"name", "value"};
  for (const char* group : {"constants", "routes", "law"})
    for (auto it = o.doc[group].begin(); it != o.doc[group].end(); ++it)
      o.table.rows.push_back({it.key(), it.value()});
  return o;
}

Output cmd_predict(const Config& cfg) {
  const Prediction p = predict(cfg.n, default_constants());
  Output o{"predict", {}, {}};
  o.doc["prediction"] = {{"n", cfg.n}, {"c", p.c}, {"b", p.b}};
  o.table = {{"n", "c", "b"}, {{cfg.n, p.c, p.b}}};
  return o;
}

Output cmd_stability(const Config& cfg) {
  const SelfSimilarSolution s = find_c_n(cfg.n, spectrum_options(cfg));
  const PotentialProfile p = build_potential(s, cfg.truncation);
  EigenOptions eo;
  eo.tol = cfg.rel_tol;
  EigenReport r = eigenvalues(p, 1.5 * p.min_V, eo);
  const GaugeReport g = gauge_mode_check(s);
  r.gauge_residual = g.residual;
  r.gauge_nodes = g.nodes;
  Output o{"stability", {}, {}};
  o.doc["metadata_extra"] = {{"truncation", p.truncation},
                             {"search_floor", r.search_floor},
                             {"continuum_guard", r.guard}};
  o.doc["report"] = {{"n", r.n},
                     {"c", s.c},
                     {"eigenvalues", r.eigenvalues},
                     {"node_counts", r.node_counts},
                     {"oracle_eigenvalues", r.oracle_eigenvalues},
                     {"negative_count", r.negative_count},
                     {"count_below_minus_one", r.count_below_minus_one},
                     {"gauge_eigenvalue", r.gauge_eigenvalue},
                     {"gauge_offset", r.gauge_offset},
                     {"gauge_residual", r.gauge_residual},
                     {"gauge_nodes", r.gauge_nodes},
                     {"gauge_x_checked", g.x_checked},
                     {"window_eigenvalues", r.window_eigenvalues},
                     {"method_agreement", r.method_agreement},
                     {"min_V", p.min_V}};
  o.table.header = {"index", "eigenvalue", "oracle", "nodes"};
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
    o.table.rows.push_back({static_cast<int>(i), r.eigenvalues[i],
                            i < r.oracle_eigenvalues.size() ? json(r.oracle_eigenvalues[i])
                                                            : json("nan"),
                            r.node_counts[i]});
  return o;
}

Table monitor_table(const ExteriorReport& r) {
  Table t{{"rho", "U", "dU", "h", "g", "n"}, {}};
  for (const MonitorSample& m : r.monitors) t.rows.push_back({m.rho, m.U, m.dU, m.h, m.g, m.n});
  return t;
}

json exterior_json(const ExteriorReport& r) {
  json j = {{"b", r.b},
            {"direction", to_string(r.direction)},
            {"outcome", to_string(r.outcome)},
            {"rho_end", r.rho_end},
            {"flagged", r.flagged},
            {"monitor_samples", r.monitors.size()}};
  if (r.outcome == Outcome::singular) j["rho_sing"] = r.rho_sing;
  return j;
}

Output cmd_exterior(const Config& cfg) {
  ExteriorOptions eo;
  eo.rel_tol = cfg.rel_tol;
  eo.abs_tol = cfg.abs_tol;
  Output o{"exterior", {}, {}};
  if (cfg.b) {
    const Direction d = cfg.direction == "in" ? Direction::inward : Direction::outward;
    const double limit = cfg.rho_limit > 0 ? cfg.rho_limit : (d == Direction::inward ? 1e-3 : 1e3);
    const ExteriorReport r = b_orbit(*cfg.b, d, limit, eo);
    o.doc["metadata_extra"] = {{"rho_limit", limit}, {"delta", eo.delta}};
    o.doc["report"] = exterior_json(r);
    o.table = monitor_table(r);
    return o;
  }
  const SelfSimilarSolution s = find_c_n(cfg.n, spectrum_options(cfg));
  const double limit = cfg.rho_limit > 0 ? cfg.rho_limit : 1e3;
  const SingularityEstimate e = exterior_singularity(s, eo, limit);
  o.doc["metadata_extra"] = {{"rho_limit", limit}, {"delta", eo.delta}};
  o.doc["report"] = exterior_json(e.report);
  o.doc["report"]["n"] = cfg.n;
  o.doc["report"]["b_n"] = s.b;
  o.doc["singularity"] = {{"rho", e.rho},
                          {"drift", e.drift},
                          {"rho_half_tol", e.rho_half_tol},
                          {"rho_half_delta", e.rho_half_delta}};
  o.table = monitor_table(e.report);
  return o;
}

json point_json(const GridPoint& p) { return {{"U", p.U}, {"R", p.R}, {"value", p.value}}; }

Output cmd_certify(const Config& cfg) {
  const CertificateReport c = certify_inequalities(cfg.grid);
  Output o{"certify", {}, {}};
  o.doc["certificate"] = {
      {"grid", c.grid},
      {"N_min", point_json(c.N_min)},
      {"N_edge_U0", point_json(c.N_edges[0])},
      {"N_edge_Usqrt2", point_json(c.N_edges[1])},
      {"N_edge_R0", point_json(c.N_edges[2])},
      {"N_edge_R1", point_json(c.N_edges[3])},
      {"g_slope_min", {{"U", c.g_slope_min.U}, {"rho", c.g_slope_min.R}, {"value", c.g_slope_min.value}}},
      {"g_slope_alternate_min",
       {{"U", c.g_slope_alternate_min.U},
        {"rho", c.g_slope_alternate_min.R},
        {"value", c.g_slope_alternate_min.value}}},
      {"outward_b", c.outward_b},
      {"outward_g_min", c.outward_g_min},
      {"outward_monotone", c.outward_monotone},
      {"integrated_margin", c.integrated_margin},
      {"integrated_margin_sharp", c.integrated_margin_sharp},
      {"inward_b", c.inward_b},
      {"inward_h_slope_max", c.inward_h_slope_max},
      {"inward_n_max", c.inward_n_max},
      {"passed", c.passed}};
  o.table.header = {"quantity", "value"};
  o.table.rows = {{"N_min", c.N_min.value},
                  {"N_edge_U0", c.N_edges[0].value},
                  {"N_edge_Usqrt2", c.N_edges[1].value},
                  {"N_edge_R0", c.N_edges[2].value},
                  {"N_edge_R1", c.N_edges[3].value},
                  {"g_slope_min", c.g_slope_min.value},
                  {"g_slope_alternate_min", c.g_slope_alternate_min.value},
                  {"outward_g_min", c.outward_g_min},
                  {"integrated_margin", c.integrated_margin},
                  {"integrated_margin_sharp", c.integrated_margin_sharp},
                  {"inward_h_slope_max", c.inward_h_slope_max},
                  {"inward_n_max", c.inward_n_max}};
  return o;
}

Output cmd_appendix(const Config& cfg) {
  AppendixOptions ao;
  ao.rel_tol = cfg.rel_tol;
  ao.abs_tol = cfg.abs_tol;
  const Branch branch = cfg.odd ? Branch::odd : Branch::even;
  const NodalIntersection x = find_intersection(cfg.k, branch, ao);
  Output o{"appendix", {}, {}};
  o.doc["intersection"] = {{"k", x.k},
                           {"branch", to_string(x.branch)},
                           {"n", x.n},
                           {"c", x.c},
                           {"b", x.b},
                           {"residual", x.residual},
                           {"angle", x.angle},
                           {"radius", x.radius},
                           {"zeros", x.zeros},
                           {"glue_residual", x.glue_residual},
                           {"center_samples", x.center_samples},
                           {"cone_samples", x.cone_samples}};
  if (cfg.lemmas) {
    const LemmaReport l = lemma_monitors(50.0, 50.0, ao);
    json windows = json::array();
    for (const WindowReading& t : l.windows)
      windows.push_back({{"k", t.k},
                         {"c_L", t.c_L},
                         {"c_R", t.c_R},
                         {"b_L", t.b_L},
                         {"b_R", t.b_R},
                         {"samples", t.samples},
                         {"violations_c_interval", t.violations_c_interval},
                         {"violations_b_interval", t.violations_b_interval}});
    o.doc["lemmas"] = {{"r_small", l.r_small},
                       {"r_linear", l.r_linear},
                       {"R_small", l.R_small},
                       {"R_linear", l.R_linear},
                       {"theta_max", l.theta_max},
                       {"beta_min", l.beta_min},
                       {"beta_min_negative", l.beta_min_negative},
                       {"theta_rho0_abs_max", l.theta_rho0_abs_max},
                       {"beta_rho0_abs_max", l.beta_rho0_abs_max},
                       {"H_center_margin", l.H_center_margin},
                       {"H_cone_margin", l.H_cone_margin},
                       {"H_flip", l.H_flip},
                       {"windows", windows},
                       {"passed", l.passed}};
  }
  // Curve dumps of the construction.
  const int offset = cone_offset(cfg.k, branch);
  const double pi = std::acos(-1.0);
  o.table.header = {"curve", "parameter", "angle", "radius"};
  for (const PolarPoint& p : trace_center_curve(0.05, -(x.n + 1.5) * pi, ao))
    o.table.rows.push_back({"center", p.parameter, p.angle, p.radius});
  for (const PolarPoint& p : trace_cone_curve(cfg.odd ? -0.05 : 0.05, offset, 1.5 * pi, ao))
    o.table.rows.push_back({"cone", p.parameter, p.angle, p.radius});
  return o;
}

Output cmd_figure1(const Config& cfg) {
  Output o{"figure1", {}, {}};
  o.table.header = {"c", "B", "D", "b_bar", "d_bar"};
  json pts = json::array();
  for (const Figure1Point& p : figure1_curve(cfg.c_min, cfg.c_max, cfg.samples)) {
    pts.push_back({{"c", p.c}, {"B", p.B}, {"D", p.D}, {"b_bar", p.b_bar}, {"d_bar", p.d_bar}});
    o.table.rows.push_back({p.c, p.B, p.D, p.b_bar, p.d_bar});
  }
  o.doc["points"] = pts;
  return o;
}

/// Writes `text` to DIR/name or to `out`; throws std::runtime_error on I/O failure.
void emit(const Config& cfg, const std::string& name, const std::string& text, std::ostream& out) {
  if (cfg.out_dir.empty()) {
    out << text;
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  const std::filesystem::path path = std::filesystem::path(cfg.out_dir) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::string dump(json doc) {
  round_numbers(doc);
  return doc.dump(2) + "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Self-similar solutions of the focusing cubic wave equation", "cubicwave"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--rel-tol", cfg.rel_tol, "Relative integration tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--abs-tol", cfg.abs_tol, "Absolute integration tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out_dir, "Write outputs into this directory instead of stdout");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* solve = app.add_subcommand("solve", "Regular solution with n zeros (or one c-orbit)");
  auto* solve_n = solve->add_option("--n", cfg.n, "Number of zeros")->check(CLI::Range(0, n_cap));
  auto* solve_c = solve->add_option("--c", cfg.c, "Integrate the single c-orbit with this c");
  solve_n->excludes(solve_c);
  solve_c->excludes(solve_n);

  auto* tab = app.add_subcommand("table", "Solutions n = 0..n_max with predictions");
  tab->add_option("--n-max", cfg.n_max, "Largest n")->check(CLI::Range(0, n_cap));

  auto* asym = app.add_subcommand("asymptotics", "Matched-asymptotics constants");

  auto* pred = app.add_subcommand("predict", "Large-n prediction of c_n and b_n");
  pred->add_option("--n", cfg.n, "Number of zeros")->required()->check(CLI::NonNegativeNumber);

  auto* stab = app.add_subcommand("stability", "Negative spectrum of the linearized operator");
  stab->add_option("--n", cfg.n, "Number of zeros")->required()->check(CLI::Range(0, n_cap));
  stab->add_option("--truncation", cfg.truncation, "Truncation point (0: automatic)")
      ->check(CLI::NonNegativeNumber);

  auto* ext = app.add_subcommand("exterior", "Continuation outside (or inside) the light cone");
  auto* ext_n = ext->add_option("--n", cfg.n, "Solution index (n >= 1)")->check(CLI::Range(1, n_cap));
  auto* ext_b = ext->add_option("--b", cfg.b, "Value at the light cone");
  ext->add_option("--direction", cfg.direction, "in or out")->check(CLI::IsMember({"in", "out"}));
  ext->add_option("--rho-limit", cfg.rho_limit, "Integration limit (0: automatic)")
      ->check(CLI::NonNegativeNumber);
  ext_n->excludes(ext_b);
  ext_b->excludes(ext_n);

  auto* cert = app.add_subcommand("certify", "Grid certificates of the exterior inequalities");
  cert->add_option("--grid", cfg.grid, "Grid resolution per axis")->check(CLI::Range(100, 100000));

  auto* appx = app.add_subcommand("appendix", "Polar-coordinate curve intersection");
  appx->add_option("--k", cfg.k, "Nodal index k (n = 2k, or 2k + 1 with --odd)")
      ->required()
      ->check(CLI::Range(0, n_cap / 2));
  appx->add_flag("--odd", cfg.odd, "Use the b < 0 branch");
  appx->add_flag("--lemmas", cfg.lemmas, "Include the lemma monitors");

  auto* fig = app.add_subcommand("figure1", "Normalized (B, D) curve");
  fig->add_option("--c-min", cfg.c_min, "Smallest |c|")->check(CLI::PositiveNumber);
  fig->add_option("--c-max", cfg.c_max, "Largest |c|")->check(CLI::PositiveNumber);
  fig->add_option("--samples", cfg.samples, "Samples per sign")->check(CLI::Range(2, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, r;
    const int code = app.exit(e, o, r);
    out << o.str();
    err << r.str();
    return code == 0 ? 0 : 2;
  }
  if (solve->parsed() && solve_n->count() == 0 && solve_c->count() == 0) {
    err << "solve: one of --n or --c is required\n";
    return 2;
  }
  if (ext->parsed() && ext_n->count() == 0 && ext_b->count() == 0) {
    err << "exterior: one of --n or --b is required\n";
    return 2;
  }
  if (fig->parsed() && !(cfg.c_min < cfg.c_max)) {
    err << "figure1: --c-min must be below --c-max\n";
    return 2;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  Output result;
  try {
    if (solve->parsed()) result = cmd_solve(cfg);
    else if (tab->parsed()) result = cmd_table(cfg);
    else if (asym->parsed()) result = cmd_asymptotics(cfg);
    else if (pred->parsed()) result = cmd_predict(cfg);
    else if (stab->parsed()) result = cmd_stability(cfg);
    else if (ext->parsed()) result = cmd_exterior(cfg);
    else if (cert->parsed()) result = cmd_certify(cfg);
    else if (appx->parsed()) result = cmd_appendix(cfg);
    else result = cmd_figure1(cfg);
  } catch (const Error& e) {
    json diag = {{"metadata", metadata(cfg)},
                 {"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
    if (const auto* f = dynamic_cast<const IntegrationFailure*>(&e))
      diag["error"]["last_x"] = f->last_x();
    err << "computation failed: " << e.what() << "\n";
    try {
      emit(cfg, cfg.command + ".error.json", dump(diag), out);
    } catch (const std::exception& io) {
      err << io.what() << "\n";
    }
    return 1;
  }

  try {
    json meta = metadata(cfg);
    if (result.doc.contains("metadata_extra")) {
      for (auto it = result.doc["metadata_extra"].begin(); it != result.doc["metadata_extra"].end(); ++it)
        meta[it.key()] = it.value();
      result.doc.erase("metadata_extra");
    }
    json doc = {{"metadata", meta}};
    for (auto it = result.doc.begin(); it != result.doc.end(); ++it) doc[it.key()] = it.value();
    if (cfg.format == "json") {
      emit(cfg, result.stem + ".json", dump(doc), out);
    } else {
      std::ostringstream csv;
      write_csv(csv, result.table);
      emit(cfg, result.stem + ".csv", csv.str(), out);
      if (!cfg.out_dir.empty()) emit(cfg, result.stem + ".meta.json", dump({{"metadata", meta}}), out);
    }
  } catch (const std::exception& e) {
    json diag = {{"metadata", metadata(cfg)}, {"error", {{"kind", "io_error"}, {"message", e.what()}}}};
    err << e.what() << "\n";
    out << dump(diag);
    return 1;
  }
  return 0;
}

}  // namespace cubicwave::cli
