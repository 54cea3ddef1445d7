#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmcf/barriers.hpp"
#include "fmcf/closed_forms.hpp"
#include "fmcf/flow.hpp"
#include "fmcf/io.hpp"
#include "fmcf/oracle.hpp"
#include "fmcf/parallel.hpp"
#include "fmcf/scenarios.hpp"
#include "fmcf/shapes.hpp"

namespace fmcf {

/// Fully resolved command-line configuration. Options are shared by all subcommands; each
/// command reads the ones it needs.
struct CliConfig {
  std::string command;
  std::string help;  ///< non-empty: print and exit 0
  double s = 0.5;
  std::string shape = "circle";
  std::string curve_file;
  std::string name;
  double radius = 1.0;
  double a = 1.0;
  double b = 0.5;
  double epsilon = 0.1;
  double delta = 0.05;
  double t = 0.0;
  int nodes = 512;
  int node = 0;
  bool all_nodes = false;
  int samples = 64;
  double time = 0.0;
  std::string stop = "extinct";
  int stride = 1;
  std::string output;
  std::string csv;
  std::string config_file;
  QuadConfig quad;
  FlowConfig flow{};
  int threads = 0;
};

namespace detail {

inline const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> c{"curvature", "barrier", "flow", "scenario"};
  return c;
}

inline void validate_cli(const CliConfig& c) {
  auto bad = [](const std::string& key, const std::string& what) { throw UsageError(key, "--" + key + ": " + what); };
  if (!(c.s > 0.0 && c.s < 1.0)) bad("s", "fractional order must lie in (0, 1)");
  if (!(c.radius > 0.0)) bad("radius", "must be positive");
  if (!(c.a > 0.0)) bad("a", "must be positive");
  if (!(c.b > 0.0)) bad("b", "must be positive");
  if (!(c.epsilon >= 0.0)) bad("epsilon", "must be >= 0");
  if (!(c.delta >= 0.0)) bad("delta", "must be >= 0");
  if (c.nodes < static_cast<int>(ClosedCurve::kMinNodes)) bad("nodes", "must be at least 8");
  if (c.node < 0) bad("node", "must be >= 0");
  if (c.samples < 3) bad("samples", "must be at least 3");
  if (!(c.time >= 0.0)) bad("time", "must be >= 0");
  if (c.stride < 1) bad("stride", "must be >= 1");
  if (c.threads < 0) bad("threads", "must be >= 0");
  const auto& q = c.quad;
  if (!(q.rel_tol > 0.0)) bad("rel-tol", "must be positive");
  if (!(q.abs_tol > 0.0)) bad("abs-tol", "must be positive");
  if (!(q.near_field_radius_factor > 0.0)) bad("near-field-factor", "must be positive");
  if (!(q.truncation_radius > 0.0)) bad("truncation-radius", "must be positive");
  if (q.max_subdivisions < 1) bad("max-subdivisions", "must be >= 1");
  const auto& f = c.flow;
  if (!(f.cfl > 0.0 && f.cfl < 1.0)) bad("cfl", "must lie in (0, 1)");
  if (!(f.target_spacing >= 0.0)) bad("spacing", "must be >= 0 (0 selects the default)");
  if (!(f.pinch_factor >= 2.0)) bad("pinch-factor", "must be >= 2");
  if (f.max_steps < 1) bad("max-steps", "must be >= 1");
  if (!(f.refine_factor >= 1.0)) bad("refine-factor", "must be >= 1");
  if (!(f.refine_halfwidth >= 0.0)) bad("refine-halfwidth", "must be >= 0");
  if (c.command == "curvature") {
    static const std::vector<std::string> shapes{"circle", "ellipse", "square", "rectangle",
                                                 "half-plane", "slab", "strip", "file"};
    if (std::find(shapes.begin(), shapes.end(), c.shape) == shapes.end()) bad("shape", "unknown shape '" + c.shape + "'");
  }
  if (c.command == "flow") {
    static const std::vector<std::string> shapes{"circle", "ellipse", "dumbbell", "file"};
    if (std::find(shapes.begin(), shapes.end(), c.shape) == shapes.end()) bad("shape", "unknown flow shape '" + c.shape + "'");
    if (c.stop != "extinct" && c.stop != "first-pinch" && c.stop != "time") bad("stop", "expected extinct, first-pinch or time");
    if (c.stop == "time" && !(c.time > 0.0)) bad("time", "--stop time needs --time > 0");
  }
  if ((c.shape == "file") && c.curve_file.empty() && (c.command == "curvature" || c.command == "flow"))
    bad("curve-file", "required for --shape file");
  if (c.command == "barrier") {
    static const std::vector<std::string> names{"strip-positivity", "strip-bounds", "ball", "neckpinch-params"};
    if (std::find(names.begin(), names.end(), c.name) == names.end()) bad("name", "unknown barrier '" + c.name + "'");
  }
  if (c.command == "scenario" && c.name != "shrinking-circle" && c.name != "neckpinch")
    bad("name", "unknown scenario '" + c.name + "'");
}

/// Best-effort option name for a CLI11 parse error.
inline std::string parse_error_key(const CLI::ParseError& e) {
  const std::string msg = e.what();
  if (e.get_name() == "RequiredError" && msg.find("subcommand") != std::string::npos) return "command";
  if (const auto p = msg.find("--"); p != std::string::npos) {
    const auto end = msg.find_first_of(" =:,", p);
    return msg.substr(p + 2, end == std::string::npos ? std::string::npos : end - p - 2);
  }
  if (e.get_name() == "ConfigError" || msg.find("not expected") != std::string::npos) {
    const auto p = msg.find_last_of(' ');
    return p == std::string::npos ? msg : msg.substr(p + 1);
  }
  return e.get_name();
}

}  // namespace detail

/// Parses argv (flags override config-file values, which override defaults). Throws UsageError
/// naming the offending key on any invalid or unknown input.
inline CliConfig parse_config(int argc, const char* const* argv) {
  CliConfig c;
  CLI::App app{"Fractional mean curvature: evaluation, barriers, flow and scenarios", "fmcf"};
  app.set_config("--config", "", "TOML/INI file with option = value lines");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);
  app.add_option("--s", c.s, "fractional order s in (0,1)");
  app.add_option("--shape", c.shape, "circle|ellipse|square|rectangle|half-plane|slab|strip|dumbbell|file");
  app.add_option("--curve-file", c.curve_file, "plain-text curve, one 'x y' per line");
  app.add_option("--name", c.name, "barrier or scenario name");
  app.add_option("--radius", c.radius, "circle radius / ball radius R0");
  app.add_option("--a", c.a, "ellipse/rectangle x semi-axis; slab half-width");
  app.add_option("--b", c.b, "ellipse/rectangle y semi-axis");
  app.add_option("--epsilon", c.epsilon, "strip waist parameter");
  app.add_option("--delta", c.delta, "strip opening parameter");
  app.add_option("--t", c.t, "strip boundary abscissa for curvature");
  app.add_option("--nodes", c.nodes, "node count for built-in curves");
  app.add_option("--node", c.node, "node index to evaluate");
  app.add_flag("--all-nodes", c.all_nodes, "evaluate every node (CSV output)");
  app.add_option("--samples", c.samples, "strip positivity samples");
  app.add_option("--time", c.time, "ball time / flow end time");
  app.add_option("--stop", c.stop, "flow stop rule: extinct|first-pinch|time");
  app.add_option("--stride", c.stride, "flow snapshot stride");
  app.add_option("--output", c.output, "JSON output path");
  app.add_option("--csv", c.csv, "CSV output path");
  app.add_option("--rel-tol", c.quad.rel_tol);
  app.add_option("--abs-tol", c.quad.abs_tol);
  app.add_option("--near-field-factor", c.quad.near_field_radius_factor);
  app.add_option("--truncation-radius", c.quad.truncation_radius);
  app.add_option("--max-subdivisions", c.quad.max_subdivisions);
  app.add_option("--cfl", c.flow.cfl);
  app.add_option("--spacing", c.flow.target_spacing, "target node spacing (0: default)");
  app.add_option("--pinch-factor", c.flow.pinch_factor);
  app.add_option("--max-steps", c.flow.max_steps);
  app.add_option("--refine-factor", c.flow.refine_factor);
  app.add_option("--refine-halfwidth", c.flow.refine_halfwidth);
  app.add_option("--threads", c.threads, "worker threads (0: FMCF_THREADS or all cores)")->envname("FMCF_THREADS");
  for (const auto& cmd : detail::cli_commands()) app.add_subcommand(cmd)->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    c.help = app.help();
    return c;
  } catch (const CLI::ParseError& e) {
    throw UsageError(detail::parse_error_key(e), e.what());
  }
  c.command = app.get_subcommands().front()->get_name();
  if (auto* opt = app.get_option("--config"); opt->count() > 0) c.config_file = opt->as<std::string>();
  c.flow.quad = c.quad;
  detail::validate_cli(c);
  return c;
}

inline json to_json(const CliConfig& c) {
  return {{"command", c.command},
          {"s", c.s},
          {"shape", c.shape},
          {"curve_file", c.curve_file},
          {"name", c.name},
          {"radius", c.radius},
          {"a", c.a},
          {"b", c.b},
          {"epsilon", c.epsilon},
          {"delta", c.delta},
          {"t", c.t},
          {"nodes", c.nodes},
          {"node", c.node},
          {"all_nodes", c.all_nodes},
          {"samples", c.samples},
          {"time", c.time},
          {"stop", c.stop},
          {"stride", c.stride},
          {"output", c.output},
          {"csv", c.csv},
          {"config_file", c.config_file},
          {"quad",
           {{"rel_tol", c.quad.rel_tol},
            {"abs_tol", c.quad.abs_tol},
            {"near_field_radius_factor", c.quad.near_field_radius_factor},
            {"truncation_radius", c.quad.truncation_radius},
            {"max_subdivisions", c.quad.max_subdivisions}}},
          {"flow",
           {{"cfl", c.flow.cfl},
            {"target_spacing", c.flow.target_spacing},
            {"pinch_factor", c.flow.pinch_factor},
            {"max_steps", c.flow.max_steps},
            {"refine_factor", c.flow.refine_factor},
            {"refine_halfwidth", c.flow.refine_halfwidth}}},
          {"threads", c.threads}};
}

namespace detail {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path);
  out << text;
  if (!out) throw OutputError("cannot write " + path);
}

inline json envelope(const CliConfig& c, json result) {
  return {{"format_version", kFormatVersion}, {"config", to_json(c)}, {"result", std::move(result)}};
}

inline std::string csv_comment(const CliConfig& c) {
  return "# format_version=" + std::to_string(kFormatVersion) + " config=" + to_json(c).dump() + "\n";
}

inline ClosedCurve cli_curve(const CliConfig& c) {
  if (c.shape == "circle") return circle_curve(c.radius, static_cast<std::size_t>(c.nodes));
  if (c.shape == "ellipse") return ellipse_curve(c.a, c.b, static_cast<std::size_t>(c.nodes));
  if (c.shape == "square")
    return square_curve(c.radius, 8.0 * c.radius / static_cast<double>(c.nodes));
  if (c.shape == "rectangle")
    return rectangle_curve(c.a, c.b, 4.0 * (c.a + c.b) / static_cast<double>(c.nodes));
  if (c.shape == "file") return read_curve_file(c.curve_file);
  throw UsageError("shape", "--shape " + c.shape + " has no polygon form here");
}

inline int run_curvature(const CliConfig& c, std::ostream& out) {
  const FracOrder s(c.s);
  json result;
  std::string summary;
  if (c.shape == "half-plane") {
    const auto r = region_curvature_oracle([](const Point& p) { return p.y < 0.0; }, {}, {0.0, 1.0}, s, c.quad);
    result = {{"method", "region_oracle"}, {"point", {0.0, 0.0}}, {"curvature", to_json(r)}};
    summary = "H_s = " + fmt(r.value) + " (error " + fmt(r.error_estimate) + ", half-plane)";
  } else if (c.shape == "slab" || c.shape == "strip") {
    const StripSpec spec{c.shape == "slab" ? c.a : c.epsilon, c.shape == "slab" ? 0.0 : c.delta};
    if (!(spec.epsilon > 0.0)) throw UsageError(c.shape == "slab" ? "a" : "epsilon", "must be positive");
    const double t = c.shape == "slab" ? 0.0 : c.t;
    const auto r = strip_curvature_at(spec, t, s, c.quad);
    result = {{"method", "boundary_integral_truncated"},
              {"point", {t, strip_profile(spec, t)}},
              {"curvature", to_json(r)}};
    if (c.shape == "slab") result["slab_closed_form"] = slab_curvature(spec.epsilon, 2, s);
    summary = "H_s = " + fmt(r.value) + " (error " + fmt(r.error_estimate) + ", " + c.shape + ")";
  } else {
    const ClosedCurve curve = cli_curve(c);
    const CurvatureEvaluator ev(curve, s, c.quad);
    if (c.all_nodes) {
      const auto all = ev.all();
      std::string csv = csv_comment(c) + "node_index,x,y,H_s,error_estimate,classical_curvature\n";
      double lo = all.empty() ? 0.0 : all[0].value, hi = lo;
      for (std::size_t i = 0; i < all.size(); ++i) {
        csv += std::to_string(i) + "," + fmt(curve[i].x) + "," + fmt(curve[i].y) + "," + fmt(all[i].value) +
               "," + fmt(all[i].error_estimate) + "," + fmt(classical_curvature(curve, i)) + "\n";
        lo = std::min(lo, all[i].value);
        hi = std::max(hi, all[i].value);
      }
      write_text(c.csv.empty() ? "curvature.csv" : c.csv, csv);
      result = {{"method", "boundary_integral"}, {"nodes", curve.size()}, {"min", lo}, {"max", hi}};
      summary = "H_s over " + std::to_string(curve.size()) + " nodes in [" + fmt(lo) + ", " + fmt(hi) + "]";
    } else {
      if (static_cast<std::size_t>(c.node) >= curve.size()) throw UsageError("node", "--node out of range");
      const auto i = static_cast<std::size_t>(c.node);
      const auto r = ev.at(i);
      result = {{"method", "boundary_integral"},
                {"nodes", curve.size()},
                {"node", i},
                {"point", {curve[i].x, curve[i].y}},
                {"classical_curvature", classical_curvature(curve, i)},
                {"curvature", to_json(r)}};
      summary = "H_s = " + fmt(r.value) + " (error " + fmt(r.error_estimate) + ", node " + std::to_string(i) + ")";
    }
  }
  write_text(c.output.empty() ? "curvature.json" : c.output, envelope(c, result).dump(2) + "\n");
  out << summary << '\n';
  return 0;
}

inline int run_barrier(const CliConfig& c, std::ostream& out) {
  const FracOrder s(c.s);
  json result;
  std::string summary;
  if (c.name == "strip-positivity") {
    const auto rep = verify_strip_positivity({c.epsilon, c.delta}, s, c.samples, c.quad);
    result = to_json(rep);
    summary = "min_value = " + fmt(rep.min_value) + " at t = " + fmt(rep.argmin_t) + ", c0_estimate = " +
              fmt(rep.c0_estimate) + ", waist classical curvature = " + fmt(rep.waist_classical_curvature);
  } else if (c.name == "strip-bounds") {
    const auto b = strip_bounds({c.epsilon, c.delta});
    result = to_json(b);
    summary = "eta = " + fmt(b.eta) + ", kappa_geom = " + fmt(b.kappa_geom);
  } else if (c.name == "ball") {
    const BallSpec ball{{}, c.radius, 2};
    const double T = ball_extinction_time(ball, s, c.quad);
    const double R = ball_radius_at(ball, c.time, s, c.quad);
    result = {{"omega_bar", omega_bar(2, s, c.quad)},
              {"ball_curvature", ball_curvature(c.radius, 2, s, c.quad)},
              {"extinction_time", T},
              {"time", c.time},
              {"radius_at_time", R}};
    summary = "T = " + fmt(T) + ", R(" + fmt(c.time) + ") = " + fmt(R);
  } else {
    const auto p = choose_neckpinch_params(2, s, c.quad);
    const double margin = supersolution_margin(p, s, c.quad, c.samples);
    result = {{"params", to_json(p)},
              {"supersolution_margin", margin},
              {"strip_pinch_time", strip_pinch_time(p.epsilon0, p.kappa_speed)},
              {"lobe_ball_extinction_time", p.lobe_extinction_time(c.quad)}};
    summary = "kappa = " + fmt(p.kappa_speed) + ", epsilon0 = " + fmt(p.epsilon0) + ", delta = " + fmt(p.delta) +
              ", L = " + fmt(p.L) + ", margin = " + fmt(margin);
  }
  write_text(c.output.empty() ? "barrier-" + c.name + ".json" : c.output, envelope(c, result).dump(2) + "\n");
  out << summary << '\n';
  return 0;
}

inline int run_flow_cmd(const CliConfig& c, std::ostream& out) {
  const FracOrder s(c.s);
  FlowConfig cfg = c.flow;
  ClosedCurve initial;
  if (c.shape == "dumbbell") {
    if (!(cfg.target_spacing > 0.0)) cfg.target_spacing = kDumbbellSpacing;
    if (!(cfg.refine_factor > 1.0)) cfg.refine_factor = kDumbbellRefinement;
    if (!(cfg.refine_halfwidth > 0.0)) cfg.refine_halfwidth = kDumbbellRefineHalfwidth;
    initial = build_dumbbell(choose_neckpinch_params(2, s, c.quad), cfg.spacing());
  } else {
    initial = cli_curve(c);
    if (!(cfg.target_spacing > 0.0)) cfg.target_spacing = initial.length() / static_cast<double>(initial.size());
  }
  StopCondition stop;
  if (c.time > 0.0) stop.max_time = c.time;
  stop.on_first_pinch = c.stop == "first-pinch";
  const FlowRun run = run_flow({initial}, s, cfg, stop, {c.stride, {}});
  std::ostringstream csv;
  csv << csv_comment(c);
  write_trajectory_csv(csv, run);
  write_text(c.csv.empty() ? "flow.csv" : c.csv, csv.str());
  const json result = {{"resolved_flow", {{"target_spacing", cfg.target_spacing},
                                          {"refine_factor", cfg.refine_factor},
                                          {"refine_halfwidth", cfg.refine_halfwidth}}},
                       {"events", events_json(run.events)},
                       {"snapshots", snapshots_json(run)}};
  write_text(c.output.empty() ? "flow.json" : c.output, envelope(c, result).dump(2) + "\n");
  const auto& last = run.trajectory.back();
  bool failed = false;
  for (const auto& e : run.events)
    failed = failed || (e.kind == FlowEvent::Kind::accuracy_failure && e.details.rfind("step rejected", 0) != 0);
  out << "flow: " << last.step_count << " steps to t = " << fmt(last.time) << ", " << last.fronts.size()
      << " fronts, " << run.events.size() << " events" << (failed ? " (accuracy failure)" : "") << '\n';
  return failed ? 3 : 0;
}

inline int run_scenario(const CliConfig& c, std::ostream& out) {
  const FracOrder s(c.s);
  const ScenarioReport rep = c.name == "shrinking-circle"
                                 ? scenario_shrinking_circle(c.radius, s, c.flow, static_cast<std::size_t>(c.nodes))
                                 : scenario_neckpinch(s, c.flow);
  write_text(c.output.empty() ? "scenario-" + c.name + ".json" : c.output, envelope(c, to_json(rep)).dump(2) + "\n");
  std::ostringstream csv;
  csv << csv_comment(c);
  write_timeseries_csv(csv, rep);
  write_text(c.csv.empty() ? "scenario-" + c.name + "-timeseries.csv" : c.csv, csv.str());
  int failed = 0;
  for (const auto& a : rep.assertions) failed += a.passed ? 0 : 1;
  out << "scenario " << rep.name << ": " << to_string(rep.verdict) << " (" << rep.assertions.size() - failed
      << "/" << rep.assertions.size() << " assertions)" << '\n';
  switch (rep.verdict) {
    case Verdict::reproduced: return 0;
    case Verdict::not_reproduced: return 1;
    case Verdict::inconclusive: return 3;
  }
  return 3;
}

}  // namespace detail

/// Runs the configured command. Exit codes: 0 success, 1 verdict not reproduced, 2 usage error,
/// 3 numerical or output failure. The one-line summary goes to `out`, diagnostics to `err`.
inline int execute(const CliConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  if (!c.help.empty()) {
    out << c.help;
    return 0;
  }
  if (c.threads > 0) set_thread_count(static_cast<unsigned>(c.threads));
  try {
    if (c.command == "curvature") return detail::run_curvature(c, out);
    if (c.command == "barrier") return detail::run_barrier(c, out);
    if (c.command == "flow") return detail::run_flow_cmd(c, out);
    if (c.command == "scenario") return detail::run_scenario(c, out);
    throw UsageError("command", "unknown command '" + c.command + "'");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

/// parse_config + execute with usage errors mapped to exit code 2.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CliConfig c;
  try {
    c = parse_config(argc, argv);
  } catch (const UsageError& e) {
    err << "usage error (" << e.key() << "): " << e.what() << '\n';
    return 2;
  }
  return execute(c, out, err);
}

}  // namespace fmcf
