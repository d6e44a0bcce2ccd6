#include "ccsusy/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "ccsusy/errors.hpp"
#include "ccsusy/oracle.hpp"
#include "ccsusy/smatrix.hpp"
#include "json.hpp"

namespace ccsusy {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return g;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
};

std::string table_to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) os << ',';
    os << t.columns[c];
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      if (row[c]) os << format_double(*row[c]);
    }
    os << '\n';
  }
  return os.str();
}

std::string table_to_json(const Table& t) {
  json j;
  j["columns"] = t.columns;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& cell : row) {
      if (cell)
        r.push_back(*cell);
      else
        r.push_back(nullptr);
    }
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file '" + path.string() + "'");
  out << content;
}

struct OutputContext {
  fs::path dir;
  std::vector<std::string> formats;
  std::string prefix;
};

OutputContext make_output_context(const RunConfig& resolved, const CommandOptions& opts) {
  OutputContext ctx;
  ctx.dir = opts.out_dir.empty() ? resolved.out_directory : opts.out_dir;
  ctx.formats = opts.format.empty() ? resolved.formats : std::vector<std::string>{opts.format};
  for (const auto& f : ctx.formats)
    if (f != "csv" && f != "json")
      throw ConfigError("format: must be 'csv' or 'json', got '" + f + "'");
  ctx.prefix = opts.file_prefix;
  return ctx;
}

void emit_table(const OutputContext& ctx, const std::string& stem, const Table& t,
                CommandOutcome& outcome) {
  for (const auto& f : ctx.formats) {
    const fs::path p = ctx.dir / (ctx.prefix + stem + "." + f);
    write_file(p, f == "csv" ? table_to_csv(t) : table_to_json(t));
    outcome.files.push_back(p.string());
  }
}

void emit_config_echo(const OutputContext& ctx, const RunConfig& resolved,
                      CommandOutcome& outcome) {
  const fs::path p = ctx.dir / (ctx.prefix + "config.json");
  write_file(p, serialize_config(resolved));
  outcome.files.push_back(p.string());
}

std::vector<std::string> potential_columns(int n) {
  std::vector<std::string> cols{"r"};
  for (int i = 1; i <= n; ++i)
    for (int j = i; j <= n; ++j) cols.push_back("V" + std::to_string(i) + std::to_string(j));
  return cols;
}

Table potential_table(const BuiltTransform& built, const RadialGrid& grid) {
  const int n = built.spec.size();
  Table t;
  t.columns = potential_columns(n);
  for (double r : linear_grid(0.0, grid.r_max, grid.n_points)) {
    const RealMatrix v = built.transform.potential(r);
    std::vector<std::optional<double>> row{r};
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) row.push_back(v(i, j));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table smatrix_table(const BuiltTransform& built, const EnergyGrid& grid) {
  const auto energies = linear_grid(grid.e_min, grid.e_max, grid.n_points);
  for (double e : energies) {
    int n_open = 0;
    for (bool b : open_channel_mask(e, built.spec.channels())) n_open += b ? 1 : 0;
    if (n_open > 2)
      throw ConfigError(
          "smatrix: eigenphase output is defined for at most two open channels; restrict "
          "e_grid or the channel count");
  }
  auto curve = compute_phase_curve(built.transform.jost_function(), built.spec.channels(),
                                   energies);
  unwrap_phase_curve(curve);

  Table t;
  t.columns = {"E", "delta1", "delta2", "epsilon", "open_channels"};
  for (const auto& pt : curve) {
    std::vector<std::optional<double>> row{pt.energy, pt.delta1, pt.delta2, pt.epsilon,
                                           static_cast<double>(pt.n_open)};
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::pair<double, double> bound_scan_range(const BuiltTransform& built,
                                           const BoundScanConfig& scan) {
  const double min_thr = built.spec.channels().min_threshold();
  const double e_max =
      scan.e_max ? *scan.e_max : min_thr - 1e-6 * std::max(1.0, std::abs(min_thr));
  const double width = built.spec.kappa_max() + max_norm(built.transform.u_at_origin()) + 1.0;
  const double e_min = scan.e_min ? *scan.e_min : min_thr - width * width;
  if (!(e_min < e_max))
    throw ConfigError("bound_states: e_min must lie below e_max");
  return {e_min, e_max};
}

std::vector<double> scan_bound_states(const BuiltTransform& built, const BoundScanConfig& scan) {
  auto [e_min, e_max] = bound_scan_range(built, scan);
  return bound_state_scan(built.transform.jost_function(), built.spec.channels(), e_min, e_max,
                          scan.n_grid);
}

struct TailFit {
  double norm_at_8 = 0.0;
  double norm_origin = 0.0;
  std::optional<double> slope;  // absent when the tail is identically zero
};

TailFit fit_tail_decay(const BuiltTransform& built) {
  TailFit fit;
  const RealVector u_inf = built.transform.u_infinity();
  const RealMatrix u_inf_m = RealMatrix(u_inf.asDiagonal());
  fit.norm_at_8 = max_norm(RealMatrix(built.transform.superpotential(8.0) - u_inf_m));
  fit.norm_origin = max_norm(RealMatrix(built.transform.u_at_origin() - u_inf_m));

  std::vector<double> rs, lognorms;
  for (double r : linear_grid(0.2, 8.0, 60)) {
    const double nrm = max_norm(RealMatrix(built.transform.superpotential(r) - u_inf_m));
    if (nrm > 1e-13 && nrm < 1e-1) {
      rs.push_back(r);
      lognorms.push_back(std::log(nrm));
    }
  }
  if (rs.size() >= 5) {
    const auto n = static_cast<double>(rs.size());
    double sr = 0, sl = 0, srr = 0, srl = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      sr += rs[i];
      sl += lognorms[i];
      srr += rs[i] * rs[i];
      srl += rs[i] * lognorms[i];
    }
    fit.slope = (n * srl - sr * sl) / (n * srr - sr * sr);
  }
  return fit;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CommandOutcome run_potential(const RunConfig& cfg, const CommandOptions& opts) {
  const RunConfig resolved = resolve_config(cfg);
  const OutputContext ctx = make_output_context(resolved, opts);
  const BuiltTransform built = build_transform(resolved);

  CommandOutcome outcome;
  emit_table(ctx, "potential", potential_table(built, *resolved.r_grid), outcome);
  emit_config_echo(ctx, resolved, outcome);
  outcome.message = "potential table written";
  return outcome;
}

CommandOutcome run_smatrix(const RunConfig& cfg, const CommandOptions& opts) {
  const RunConfig resolved = resolve_config(cfg);
  const OutputContext ctx = make_output_context(resolved, opts);
  const BuiltTransform built = build_transform(resolved);

  CommandOutcome outcome;
  emit_table(ctx, "smatrix", smatrix_table(built, *resolved.e_grid), outcome);
  emit_config_echo(ctx, resolved, outcome);
  outcome.message = "eigenphase table written";
  return outcome;
}

CommandOutcome run_boundstates(const RunConfig& cfg, const CommandOptions& opts) {
  const RunConfig resolved = resolve_config(cfg);
  const OutputContext ctx = make_output_context(resolved, opts);
  const BuiltTransform built = build_transform(resolved);

  const std::vector<double> states = scan_bound_states(built, resolved.bound_scan);
  Table t;
  t.columns = {"index", "energy"};
  for (std::size_t i = 0; i < states.size(); ++i)
    t.rows.push_back({static_cast<double>(i), states[i]});

  CommandOutcome outcome;
  emit_table(ctx, "boundstates", t, outcome);
  emit_config_echo(ctx, resolved, outcome);
  outcome.message = std::to_string(states.size()) + " bound state(s) found";
  return outcome;
}

CommandOutcome run_verify(const RunConfig& cfg, const CommandOptions& opts) {
  const RunConfig resolved = resolve_config(cfg);
  const OutputContext ctx = make_output_context(resolved, opts);
  const BuiltTransform built = build_transform(resolved);
  const ChannelSet& channels = built.spec.channels();
  const JostFunction jost = built.transform.jost_function();

  json checks = json::array();
  bool all_pass = true;
  const auto add_check = [&](const std::string& name, double value, double threshold,
                             bool less_than, bool pass_override = false, bool overridden = false) {
    const bool pass = overridden ? pass_override
                                 : (less_than ? value <= threshold : value >= threshold);
    json c;
    c["name"] = name;
    c["value"] = value;
    c["threshold"] = threshold;
    c["comparison"] = less_than ? "<=" : ">=";
    c["pass"] = pass;
    checks.push_back(c);
    all_pass = all_pass && pass;
  };

  // energies above every threshold: the oracle's validated envelope
  std::vector<double> above;
  for (double e :
       linear_grid(resolved.e_grid->e_min, resolved.e_grid->e_max, resolved.e_grid->n_points)) {
    if (e > channels.max_threshold() + 1e-9) above.push_back(e);
  }
  if (above.empty())
    throw ConfigError("verify: e_grid must extend above all thresholds for the oracle checks");
  if (above.size() > 50) {
    std::vector<double> sub;
    for (std::size_t i = 0; i < 50; ++i)
      sub.push_back(above[i * (above.size() - 1) / 49]);
    above = sub;
  }

  // analytic-vs-oracle deviations
  IntegrationConfig icfg;
  {
    double r_max = std::max(12.0, 10.0 / built.spec.kappa_min());
    while (r_max < 40.0 && max_norm(built.transform.potential(r_max)) > 1e-8) r_max += 2.0;
    icfg = default_integration_config(built.spec.kappa_max(), resolved.e_grid->e_max, r_max,
                                      300.0);
  }
  const PotentialFunction pot = [&](double r) { return built.transform.potential(r); };
  const double v_tail = max_norm(built.transform.potential(icfg.r_max));

  double max_f_dev = 0.0, max_s_dev = 0.0, max_uni = 0.0, max_sym = 0.0;
  for (double e : above) {
    IntegrationConfig ecfg =
        default_integration_config(built.spec.kappa_max(), e, icfg.r_max, 300.0);
    const RegularSolutionTrace trace = integrate_regular(pot, e, channels, ecfg);
    auto [f_plus, f_minus] = extract_jost_pair(trace, channels, ecfg, v_tail);
    const WaveNumbers k = channel_wavenumbers(e, channels);
    const ComplexMatrix f_ref = jost(k);
    const ComplexMatrix f_ref_m = jost(k.negated());
    max_f_dev = std::max(max_f_dev, max_norm(ComplexMatrix(f_plus - f_ref)));

    const SMatrixPoint s_oracle = s_matrix_from_jost(f_plus, f_minus, k, channels);
    const SMatrixPoint s_ref = s_matrix_from_jost(f_ref, f_ref_m, k, channels);
    max_s_dev = std::max(max_s_dev, max_norm(ComplexMatrix(s_oracle.s - s_ref.s)));

    const int m = s_ref.open_count();
    max_uni = std::max(max_uni, max_norm(ComplexMatrix(s_ref.s * s_ref.s.adjoint() -
                                                       ComplexMatrix::Identity(m, m))));
    max_sym = std::max(max_sym, max_norm(ComplexMatrix(s_ref.s - s_ref.s.transpose())));
  }
  add_check("oracle_f_deviation", max_f_dev, 1e-6, true);
  add_check("oracle_s_deviation", max_s_dev, 1e-6, true);
  add_check("s_unitarity_defect", max_uni, 1e-10, true);
  add_check("s_symmetry_defect", max_sym, 1e-10, true);

  const double order = observed_convergence_order(
      pot, above[above.size() / 2], channels,
      default_integration_config(built.spec.kappa_max(), above[above.size() / 2], icfg.r_max,
                                 12.0),
      v_tail);
  add_check("integrator_order", order, 3.8, false);

  // superpotential symmetry on a radial grid
  double max_u_sym = 0.0;
  for (double r : linear_grid(0.0, resolved.r_grid->r_max, 200))
    max_u_sym = std::max(max_u_sym, symmetry_defect(built.transform.superpotential(r)));
  add_check("u_symmetry_defect", max_u_sym, 1e-10, true);

  // Jost-matrix symmetry and the origin-value consistency of the solution
  double max_jost_sym = 0.0, max_jost_consistency = 0.0;
  for (double e : linear_grid(resolved.e_grid->e_min, resolved.e_grid->e_max, 21)) {
    try {
      max_jost_sym = std::max(max_jost_sym, jost_symmetry_defect(jost, e, channels));
      const WaveNumbers k = channel_wavenumbers(e, channels);
      const ComplexMatrix lhs = built.transform.jost_solution(k, 0.0).transpose();
      max_jost_consistency =
          std::max(max_jost_consistency, max_norm(ComplexMatrix(lhs - jost(k))));
    } catch (const Error&) {
      // isolated pole (factorization energy in a decaying channel); skip
    }
  }
  add_check("jost_symmetry_defect", max_jost_sym, 1e-10, true);
  add_check("jost_origin_consistency", max_jost_consistency, 1e-10, true);

  // asymptotic tail
  const TailFit tail = fit_tail_decay(built);
  add_check("tail_ratio_at_r8", tail.norm_at_8,
            1e-6 * std::max(tail.norm_origin, 1e-300), true);
  const int rank = built.transform.rank();
  const int n = built.spec.size();
  if (tail.slope) {
    const double bound =
        (rank == 0 || rank == n) ? -0.9 * 2.0 * built.spec.kappa_min() : -1e-12;
    add_check("tail_decay_slope", *tail.slope, bound, true);
  } else {
    add_check("tail_identically_zero", tail.norm_at_8, 1e-13, true);
  }

  const std::vector<double> bound_states = scan_bound_states(built, resolved.bound_scan);

  json report;
  report["config"] = json::parse(serialize_config(resolved));
  report["u_infinity"] = std::vector<double>(
      built.transform.u_infinity().data(),
      built.transform.u_infinity().data() + built.transform.u_infinity().size());
  report["rank"] = rank;
  const double margin = built.transform.rank_margin();
  if (std::isfinite(margin)) {
    report["rank_margin"] = margin;
    if (margin < 10.0) report["rank_borderline"] = true;
  }
  report["oracle"] = {{"r_max", icfg.r_max},
                      {"energies", above.size()},
                      {"max_f_deviation", max_f_dev},
                      {"max_s_deviation", max_s_dev},
                      {"convergence_order", order}};
  if (tail.slope) report["tail_decay_slope"] = *tail.slope;
  report["bound_states"] = bound_states;
  report["checks"] = checks;
  report["pass"] = all_pass;

  CommandOutcome outcome;
  const fs::path p = ctx.dir / (ctx.prefix + "verify_report.json");
  write_file(p, report.dump(2) + "\n");
  outcome.files.push_back(p.string());
  emit_config_echo(ctx, resolved, outcome);
  outcome.exit_code = all_pass ? 0 : 3;
  outcome.message = all_pass ? "all verification checks passed"
                             : "verification FAILED; see verify_report.json";
  return outcome;
}

CommandOutcome run_figdata(const std::string& preset_name, const CommandOptions& opts) {
  RunConfig cfg = make_preset_config(preset_name);
  CommandOptions sub = opts;
  if (sub.file_prefix.empty()) sub.file_prefix = preset_name + "_";

  CommandOutcome outcome;
  const CommandOutcome pot = run_potential(cfg, sub);
  const CommandOutcome sm = run_smatrix(cfg, sub);
  outcome.files = pot.files;
  outcome.files.insert(outcome.files.end(), sm.files.begin(), sm.files.end());
  // drop the duplicate config echo entry
  std::sort(outcome.files.begin(), outcome.files.end());
  outcome.files.erase(std::unique(outcome.files.begin(), outcome.files.end()),
                      outcome.files.end());
  outcome.message = "figure data bundle written for " + preset_name;
  return outcome;
}

}  // namespace ccsusy
