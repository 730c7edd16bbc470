// Command line front end: scenario-driven envelopes, set diagnostics,
// discrete minimization, necessary-condition checks, preset verification
// suites, and a CSV-to-gnuplot converter.
//
// Exit codes: 0 success, 2 configuration or input error, 3 verification
// failure, 4 iteration did not converge.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nonlocal/nonlocal.hpp"

namespace fs = std::filesystem;
using nonlocal::json;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kVerificationFailed = 3;
constexpr int kNoConvergence = 4;

struct CommonOpts {
  std::string preset;
  std::string scenario_file;
  std::string out_dir = ".";
  int threads = 0;
};

void add_scenario_options(CLI::App* cmd, CommonOpts& opts, bool with_out = true) {
  auto* preset = cmd->add_option("--preset", opts.preset,
                                 "built-in scenario (four-well, diamond-boundary, five-point, "
                                 "cartesian, indicator)");
  cmd->add_option("--scenario", opts.scenario_file, "scenario JSON file")->excludes(preset);
  if (with_out) cmd->add_option("-o,--out", opts.out_dir, "output directory for CSV artifacts");
  cmd->add_option("--threads", opts.threads, "worker thread count (default: all cores)");
}

nonlocal::Scenario resolve_scenario(const CommonOpts& opts) {
  if (opts.threads > 0)
    setenv("NONLOCAL_RELAX_THREADS", std::to_string(opts.threads).c_str(), 1);
  if (!opts.preset.empty()) return nonlocal::preset_scenario(opts.preset);
  if (!opts.scenario_file.empty()) return nonlocal::load_scenario_file(opts.scenario_file);
  throw std::invalid_argument("choose a scenario with --preset or --scenario");
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')
               ? c
               : '-';
  return out.empty() ? std::string("scenario") : out;
}

fs::path write_artifact(const std::string& dir, const std::string& file,
                        const std::function<void(std::ostream&)>& emit) {
  const fs::path path = fs::path(dir) / file;
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot open output file " + path.string());
  emit(os);
  if (!os) throw std::invalid_argument("failed while writing " + path.string());
  return path;
}

json field_json(const nonlocal::PiecewiseConstantField& u) {
  return json{{"values", u.values}, {"fractions", u.fractions}, {"omega", u.omega_measure}};
}

json pieces_json(const nonlocal::ScalarGrid& grid,
                 const std::vector<nonlocal::CartesianPiece>& pieces) {
  json arr = json::array();
  for (const auto& piece : pieces) {
    json values = json::array();
    for (std::size_t idx : piece.members) values.push_back(grid.coord(idx));
    arr.push_back({{"indices", piece.members}, {"values", values}});
  }
  return arr;
}

int run_envelope(const CommonOpts& opts, std::size_t slc_levels, double tol,
                 std::size_t max_sweeps) {
  const nonlocal::Scenario s = resolve_scenario(opts);
  const std::string stem = sanitize(s.name);
  const nonlocal::GridFunction w = nonlocal::scenario_integrand(s);
  const auto sc = nonlocal::separately_convex_envelope(w, tol, max_sweeps);
  const nonlocal::GridFunction co = nonlocal::convex_envelope(w);
  const nonlocal::GridFunction what = nonlocal::diagonalize_function(w);

  json outputs = json::array();
  auto emit_grid = [&](const std::string& suffix, const nonlocal::GridFunction& g) {
    const fs::path p = write_artifact(opts.out_dir, stem + "-" + suffix + ".csv",
                                      [&g](std::ostream& os) { nonlocal::write_grid_csv(os, g); });
    outputs.push_back(p.string());
  };
  emit_grid("w", w);
  emit_grid("sc", sc.value);
  emit_grid("co", co);
  emit_grid("what", what);

  json summary;
  summary["operation"] = "envelope";
  summary["scenario"] = nonlocal::scenario_to_json(s);
  summary["w"] = {{"min", nonlocal::grid_min(w).value}, {"max_abs", w.max_abs()}};
  summary["sc"] = {{"min", nonlocal::grid_min(sc.value).value},
                   {"converged", sc.converged},
                   {"sweeps", sc.sweeps},
                   {"last_change", sc.last_change},
                   {"tol", sc.tol}};
  summary["co"] = {{"min", nonlocal::grid_min(co).value}};
  summary["what"] = {{"min", nonlocal::grid_min(what).value}};

  if (slc_levels > 0) {
    std::vector<double> levels(slc_levels);
    const auto [lo_it, hi_it] = std::minmax_element(w.values.begin(), w.values.end());
    for (std::size_t k = 0; k < slc_levels; ++k) {
      const double t = slc_levels == 1
                           ? 0.0
                           : static_cast<double>(k) / static_cast<double>(slc_levels - 1);
      levels[k] = *lo_it + t * (*hi_it - *lo_it);
    }
    const auto slc = nonlocal::separately_level_convex_envelope(w, levels);
    emit_grid("slc", slc.value);
    summary["slc"] = {{"levels", slc.levels.size()},
                      {"saturated", slc.saturated},
                      {"min", nonlocal::grid_min(slc.value).value}};
  }
  summary["outputs"] = outputs;
  std::cout << summary.dump(2) << "\n";
  return sc.converged ? kOk : kNoConvergence;
}

int run_sets(const CommonOpts& opts) {
  const nonlocal::Scenario s = resolve_scenario(opts);
  const std::string stem = sanitize(s.name);
  const nonlocal::GridSet zero = nonlocal::scenario_zero_set(s);
  if (zero.empty())
    throw std::invalid_argument("scenario set contains no grid nodes; refine the grid");
  const nonlocal::GridSet diag = nonlocal::diagonalize_set(zero);
  const auto pieces = nonlocal::maximal_cartesian_subsets(zero);
  const auto pieces_hat = nonlocal::maximal_cartesian_subsets(diag);
  const nonlocal::GridSet runion = nonlocal::relaxed_cartesian_union(s.grid, pieces);
  const nonlocal::GridSet schull = nonlocal::separately_convex_hull_set(diag);

  json outputs = json::array();
  auto emit_mask = [&](const std::string& suffix, const nonlocal::GridSet& m) {
    const fs::path p =
        write_artifact(opts.out_dir, stem + "-" + suffix + ".csv", [&](std::ostream& os) {
          nonlocal::write_mask_csv(os, s.grid, m);
        });
    outputs.push_back(p.string());
  };
  emit_mask("zero-set", zero);
  emit_mask("diagonalized", diag);
  emit_mask("relaxed-union", runion);
  emit_mask("sc-hull", schull);
  const fs::path pieces_path =
      write_artifact(opts.out_dir, stem + "-pieces.json", [&](std::ostream& os) {
        os << pieces_json(s.grid, pieces).dump(2) << "\n";
      });
  outputs.push_back(pieces_path.string());

  json summary;
  summary["operation"] = "sets";
  summary["scenario"] = nonlocal::scenario_to_json(s);
  summary["zero_set_nodes"] = zero.count();
  summary["diagonalized_nodes"] = diag.count();
  summary["pieces"] = pieces_json(s.grid, pieces);
  summary["pieces_invariant_under_diagonalization"] = pieces == pieces_hat;
  summary["relaxed_union_nodes"] = runion.count();
  summary["sc_hull_nodes"] = schull.count();
  summary["relaxed_union_equals_sc_hull"] = runion == schull;
  summary["outputs"] = outputs;
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

int run_minimize(const CommonOpts& opts, std::size_t pieces, double mean, bool has_mean,
                 std::size_t refine, std::size_t seeds, double omega) {
  const nonlocal::Scenario s = resolve_scenario(opts);
  nonlocal::MinimizeOptions mo;
  mo.refine_rounds = refine;
  mo.seeds = seeds;
  mo.omega = omega;
  if (has_mean) mo.mean = mean;
  const nonlocal::ExactSet k = s.k;
  const nonlocal::Norm q = s.q;
  const double p = s.p;
  const nonlocal::Integrand rule([k, q, p](double x, double y) {
    return std::pow(nonlocal::distance(k, x, y, q), p);
  });
  const auto rep = nonlocal::minimize_discrete(rule, s.grid, pieces, mo);

  json summary;
  summary["operation"] = "minimize";
  summary["scenario"] = nonlocal::scenario_to_json(s);
  summary["pieces"] = rep.pieces;
  summary["best_value"] = rep.best_value;
  summary["best_field"] = field_json(rep.best_field);
  summary["lower_bound"] = rep.lower_bound;
  summary["diagonal_upper_bound"] = rep.diagonal_upper_bound;
  summary["exhaustive_sweep"] = rep.exhaustive;
  summary["evaluations"] = rep.evaluations;
  summary["refine_rounds"] = rep.refine_rounds;
  if (rep.mean_target) {
    summary["mean_target"] = *rep.mean_target;
    summary["mean_window"] = rep.mean_window;
    summary["mean_attained"] = rep.best_field.mean();
  }
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

json minhat_json(const nonlocal::MinhatReport& r) {
  return json{{"verdict", nonlocal::to_string(r.verdict)},
              {"min_w", r.min_w},
              {"min_w_hat", r.min_w_hat},
              {"min_w_hat_sc", r.min_w_hat_sc},
              {"sc_converged", r.sc_converged},
              {"tol", r.tol}};
}

json ness_json(const nonlocal::NessReport& r) {
  json diff = json::array();
  for (const auto& [i, j] : r.sample_diff) diff.push_back({i, j});
  return json{{"verdict", nonlocal::to_string(r.verdict)},
              {"min_w", r.min_w},
              {"min_w_hat", r.min_w_hat},
              {"lhs_nodes", r.lhs.count()},
              {"rhs_nodes", r.rhs.count()},
              {"pieces_route_nodes", r.rhs_pieces.count()},
              {"lhs_equals_rhs", r.lhs_equals_rhs},
              {"lhs_equals_pieces_route", r.lhs_equals_pieces},
              {"diff_cells", r.diff_cells},
              {"sample_diff", diff},
              {"sc_converged", r.sc_converged}};
}

int run_check(const CommonOpts& opts, const std::string& expect_minhat,
              const std::string& expect_ness) {
  auto validate_expect = [](const std::string& v, const char* flag) {
    if (!v.empty() && v != "holds" && v != "fails" && v != "not_applicable")
      throw std::invalid_argument(std::string(flag) +
                                  " must be holds, fails, or not_applicable");
  };
  validate_expect(expect_minhat, "--expect-minhat");
  validate_expect(expect_ness, "--expect-ness");

  const nonlocal::Scenario s = resolve_scenario(opts);
  const nonlocal::GridFunction w = nonlocal::scenario_integrand(s);
  const auto minhat = nonlocal::check_minhat_condition(w);
  const auto ness = nonlocal::check_ness_condition(w);

  json summary;
  summary["operation"] = "check";
  summary["scenario"] = nonlocal::scenario_to_json(s);
  summary["minhat"] = minhat_json(minhat);
  summary["ness"] = ness_json(ness);
  std::cout << summary.dump(2) << "\n";

  // Inapplicable verdicts are decided before any sweep runs, so only the
  // applicable ones can fail on convergence.
  const bool minhat_conv =
      minhat.verdict == nonlocal::Verdict::not_applicable || minhat.sc_converged;
  const bool ness_conv = ness.verdict == nonlocal::Verdict::not_applicable || ness.sc_converged;
  if (!minhat_conv || !ness_conv) return kNoConvergence;
  if (!expect_minhat.empty() && expect_minhat != nonlocal::to_string(minhat.verdict)) {
    std::cerr << "check: minhat condition is " << nonlocal::to_string(minhat.verdict)
              << ", expected " << expect_minhat << "\n";
    return kVerificationFailed;
  }
  if (!expect_ness.empty() && expect_ness != nonlocal::to_string(ness.verdict)) {
    std::cerr << "check: ness condition is " << nonlocal::to_string(ness.verdict)
              << ", expected " << expect_ness << "\n";
    return kVerificationFailed;
  }
  return kOk;
}

struct CheckLog {
  json checks = json::array();
  bool all_ok = true;
  bool convergence_ok = true;

  void record(const std::string& label, bool ok) {
    checks.push_back({{"check", label}, {"ok", ok}});
    std::cout << (ok ? "[ ok ] " : "[FAIL] ") << label << "\n";
    all_ok = all_ok && ok;
  }
};

void verify_four_well(CheckLog& log, json& detail) {
  const auto rep = nonlocal::verify_four_well();
  log.convergence_ok = log.convergence_ok && rep.minhat.sc_converged;
  log.record("four-well: min W = 0 and min W-hat = 1 exactly", rep.minima_exact);
  log.record("four-well: envelopes agree with W off the unit box", rep.outside_match);
  log.record("four-well: diagonal gap condition fails",
             rep.minhat.verdict == nonlocal::Verdict::fails);
  log.record("four-well: discrete minima stay positive", rep.positivity_margin > 0.0);
  log.record("four-well: sc-envelope minimum is 0 at the zero field",
             std::fabs(rep.sc_min_value) <= 1e-12 &&
                 std::fabs(rep.sc_min_field.at(0)) <= 1e-12);
  json minima = json::array();
  for (double v : rep.discrete_minima) minima.push_back(v);
  detail["four-well"] = {{"min_w", rep.min_w},
                         {"min_w_hat", rep.min_w_hat},
                         {"max_outside_diff_sc", rep.max_outside_diff_sc},
                         {"max_outside_diff_co", rep.max_outside_diff_co},
                         {"minhat", minhat_json(rep.minhat)},
                         {"discrete_minima", minima},
                         {"sc_min_value", rep.sc_min_value},
                         {"hat_formula_mismatch_cells", rep.hat_formula_mismatch_cells}};
}

void verify_five_point(CheckLog& log, json& detail) {
  const nonlocal::Scenario s = nonlocal::preset_scenario("five-point");
  const nonlocal::GridFunction w = nonlocal::scenario_integrand(s);
  const auto ness = nonlocal::check_ness_condition(w);
  const auto minhat = nonlocal::check_minhat_condition(w);
  log.convergence_ok = log.convergence_ok && ness.sc_converged;
  const std::size_t center = s.grid.nearest(0.0);
  const std::size_t two = s.grid.nearest(2.0);
  log.record("five-point: zero-level condition applies and fails",
             ness.verdict == nonlocal::Verdict::fails);
  log.record("five-point: left side contains the origin pair",
             ness.lhs.test(center, center));
  log.record("five-point: right side is exactly the isolated loop",
             ness.rhs.count() == 1 && ness.rhs.test(two, two));
  log.record("five-point: diagonal gap condition does not apply",
             minhat.verdict == nonlocal::Verdict::not_applicable);
  detail["five-point"] = {{"ness", ness_json(ness)}, {"minhat", minhat_json(minhat)}};
}

void verify_diamond(CheckLog& log, json& detail) {
  const nonlocal::Scenario s = nonlocal::preset_scenario("diamond-boundary");
  json gaps = json::array();
  const nonlocal::ScalarGrid value_grid(-3.0, 3.0, 49);
  for (double p : {1.0, 2.0}) {
    nonlocal::Scenario sp = s;
    sp.p = p;
    const nonlocal::GridFunction w = nonlocal::scenario_integrand(sp);
    const auto sc = nonlocal::separately_convex_envelope(w);
    const nonlocal::GridFunction co = nonlocal::convex_envelope(w);
    log.convergence_ok = log.convergence_ok && sc.converged;
    double max_diff = 0.0;
    for (std::size_t k = 0; k < w.values.size(); ++k)
      max_diff = std::max(max_diff, std::fabs(sc.value.values[k] - co.values[k]));
    log.record("diamond-boundary: sc-envelope matches convex envelope (p = " +
                   std::to_string(static_cast<int>(p)) + ")",
               max_diff <= 2.0 * sc.tol);
    for (std::size_t n = 1; n <= 3; ++n) {
      const auto gap = nonlocal::gap_experiment_diamond_boundary(p, n, value_grid);
      gaps.push_back({{"p", p},
                      {"pieces_per_region", n},
                      {"target", gap.target},
                      {"best", gap.best_value},
                      {"delta", gap.delta},
                      {"e11", gap.e11},
                      {"e22", gap.e22},
                      {"e12", gap.e12}});
      log.record("diamond-boundary: oscillation keeps a gap (p = " +
                     std::to_string(static_cast<int>(p)) + ", N = " + std::to_string(n) + ")",
                 gap.delta > 0.0);
      if (p == 1.0 && n == 1)
        log.record("diamond-boundary: two-piece minimum is exactly 1/2",
                   gap.best_value == 0.5 && gap.target == 0.25);
    }
  }
  detail["diamond-boundary"] = {{"gaps", gaps}};
}

void verify_cartesian(CheckLog& log, json& detail) {
  const nonlocal::Scenario s = nonlocal::preset_scenario("cartesian");
  const nonlocal::GridFunction w = nonlocal::scenario_integrand(s);
  const auto sc = nonlocal::separately_convex_envelope(w);
  const nonlocal::GridFunction co = nonlocal::convex_envelope(w);
  log.convergence_ok = log.convergence_ok && sc.converged;
  double max_diff = 0.0;
  for (std::size_t k = 0; k < w.values.size(); ++k)
    max_diff = std::max(max_diff, std::fabs(sc.value.values[k] - co.values[k]));
  log.record("cartesian: sc-envelope matches convex envelope", max_diff <= 2.0 * sc.tol);

  const nonlocal::PiecewiseConstantField v({0.5, -0.25, 2.0}, {0.25, 0.25, 0.5});
  bool identity = true;
  double worst = 0.0;
  json runs = json::array();
  for (std::size_t j : {std::size_t{1}, std::size_t{2}, std::size_t{4}, std::size_t{8}}) {
    const auto rec = nonlocal::recovery_sequence_cartesian(v, {-1.0, 1.0}, s.q, s.p, j);
    const double tol = 1e-12 * (1.0 + std::fabs(rec.sc_value));
    identity = identity && rec.error <= tol;
    worst = std::max(worst, rec.error);
    runs.push_back({{"j", j},
                    {"pieces", rec.field.pieces()},
                    {"value", rec.value},
                    {"sc_value", rec.sc_value},
                    {"error", rec.error}});
  }
  log.record("cartesian: oscillating fields attain the envelope integral", identity);
  detail["cartesian"] = {{"recovery", runs}, {"worst_error", worst}};
}

void verify_indicator(CheckLog& log, json& detail) {
  const nonlocal::Scenario s = nonlocal::preset_scenario("indicator");
  const nonlocal::GridSet zero = nonlocal::scenario_zero_set(s);
  const nonlocal::GridSet diag = nonlocal::diagonalize_set(zero);
  const nonlocal::GridSet runion = nonlocal::relaxed_cartesian_union(zero);

  const std::size_t lo = s.grid.nearest(-0.5);
  const std::size_t hi = s.grid.nearest(0.5);
  bool diag_ok = diag.count() == 4;
  for (std::size_t i : {lo, hi})
    for (std::size_t j : {lo, hi}) diag_ok = diag_ok && diag.test(i, j);
  log.record("indicator: diagonalized diamond is the four half-unit pairs", diag_ok);

  nonlocal::GridSet expected(s.grid);
  for (std::size_t i = lo; i <= hi; ++i)
    for (std::size_t j = lo; j <= hi; ++j) expected.set(i, j);
  log.record("indicator: relaxed union is the half-unit square", runion == expected);

  std::mt19937 rng(20240814u);
  std::uniform_int_distribution<std::size_t> pick_n(1, 4);
  std::uniform_int_distribution<std::size_t> pick_node(0, s.grid.n - 1);
  std::uniform_real_distribution<double> pick_frac(0.2, 1.0);
  bool agree = true;
  for (int trial = 0; trial < 100 && agree; ++trial) {
    const std::size_t m = pick_n(rng);
    std::vector<double> vals(m), fracs(m);
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      vals[k] = s.grid.coord(pick_node(rng));
      fracs[k] = pick_frac(rng);
      sum += fracs[k];
    }
    for (double& f : fracs) f /= sum;
    const nonlocal::PiecewiseConstantField u(vals, fracs);
    const bool via_pieces = nonlocal::eval_relaxed_indicator(zero, u).finite;
    bool via_mask = true;
    for (std::size_t a = 0; a < m && via_mask; ++a)
      for (std::size_t b = 0; b < m && via_mask; ++b)
        via_mask = runion.test(s.grid.nearest(vals[a]), s.grid.nearest(vals[b]));
    agree = via_pieces == via_mask;
  }
  log.record("indicator: piece membership matches pairwise square membership", agree);
  detail["indicator"] = {{"diagonalized_nodes", diag.count()},
                         {"relaxed_union_nodes", runion.count()}};
}

int run_verify(const std::string& preset, bool all) {
  std::vector<std::string> selected;
  if (all)
    selected = nonlocal::preset_names();
  else if (!preset.empty())
    selected = {preset};
  else
    throw std::invalid_argument("choose a suite with --preset or --all");

  CheckLog log;
  json detail;
  for (const std::string& name : selected) {
    if (name == "four-well")
      verify_four_well(log, detail);
    else if (name == "five-point")
      verify_five_point(log, detail);
    else if (name == "diamond-boundary")
      verify_diamond(log, detail);
    else if (name == "cartesian")
      verify_cartesian(log, detail);
    else if (name == "indicator")
      verify_indicator(log, detail);
    else
      throw std::invalid_argument("unknown preset \"" + name + "\"");
  }

  json summary;
  summary["operation"] = "verify";
  summary["suites"] = selected;
  summary["checks"] = log.checks;
  summary["detail"] = detail;
  summary["ok"] = log.all_ok;
  std::cout << summary.dump(2) << "\n";
  if (!log.convergence_ok) return kNoConvergence;
  return log.all_ok ? kOk : kVerificationFailed;
}

int run_export_plot(const std::string& in_file, const std::string& out_file) {
  std::ifstream is(in_file);
  if (!is) throw std::invalid_argument("cannot open input file " + in_file);
  const auto records = nonlocal::read_long_csv(is);
  if (out_file.empty() || out_file == "-") {
    nonlocal::write_gnuplot_blocks(std::cout, records);
  } else {
    write_artifact(fs::path(out_file).parent_path().string(),
                   fs::path(out_file).filename().string(),
                   [&](std::ostream& os) { nonlocal::write_gnuplot_blocks(os, records); });
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal double-integral relaxation toolkit"};
  app.require_subcommand(1);

  CommonOpts env_opts;
  std::size_t env_levels = 0;
  double env_tol = -1.0;
  std::size_t env_sweeps = 0;
  auto* cmd_envelope =
      app.add_subcommand("envelope", "compute convex, separately convex, and level envelopes");
  add_scenario_options(cmd_envelope, env_opts);
  cmd_envelope->add_option("--levels", env_levels,
                           "also compute the level-convex envelope with this many levels");
  cmd_envelope->add_option("--tol", env_tol, "sweep stopping tolerance (default: scaled 1e-9)");
  cmd_envelope->add_option("--max-sweeps", env_sweeps, "sweep cap (default: 10n)");

  CommonOpts set_opts;
  auto* cmd_sets =
      app.add_subcommand("sets", "diagonalize the target set and enumerate Cartesian pieces");
  add_scenario_options(cmd_sets, set_opts);

  CommonOpts min_opts;
  std::size_t min_pieces = 1;
  double min_mean = 0.0;
  std::size_t min_refine = 2;
  std::size_t min_seeds = 8;
  double min_omega = 1.0;
  auto* cmd_minimize =
      app.add_subcommand("minimize", "minimize the double integral over piecewise constant fields");
  add_scenario_options(cmd_minimize, min_opts, false);
  cmd_minimize->add_option("-N,--pieces", min_pieces, "number of equal-fraction pieces");
  auto* mean_opt =
      cmd_minimize->add_option("--mean", min_mean, "constrain the field mean to this value");
  cmd_minimize->add_option("--refine", min_refine, "step-halving rounds after the sweep");
  cmd_minimize->add_option("--seeds", min_seeds, "descent starts kept from the sweep");
  cmd_minimize->add_option("--omega", min_omega, "domain measure");

  CommonOpts check_opts;
  std::string expect_minhat, expect_ness;
  auto* cmd_check =
      app.add_subcommand("check", "evaluate the diagonal-gap and zero-level necessary conditions");
  add_scenario_options(cmd_check, check_opts, false);
  cmd_check->add_option("--expect-minhat", expect_minhat,
                        "fail unless the diagonal-gap verdict matches");
  cmd_check->add_option("--expect-ness", expect_ness,
                        "fail unless the zero-level verdict matches");

  std::string verify_preset;
  bool verify_all = false;
  auto* cmd_verify = app.add_subcommand("verify", "run the built-in verification suites");
  cmd_verify->add_option("--preset", verify_preset, "suite to run");
  cmd_verify->add_flag("--all", verify_all, "run every suite");
  int verify_threads = 0;
  cmd_verify->add_option("--threads", verify_threads, "worker thread count");

  std::string plot_in, plot_out;
  auto* cmd_plot =
      app.add_subcommand("export-plot", "convert a long-form CSV into gnuplot blocks");
  cmd_plot->add_option("-i,--in", plot_in, "input CSV (header xi,zeta,value)")->required();
  cmd_plot->add_option("-o,--out", plot_out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*cmd_envelope) return run_envelope(env_opts, env_levels, env_tol, env_sweeps);
    if (*cmd_sets) return run_sets(set_opts);
    if (*cmd_minimize)
      return run_minimize(min_opts, min_pieces, min_mean, mean_opt->count() > 0, min_refine,
                          min_seeds, min_omega);
    if (*cmd_check) return run_check(check_opts, expect_minhat, expect_ness);
    if (*cmd_verify) {
      if (verify_threads > 0)
        setenv("NONLOCAL_RELAX_THREADS", std::to_string(verify_threads).c_str(), 1);
      return run_verify(verify_preset, verify_all);
    }
    if (*cmd_plot) return run_export_plot(plot_in, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}
