#include "optomech/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "optomech/axis.hpp"
#include "optomech/config.hpp"
#include "optomech/correlation.hpp"
#include "optomech/io.hpp"
#include "optomech/sde.hpp"
#include "optomech/stability.hpp"
#include "optomech/verify.hpp"

namespace optomech {
namespace {

using nlohmann::json;
using io::format_number;

std::string b2s(bool v) { return v ? "true" : "false"; }
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Every value-taking flag is also a config key; flags override the file.
class Options {
 public:
  void add(CLI::App& app, const std::string& key, const std::string& help) {
    std::string names = "--" + key;
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (dashed != key) names += ",--" + dashed;
    app.add_option(names, values_[key], help);
    keys_.push_back(key);
  }

  void add_flag(CLI::App& app, const std::string& key, const std::string& help) {
    std::string names = "--" + key;
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (dashed != key) names += ",--" + dashed;
    app.add_flag(names, flags_[key], help);
    keys_.push_back(key);
  }

  KeyValueConfig merged(const std::optional<std::string>& config_path) const {
    KeyValueConfig cfg = config_path ? KeyValueConfig::load(*config_path) : KeyValueConfig{};
    for (const auto& [key, value] : values_) {
      if (value) cfg.set(key, *value);
    }
    for (const auto& [key, set] : flags_) {
      if (set) cfg.set(key, "true");
    }
    std::vector<std::string> known = keys_;
    for (const char* extra : {"cavity_length", "mirror_mass", "hbar"}) known.emplace_back(extra);
    cfg.require_known(known);
    return cfg;
  }

 private:
  std::map<std::string, std::optional<std::string>> values_;
  std::map<std::string, bool> flags_;
  std::vector<std::string> keys_;
};

struct Output {
  std::string format = "csv";
  std::optional<std::string> path;
  bool reproducible = false;
};

Output output_settings(const KeyValueConfig& cfg) {
  Output o;
  o.format = cfg.string("format").value_or("csv");
  if (o.format != "csv" && o.format != "json") {
    throw ConfigError("format must be 'csv' or 'json'");
  }
  o.path = cfg.string("out");
  o.reproducible = cfg.boolean("reproducible").value_or(false);
  return o;
}

void stamp(json& doc, const Output& o) {
  if (o.reproducible) return;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  doc["generated_at"] = s.str();
}

void emit(const Output& o, const std::string& content, std::ostream& out) {
  if (o.path) {
    io::write_atomic(*o.path, content);
  } else {
    out << content;
  }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

unsigned threads_of(const KeyValueConfig& cfg) {
  return static_cast<unsigned>(cfg.integer("threads").value_or(0));
}

int cmd_steady(const KeyValueConfig& cfg, std::ostream& out) {
  const Output o = output_settings(cfg);
  const ModelParams p = model_params_from(cfg);
  const bool printed = cfg.boolean("eq19_as_printed").value_or(false);
  const auto states = cavity_steady_states(p);

  if (o.format == "csv") {
    std::vector<std::string> header = {"branch_id", "n", "re_alpha0", "im_alpha0",
                                       "re_l1", "im_l1", "re_l2", "im_l2",
                                       "stable", "margin", "disc_derived"};
    if (printed) {
      header.emplace_back("disc_printed");
      header.emplace_back("eq19_printed_stable");
    }
    std::string text = io::csv_line(header);
    for (const auto& s : states) {
      const SpectrumReport r = classify(s, p);
      const ClosedFormDiscriminant d = closed_form_discriminant(s, p);
      std::vector<std::string> row = {
          std::to_string(s.branch_id), format_number(s.n),
          format_number(s.alpha0.real()), format_number(s.alpha0.imag()),
          format_number(r.lambda1.real()), format_number(r.lambda1.imag()),
          format_number(r.lambda2.real()), format_number(r.lambda2.imag()),
          b2s(r.stable), format_number(r.margin), format_number(d.derived)};
      if (printed) {
        row.push_back(format_number(d.printed));
        row.push_back(b2s(closed_form_stable(p.gamma1(), d.printed)));
      }
      text += io::csv_line(row);
    }
    emit(o, text, out);
    return kExitOk;
  }

  json doc = {{"schema_version", kSchemaVersion}, {"command", "steady"},
              {"parameters", params_json(p)}};
  json rows = json::array();
  for (const auto& s : states) {
    const SpectrumReport r = classify(s, p);
    const ClosedFormDiscriminant d = closed_form_discriminant(s, p);
    json row = {{"branch_id", s.branch_id},
                {"n", s.n},
                {"alpha0", {s.alpha0.real(), s.alpha0.imag()}},
                {"mirror_alpha2", {s.mirror_alpha2.real(), s.mirror_alpha2.imag()}},
                {"lambda1", {r.lambda1.real(), r.lambda1.imag()}},
                {"lambda2", {r.lambda2.real(), r.lambda2.imag()}},
                {"stable", r.stable},
                {"margin", r.margin},
                {"disc_derived", d.derived}};
    if (printed) {
      row["disc_printed"] = d.printed;
      row["eq19_printed_stable"] = closed_form_stable(p.gamma1(), d.printed);
    }
    rows.push_back(row);
  }
  doc["branches"] = rows;
  stamp(doc, o);
  emit(o, dump(doc), out);
  return kExitOk;
}

int cmd_stability_map(const KeyValueConfig& cfg, std::ostream& out) {
  const Output o = output_settings(cfg);
  const ModelParams p = model_params_from(cfg);
  const auto a1 = cfg.string("axis1");
  const auto a2 = cfg.string("axis2");
  if (!a1 || !a2) throw ConfigError("stability-map needs --axis1 and --axis2");
  const StabilityMap map =
      stability_map(p, AxisSpec::parse(*a1), AxisSpec::parse(*a2), threads_of(cfg));

  if (o.format == "csv") {
    std::string text = io::csv_line({"axis1", "axis2", "branch_id", "n", "re_l1", "im_l1",
                                     "re_l2", "im_l2", "stable"});
    for (const auto& r : map.rows) {
      text += io::csv_line({format_number(r.axis1), format_number(r.axis2),
                            std::to_string(r.steady.branch_id), format_number(r.steady.n),
                            format_number(r.spectrum.lambda1.real()),
                            format_number(r.spectrum.lambda1.imag()),
                            format_number(r.spectrum.lambda2.real()),
                            format_number(r.spectrum.lambda2.imag()), b2s(r.spectrum.stable)});
    }
    emit(o, text, out);
    return kExitOk;
  }
  json rows = json::array();
  for (const auto& r : map.rows) {
    rows.push_back({{"axis1", r.axis1},
                    {"axis2", r.axis2},
                    {"branch_id", r.steady.branch_id},
                    {"n", r.steady.n},
                    {"re_l1", r.spectrum.lambda1.real()},
                    {"im_l1", r.spectrum.lambda1.imag()},
                    {"re_l2", r.spectrum.lambda2.real()},
                    {"im_l2", r.spectrum.lambda2.imag()},
                    {"stable", r.spectrum.stable}});
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"command", "stability-map"},
              {"parameters", params_json(p)},
              {"axis1", map.axis1.field},
              {"axis2", map.axis2.field},
              {"branch_count", map.branch_count},
              {"rows", rows}};
  stamp(doc, o);
  emit(o, dump(doc), out);
  return kExitOk;
}

int cmd_g2(const KeyValueConfig& cfg, std::ostream& out) {
  const Output o = output_settings(cfg);
  const ModelParams p = model_params_from(cfg);
  const ExpansionMode mode = parse_expansion_mode(cfg.string("mode").value_or("paper"));
  const AxisSpec axis = cfg.string("axis") ? AxisSpec::parse(*cfg.string("axis"))
                                           : AxisSpec::single("drive_abs", std::abs(p.drive()));
  const auto rows = g2_sweep(p, axis, mode, threads_of(cfg));

  if (o.format == "csv") {
    std::string text = io::csv_line({"axis_value", "branch_id", "n", "stable", "g2_cov_paper",
                                     "g2_cov_corrected", "g2_eq26", "excess_term",
                                     "antibunched"});
    for (const auto& row : rows) {
      const G2Report& r = row.report;
      text += io::csv_line({format_number(row.axis_value), std::to_string(r.branch_id),
                            format_number(r.n), b2s(r.stable), format_number(r.g2_cov_paper),
                            format_number(r.g2_cov_corrected), format_number(r.g2_closed_form),
                            format_number(r.excess_term), b2s(r.antibunched)});
    }
    emit(o, text, out);
    return kExitOk;
  }
  json items = json::array();
  for (const auto& row : rows) {
    const G2Report& r = row.report;
    items.push_back({{"axis_value", row.axis_value},
                     {"branch_id", r.branch_id},
                     {"n", r.n},
                     {"stable", r.stable},
                     {"status", to_string(r.status)},
                     {"g2_cov_paper", finite_or_null(r.g2_cov_paper)},
                     {"g2_cov_corrected", finite_or_null(r.g2_cov_corrected)},
                     {"g2_eq26", finite_or_null(r.g2_closed_form)},
                     {"excess_term", finite_or_null(r.excess_term)},
                     {"antibunched", r.antibunched}});
  }
  json doc = {{"schema_version", kSchemaVersion}, {"command", "g2"},
              {"parameters", params_json(p)},    {"axis", axis.field},
              {"mode", to_string(mode)},         {"rows", items}};
  stamp(doc, o);
  emit(o, dump(doc), out);
  return kExitOk;
}

IntegratorConfig integrator_from(const KeyValueConfig& cfg, const ModelParams& p) {
  const int branch = static_cast<int>(cfg.integer("branch").value_or(-1));
  IntegratorConfig c = default_integrator(p, branch);
  c.dt = cfg.number("dt").value_or(c.dt);
  c.t_end = cfg.number("t_end").value_or(c.t_end);
  c.n_traj = cfg.integer("n_traj").value_or(c.n_traj);
  const long long seed = cfg.integer("seed").value_or(1);
  if (seed < 0) throw ConfigError("seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.divergence_cutoff = cfg.number("cutoff").value_or(0.0);
  c.max_discard_fraction = cfg.number("max_discard").value_or(c.max_discard_fraction);
  c.batches = static_cast<int>(cfg.integer("batches").value_or(c.batches));
  c.threads = threads_of(cfg);
  c.noise = !cfg.boolean("no_noise").value_or(false);
  const std::string init = cfg.string("init").value_or("steady");
  if (init == "steady") {
    c.initial = InitialCondition::kSteady;
  } else if (init == "vacuum") {
    c.initial = InitialCondition::kVacuum;
  } else {
    throw ConfigError("init must be 'steady' or 'vacuum'");
  }
  c.validate();
  return c;
}

json stats_json(const EnsembleStats& st) {
  json batches = json::array();
  for (const auto& b : st.batches) {
    batches.push_back({{"kept", b.kept},
                       {"alpha", {b.alpha.real(), b.alpha.imag()}},
                       {"n", {b.n.real(), b.n.imag()}},
                       {"n2", {b.n2.real(), b.n2.imag()}}});
  }
  json j = {
      {"trajectory_count", st.trajectory_count},
      {"discarded_count", st.discarded_count},
      {"discard_fraction", st.discard_fraction()},
      {"first_divergence_time",
       st.first_divergence_time ? json(*st.first_divergence_time) : json(nullptr)},
      {"mean_alpha", {{"re", st.mean_alpha.real()}, {"im", st.mean_alpha.imag()},
                      {"se_re", st.se_alpha_re}, {"se_im", st.se_alpha_im}}},
      {"mean_n", {{"re", st.mean_n.real()}, {"im", st.mean_n.imag()}, {"se", st.se_n}}},
      {"mean_n2", {{"re", st.mean_n2.real()}, {"im", st.mean_n2.imag()}, {"se", st.se_n2}}},
      {"g2_estimate", st.g2_estimate ? json(*st.g2_estimate) : json(nullptr)},
      {"g2_se", st.g2_se ? json(*st.g2_se) : json(nullptr)},
      {"batch_count", st.batches.size()},
      {"batches", batches},
  };
  return j;
}

int cmd_simulate(const KeyValueConfig& cfg, std::ostream& out, std::ostream& err) {
  Output o = output_settings(cfg);
  const ModelParams p = model_params_from(cfg);
  const SystemKind system = parse_system_kind(cfg.string("system").value_or("reduced"));
  IntegratorConfig c = integrator_from(cfg, p);
  const auto dump_path = cfg.string("dump_traces");
  if (dump_path) {
    c.trace_trajectories = static_cast<int>(cfg.integer("trace_trajectories").value_or(16));
    c.trace_stride = cfg.integer("trace_stride").value_or(
        std::max<long long>(1, std::llround(c.t_end / c.dt) / 10000));
  }
  EnsembleStats st;
  try {
    st = simulate(p, c, system);
  } catch (const SimulationError& e) {
    err << "simulation quality failure: " << e.what() << "\n";
    return kExitSimulation;
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"command", "simulate"},
              {"parameters", params_json(p)},
              {"config",
               {{"system", to_string(system)},
                {"dt", c.dt},
                {"t_end", c.t_end},
                {"n_traj", c.n_traj},
                {"seed", c.seed},
                {"cutoff", c.effective_cutoff(p)},
                {"max_discard", c.max_discard_fraction},
                {"batches", c.batches},
                {"branch", c.branch},
                {"init", c.initial == InitialCondition::kSteady ? "steady" : "vacuum"},
                {"noise", c.noise},
                {"scheme", "euler-maruyama-ito"},
                {"burn_in", c.t_end / 2.0}}},
              {"stats", stats_json(st)}};
  if (dump_path) {
    io::write_atomic(*dump_path, io::encode_traces(st.traces));
    doc["traces"] = {{"path", *dump_path},
                     {"trajectories", st.traces.paths.size()},
                     {"var_count", st.traces.var_count},
                     {"step_count", st.traces.step_count}};
  }
  stamp(doc, o);
  emit(o, dump(doc), out);
  return kExitOk;
}

int cmd_verify(const KeyValueConfig& cfg, std::ostream& out) {
  Output o = output_settings(cfg);
  const ModelParams p = model_params_from(cfg);
  VerifyOptions opt;
  opt.branch = static_cast<int>(cfg.integer("branch").value_or(-1));
  opt.run_mc = !cfg.boolean("no_mc").value_or(false);
  opt.mc_system = parse_system_kind(cfg.string("system").value_or("reduced"));
  if (opt.run_mc) {
    opt.mc = integrator_from(cfg, p);
    if (!cfg.contains("n_traj")) opt.mc.n_traj = 2000;
  }
  json doc = verify_report(p, opt);
  stamp(doc, o);
  emit(o, dump(doc), out);
  return doc["checks"]["closed_form_vs_lyapunov"]["pass"].get<bool>() ? kExitOk
                                                                       : kExitNumerical;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Driven cavity with a heavily damped mirror: steady states, stability, "
               "fluctuations, g2(0) and positive-P Monte Carlo"};
  app.name("optomech");
  app.require_subcommand(1);
  Options opts;
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "flat key = value parameter file");
  opts.add(app, "format", "csv | json");
  opts.add(app, "out", "output path (written atomically); default stdout");
  opts.add_flag(app, "reproducible", "omit the timestamp from JSON output");
  opts.add(app, "seed", "random seed");
  opts.add(app, "threads", "worker threads (0 = all cores)");
  for (const char* key : {"omega_c", "omega_m", "g", "gamma1", "gamma2", "drive_re", "drive_im",
                          "cavity_length", "mirror_mass", "hbar"}) {
    opts.add(app, key, "model parameter");
  }
  opts.add_flag(app, "coupling_sqrt", "derive g with the square-root zero-point form");

  auto* steady = app.add_subcommand("steady", "steady states and their stability");
  opts.add_flag(*steady, "eq19_as_printed", "add the published closed-form discriminant");

  auto* smap = app.add_subcommand("stability-map", "classify branches over a 2D grid");
  opts.add(*smap, "axis1", "field:start:stop:count[:log]");
  opts.add(*smap, "axis2", "field:start:stop:count[:log]");

  auto* g2 = app.add_subcommand("g2", "g2(0) per branch, optionally swept over one axis");
  opts.add(*g2, "axis", "field:start:stop:count[:log]");
  opts.add(*g2, "mode", "paper | corrected (expansion used for the antibunched flag)");

  auto* sim = app.add_subcommand("simulate", "positive-P Monte Carlo ensemble");
  auto* ver = app.add_subcommand("verify", "cross-validate the analytic routes");
  for (CLI::App* sub : {sim, ver}) {
    opts.add(*sub, "system", "full | reduced");
    opts.add(*sub, "dt", "time step");
    opts.add(*sub, "t_end", "horizon; moments averaged over [t_end/2, t_end]");
    opts.add(*sub, "n_traj", "trajectory count");
    opts.add(*sub, "cutoff", "divergence cutoff (default 1e6 max(1, |E|/gamma1))");
    opts.add(*sub, "max_discard", "maximum discarded fraction (default 0.01)");
    opts.add(*sub, "batches", "batches for standard errors (default 20)");
    opts.add(*sub, "branch", "steady branch index to start from");
    opts.add(*sub, "init", "steady | vacuum");
    opts.add_flag(*sub, "no_noise", "integrate the deterministic drift only");
  }
  opts.add(*sim, "dump_traces", "write trajectory traces to this binary file");
  opts.add(*sim, "trace_trajectories", "number of traced trajectories (default 16)");
  opts.add(*sim, "trace_stride", "record every k-th step");
  opts.add_flag(*ver, "no_mc", "skip the Monte Carlo comparison");

  for (CLI::App* sub : {steady, smap, g2, sim, ver}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const KeyValueConfig cfg = opts.merged(config_path);
    if (steady->parsed()) return cmd_steady(cfg, out);
    if (smap->parsed()) return cmd_stability_map(cfg, out);
    if (g2->parsed()) return cmd_g2(cfg, out);
    if (sim->parsed()) return cmd_simulate(cfg, out, err);
    if (ver->parsed()) return cmd_verify(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SimulationError& e) {
    err << "simulation quality failure: " << e.what() << "\n";
    return kExitSimulation;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace optomech
