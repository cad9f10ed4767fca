// rdsi: command-line front end for the rate-distortion solvers and the
// Gaussian binning simulation. See README.md for the file formats.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "instance_io.hpp"
#include "rdsi/caratheodory.hpp"
#include "rdsi/discrete_model.hpp"
#include "rdsi/discrete_solver.hpp"
#include "rdsi/extended_solver.hpp"
#include "rdsi/gaussian.hpp"
#include "rdsi/sphere_sim.hpp"

namespace {

using namespace rdsi;
using io::Json;
using io::jnum;

struct Manifest {
  std::string subcommand;
  std::string input;
  std::string output;
  std::uint64_t seed = 0;
  std::vector<std::string> config;
  std::string format;  // empty: subcommand default
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse: return 2;
    case ErrorKind::domain:
    case ErrorKind::assumption:
    case ErrorKind::dimension: return 3;
    case ErrorKind::infeasible: return 4;
    case ErrorKind::resource_cap: return 5;
    case ErrorKind::numerical: return 1;
  }
  return 1;
}

const std::vector<std::string> kSolverKeys = {"z_size", "threads", "enumeration_cap", "inner_tolerance",
                                              "inner_max_iters"};

std::vector<std::string> keys(std::vector<std::string> extra, bool solver = true) {
  if (solver) extra.insert(extra.end(), kSolverKeys.begin(), kSolverKeys.end());
  return extra;
}

std::string scalar_string(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return io::fmt(v.get<double>());
  return v.dump();
}

/// Config pairs from the input's "config" object (or the whole object for
/// parameter-only subcommands), followed by the command-line overrides.
std::vector<std::string> merged_pairs(const Json* j, const Manifest& m) {
  std::vector<std::string> pairs;
  if (j && j->is_object()) {
    for (const auto& [k, v] : j->items()) {
      std::string value;
      if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) value += (i ? "," : "") + scalar_string(v[i]);
      } else if (v.is_primitive()) {
        value = scalar_string(v);
      } else {
        fail(ErrorKind::parse, "config entry '" + k + "' must be a value or a list");
      }
      pairs.push_back(k + "=" + value);
    }
  }
  pairs.insert(pairs.end(), m.config.begin(), m.config.end());
  return pairs;
}

io::Config instance_config(const Json& inst, const Manifest& m, std::vector<std::string> allowed) {
  const Json* c = inst.contains("config") ? &inst.at("config") : nullptr;
  return io::Config(merged_pairs(c, m), std::move(allowed));
}

SolveConfig solver_config(const io::Config& c) {
  SolveConfig s;
  if (auto v = c.integer("z_size")) s.z_size = static_cast<int>(*v);
  if (auto v = c.integer("threads")) s.threads = static_cast<int>(*v);
  if (auto v = c.integer("enumeration_cap")) s.enumeration_cap = *v;
  if (auto v = c.real("inner_tolerance")) s.inner_tolerance = *v;
  if (auto v = c.integer("inner_max_iters")) s.inner_max_iters = static_cast<int>(*v);
  s.validate();
  return s;
}

double required(const io::Config& c, const std::string& key) {
  const auto v = c.real(key);
  if (!v) fail(ErrorKind::parse, "missing config value '" + key + "'");
  return *v;
}

Json config_echo(const io::Config& c, const std::vector<std::string>& allowed) {
  Json out = Json::object();
  for (const std::string& k : allowed)
    if (c.has(k)) out[k] = c.raw(k);
  return out;
}


class Writer {
 public:
  explicit Writer(const Manifest& m) : m_(m) {}

  void emit(const std::string& text) const {
    if (m_.output.empty() || m_.output == "-") {
      std::cout << text;
      std::cout.flush();
      return;
    }
    std::ofstream out(m_.output, std::ios::binary);
    if (!out) fail(ErrorKind::parse, "cannot write output file '" + m_.output + "'");
    out << text;
  }

  Json envelope(const Json& config) const {
    Json j = Json::object();
    j["spec_version"] = io::kSpecVersion;
    j["subcommand"] = m_.subcommand;
    j["seed"] = m_.seed;
    j["config"] = config;
    return j;
  }

  void report(const std::string& default_format, const Json& config, const Json& body) const {
    const std::string f = format(default_format);
    Json j = envelope(config);
    for (const auto& [k, v] : body.items()) j[k] = v;
    if (f == "json") {
      emit(j.dump(2) + "\n");
      return;
    }
    io::Table t;
    t.rows.emplace_back();
    for (const auto& [k, v] : j.items()) {
      if (!v.is_primitive()) continue;
      t.columns.push_back(k);
      t.rows.back().push_back(v);
    }
    emit(t.csv());
  }

  void table(const std::string& default_format, const Json& config, io::Table t,
             bool add_seed = true) const {
    const std::string f = format(default_format);
    if (add_seed) {
      t.columns.push_back("seed");
      for (auto& row : t.rows) row.push_back(m_.seed);
    }
    if (f == "csv") {
      emit(t.csv());
      return;
    }
    Json j = envelope(config);
    j["rows"] = t.json();
    emit(j.dump(2) + "\n");
  }

 private:
  std::string format(const std::string& def) const { return m_.format.empty() ? def : m_.format; }

  const Manifest& m_;
};

Json channel_json(const TestChannel& ch) {
  return Json{{"z_size", ch.z_size()},
              {"pz_given_x", io::matrix_json(ch.pz_given_x)},
              {"phi", io::table_json(ch.phi)},
              {"psi", io::table_json(ch.psi)}};
}

Json rate_point_json(const RatePoint& r) {
  return Json{{"rate", jnum(r.rate)},
              {"status", std::string(to_string(r.status))},
              {"dd_target", jnum(r.dd_target)},
              {"de_target", jnum(r.de_target)},
              {"achieved_dd", jnum(r.achieved_dd)},
              {"achieved_de", jnum(r.achieved_de)},
              {"z_size", r.z_size},
              {"upper_bound", r.upper_bound},
              {"gap", jnum(r.gap)},
              {"iterations", r.iterations},
              {"candidates", r.candidates},
              {"feasible_candidates", r.feasible_candidates},
              {"witness", channel_json(r.witness)}};
}

Json load_input(const Manifest& m, bool required_input) {
  if (m.input.empty()) {
    if (required_input) fail(ErrorKind::parse, m.subcommand + " needs --input");
    return Json::object();
  }
  return io::read_json(m.input);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_discrete_solve(const Manifest& m) {
  const Json inst = load_input(m, true);
  const auto allowed = keys({"dd", "de"});
  const io::Config c = instance_config(inst, m, allowed);
  const io::BaseInstance b = io::parse_base(inst);
  const SolveConfig cfg = solver_config(c);
  const double dd = required(c, "dd");
  const double de = c.real("de").value_or(std::numeric_limits<double>::infinity());
  const RatePoint r = solve_rate(b.src, b.spec(), dd, de, cfg);
  Writer(m).report("json", config_echo(c, allowed), rate_point_json(r));
  return 0;
}

int cmd_discrete_sweep(const Manifest& m) {
  const Json inst = load_input(m, true);
  const auto allowed = keys({"dd", "de"});
  const io::Config c = instance_config(inst, m, allowed);
  const io::BaseInstance b = io::parse_base(inst);
  const SolveConfig cfg = solver_config(c);
  const auto dd = c.list("dd"), de = c.list("de");
  if (!dd || !de) fail(ErrorKind::parse, "discrete-sweep needs config lists dd and de");
  const SweepGrid g = tradeoff_sweep(b.src, b.spec(), *dd, *de, cfg);
  io::Table t;
  t.columns = {"dd", "de", "rate", "achieved_dd", "achieved_de", "status", "error"};
  for (std::size_t i = 0; i < dd->size(); ++i)
    for (std::size_t j = 0; j < de->size(); ++j) {
      const SweepCell& cell = g[i][j];
      if (cell.point) {
        const RatePoint& r = *cell.point;
        t.rows.push_back({jnum((*dd)[i]), jnum((*de)[j]), jnum(r.rate), jnum(r.achieved_dd),
                          jnum(r.achieved_de), std::string(to_string(r.status)), ""});
      } else {
        t.rows.push_back({jnum((*dd)[i]), jnum((*de)[j]), nullptr, nullptr, nullptr,
                          std::string(to_string(*cell.error_kind)), cell.error});
      }
    }
  Writer(m).table("csv", config_echo(c, allowed), std::move(t));
  return 0;
}

int cmd_single_constraint(const Manifest& m, bool common) {
  const Json inst = load_input(m, true);
  const auto allowed = keys({"dd", "de"});  // de is accepted and ignored
  const io::Config c = instance_config(inst, m, allowed);
  const io::BaseInstance b = io::parse_base(inst);
  const SolveConfig cfg = solver_config(c);
  const auto dd = c.list("dd");
  if (!dd) fail(ErrorKind::parse, m.subcommand + " needs config value(s) dd");
  io::Table t;
  t.columns = {"dd", "rate", "achieved_dd", "z_size", "status", "error"};
  for (double d : *dd) {
    try {
      const RatePoint r = common ? r_cr(b.src, b.dd, d, cfg) : r_wz(b.src, b.dd, d, cfg);
      t.rows.push_back({jnum(d), jnum(r.rate), jnum(r.achieved_dd), r.z_size,
                        std::string(to_string(r.status)), ""});
    } catch (const Error& e) {
      if (dd->size() == 1) throw;
      t.rows.push_back({jnum(d), nullptr, nullptr, nullptr, std::string(to_string(e.kind())), e.what()});
    }
  }
  Writer(m).table("csv", config_echo(c, allowed), std::move(t));
  return 0;
}

int cmd_gaussian_curve(const Manifest& m) {
  const Json in = load_input(m, false);
  const std::vector<std::string> allowed = {"var_x", "var_u", "dd", "de"};
  const io::Config c(merged_pairs(&in, m), allowed);
  const double var_x = c.real("var_x").value_or(1.0), var_u = c.real("var_u").value_or(1.0);
  const auto dd = c.list("dd");
  const std::vector<double> de = c.list("de").value_or(std::vector<double>{0.0});
  if (!dd) fail(ErrorKind::parse, "gaussian-curve needs config value(s) dd");
  GaussianProblem{var_x, var_u, 1.0, 0.0}.validate();
  io::Table t;
  t.columns = {"dd", "de", "case_id", "r_gaussian", "r_wz", "r_cr", "a", "b", "var_w", "error"};
  for (double d : *dd)
    for (double e : de) {
      try {
        const GaussianProblem p{var_x, var_u, d, e};
        const int cid = classify_case(p);
        std::vector<Json> row = {jnum(d), jnum(e), cid, jnum(r_gaussian(p)), jnum(r_wz_gaussian(var_x, var_u, d)),
                                 jnum(r_cr_gaussian(var_x, var_u, d))};
        const Scheme s = scheme_params(p);
        if (const auto* sp = std::get_if<SchemeParams>(&s))
          row.insert(row.end(), {jnum(sp->a), jnum(sp->b), jnum(sp->var_w)});
        else
          row.insert(row.end(), {nullptr, nullptr, nullptr});
        row.push_back("");
        t.rows.push_back(std::move(row));
      } catch (const Error& err) {
        t.rows.push_back({jnum(d), jnum(e), nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                          std::string(to_string(err.kind())) + ": " + err.what()});
      }
    }
  Writer(m).table("csv", config_echo(c, allowed), std::move(t));
  return 0;
}

int cmd_sphere_sim(const Manifest& m) {
  const Json in = load_input(m, false);
  const std::vector<std::string> allowed = {"var_x", "var_u", "dd",     "de",     "a",
                                            "b",     "var_w", "delta",  "epsilon", "trials",
                                            "n",     "threads", "codeword_cap"};
  const io::Config c(merged_pairs(&in, m), allowed);
  SimConfig base;
  base.var_x = c.real("var_x").value_or(1.0);
  base.var_u = c.real("var_u").value_or(1.0);
  if (c.has("a") || c.has("b") || c.has("var_w")) {
    base.params.a = required(c, "a");
    base.params.b = required(c, "b");
    base.params.var_w = required(c, "var_w");
  } else {
    base.params = coding_params(
        GaussianProblem{base.var_x, base.var_u, c.real("dd").value_or(0.25), c.real("de").value_or(0.0625)});
  }
  base.delta = c.real("delta").value_or(0.1);
  base.epsilon = c.real("epsilon").value_or(0.0);
  base.trials = static_cast<int>(c.integer("trials").value_or(200));
  base.threads = static_cast<int>(c.integer("threads").value_or(1));
  base.seed = m.seed;
  const long cap = c.integer("codeword_cap").value_or(1L << 20);
  require(cap >= 1, ErrorKind::domain, "codeword_cap must be positive");
  base.codeword_cap = static_cast<std::size_t>(cap);

  std::vector<int> ns;
  const std::string n_raw = c.has("n") ? c.raw("n") : "auto";
  std::istringstream list(n_raw);
  for (std::string item; std::getline(list, item, ',');) {
    if (item == "auto") {
      const int n = largest_feasible_n(scheme_rates(base.params, base.var_x, base.var_u).r_prime, base.codeword_cap);
      require(n >= 2, ErrorKind::resource_cap, "no blocklength fits within codeword_cap");
      ns.push_back(n);
    } else {
      ns.push_back(static_cast<int>(io::parse_long(item, "n")));
    }
  }
  if (ns.empty()) fail(ErrorKind::parse, "empty list for n");

  io::Table t;
  t.columns = {"n",           "trials",       "seed",         "a",        "b",        "var_w",
               "delta",       "epsilon",      "rate_nominal", "empirical_dd", "empirical_de", "freq_src",
               "freq_enc",    "freq_dec1",    "freq_dec2",    "freq_any"};
  for (int n : ns) {
    SimConfig cfg = base;
    cfg.n = n;
    validate(cfg);
    const SimResult r = run_simulation(cfg);
    t.rows.push_back({r.n, r.trials_run, m.seed, jnum(cfg.params.a), jnum(cfg.params.b), jnum(cfg.params.var_w),
                      jnum(cfg.delta), jnum(r.epsilon), jnum(r.rate_nominal), jnum(r.empirical_dd),
                      jnum(r.empirical_de), jnum(r.freq_src), jnum(r.freq_enc), jnum(r.freq_dec1),
                      jnum(r.freq_dec2), jnum(r.freq_any)});
  }
  Writer(m).table("csv", config_echo(c, allowed), std::move(t), false);
  return 0;
}

io::ExtInstance extended_input(const Json& inst, const io::Config& c) {
  if (inst.contains("dk")) {
    io::ExtInstance e = io::parse_extended(inst);
    if (auto t = c.list("targets")) e.ext.targets = *t;
    if (e.ext.targets.empty()) fail(ErrorKind::parse, "extended instance needs targets");
    return e;
  }
  // A base instance: embed its two constraints.
  io::BaseInstance b = io::parse_base(inst);
  const ExtendedInstance ext = embed_two_constraints(b.spec(), required(c, "dd"), required(c, "de"));
  return {std::move(b.src), ext};
}

Json numbers_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

int cmd_ext_solve(const Manifest& m) {
  const Json inst = load_input(m, true);
  const auto allowed = keys({"dd", "de", "targets", "u_size"});
  const io::Config c = instance_config(inst, m, allowed);
  const io::ExtInstance e = extended_input(inst, c);
  ExtSolveConfig cfg;
  cfg.inner = solver_config(c);
  cfg.z_size = cfg.inner.z_size;
  if (auto v = c.integer("u_size")) cfg.u_size = static_cast<int>(*v);
  const ExtRatePoint r = solve_rate_ext(e.src, e.ext, cfg);
  const Json body{{"rate", jnum(r.rate)},
                  {"status", std::string(to_string(r.status))},
                  {"k", e.ext.k()},
                  {"targets", numbers_json(r.targets)},
                  {"achieved", numbers_json(r.achieved)},
                  {"u_size", r.u_size},
                  {"z_size", r.z_size},
                  {"upper_bound", r.upper_bound},
                  {"gap", jnum(r.gap)},
                  {"iterations", r.iterations},
                  {"candidates", r.candidates},
                  {"feasible_candidates", r.feasible_candidates},
                  {"witness", io::witness_json(r.witness)}};
  Writer(m).report("json", config_echo(c, allowed), body);
  return 0;
}

int cmd_reduce_u(const Manifest& m) {
  const Json inst = load_input(m, true);
  const std::vector<std::string> allowed = {"targets"};
  const io::Config c = instance_config(inst, m, allowed);
  const io::ExtInstance e = extended_input(inst, c);
  const ExtWitness w = io::parse_witness(inst, e.src, e.ext);
  const UReductionCheck chk = verify_u_reduction(e.src, e.ext, w);
  Json cells = Json::array();
  for (const CellTrace& t : chk.reduction.cells) {
    Json orig = Json::array(), red = Json::array();
    for (Eigen::Index i = 0; i < t.original.size(); ++i) orig.push_back(jnum(t.original(i)));
    for (Eigen::Index i = 0; i < t.reduced.size(); ++i) red.push_back(jnum(t.reduced(i)));
    cells.push_back(Json{{"x", t.x}, {"z", t.z}, {"original", orig}, {"reduced", red}});
  }
  const Json body{{"ok", chk.ok},
                  {"u_size_before", w.u_size()},
                  {"u_size_after", chk.reduction.witness.u_size()},
                  {"rate_before", jnum(chk.rate_before)},
                  {"rate_after", jnum(chk.rate_after)},
                  {"distortions_before", numbers_json(chk.before)},
                  {"distortions_after", numbers_json(chk.after)},
                  {"witness", io::witness_json(chk.reduction.witness)},
                  {"cells", cells}};
  Writer(m).report("json", config_echo(c, allowed), body);
  return 0;
}

int dispatch(const Manifest& m) {
  if (m.subcommand == "discrete-solve") return cmd_discrete_solve(m);
  if (m.subcommand == "discrete-sweep") return cmd_discrete_sweep(m);
  if (m.subcommand == "wz") return cmd_single_constraint(m, false);
  if (m.subcommand == "cr") return cmd_single_constraint(m, true);
  if (m.subcommand == "gaussian-curve") return cmd_gaussian_curve(m);
  if (m.subcommand == "sphere-sim") return cmd_sphere_sim(m);
  if (m.subcommand == "ext-solve") return cmd_ext_solve(m);
  if (m.subcommand == "reduce-u") return cmd_reduce_u(m);
  fail(ErrorKind::parse, "unknown subcommand " + m.subcommand);
}

void print_error(ErrorKind kind, const std::string& message) {
  Json j{{"spec_version", io::kSpecVersion},
         {"error", Json{{"kind", std::string(to_string(kind))}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-distortion with decoder side information and an encoder-side estimate"};
  app.require_subcommand(1);
  Manifest m;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"discrete-solve", "rate of a discrete instance at one (dd, de) target"},
      {"discrete-sweep", "rates over a dd x de grid (CSV)"},
      {"wz", "rate with decoder side information only"},
      {"cr", "rate under common reconstruction"},
      {"gaussian-curve", "closed-form Gaussian rates and scheme parameters over a grid"},
      {"sphere-sim", "Monte Carlo simulation of the Gaussian binning scheme"},
      {"ext-solve", "rate of an instance with K three-argument distortion constraints"},
      {"reduce-u", "shrink the auxiliary alphabet of an extended witness"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--input,-i", m.input, "instance or parameter file (JSON)");
    sub->add_option("--output,-o", m.output, "output file (default: stdout)");
    sub->add_option("--seed", m.seed, "random seed (default 0)");
    sub->add_option("--config,-c", m.config, "KEY=VALUE override (repeatable)");
    sub->add_option("--format", m.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&m, name = name] { m.subcommand = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(ErrorKind::parse, e.what());
    return 2;
  }
  try {
    return dispatch(m);
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    print_error(ErrorKind::parse, e.what());
    return 2;
  } catch (const std::bad_alloc&) {
    print_error(ErrorKind::resource_cap, "out of memory");
    return 5;
  }
}
