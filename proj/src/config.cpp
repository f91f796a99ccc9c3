#include "gibbsdc/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gibbsdc/coupling.hpp"
#include "gibbsdc/percolation.hpp"

#ifndef GIBBSDC_VERSION
#define GIBBSDC_VERSION "unknown"
#endif

namespace gibbsdc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::vector<std::string> kModelKeys = {"model", "alpha0", "r0", "beta", "gamma", "grid", "dim"};
const std::vector<std::string> kCommonKeys = {"seed", "threads", "out"};

std::vector<std::string> keys_for(std::initializer_list<std::vector<std::string>> groups) {
  std::vector<std::string> k;
  for (const auto& g : groups) k.insert(k.end(), g.begin(), g.end());
  return k;
}

double to_double(const Settings& s, const std::string& key) {
  const std::string& v = s.at(key);
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_unsigned(const Settings& s, const std::string& key) {
  const std::string& v = s.at(key);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range: '" + v + "'");
  }
}

std::vector<double> to_list(const Settings& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s.at(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    Settings one{{key, trim(item)}};
    out.push_back(to_double(one, key));
  }
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list of numbers");
  return out;
}

// Model validation messages already start with the offending parameter.
void validate_model(const InteractionModel& m) {
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

template <class F>
auto checked(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.rfind(key, 0) == 0 ? msg : key + ": " + msg);
  }
}

}  // namespace

Settings read_settings(std::istream& is) {
  Settings s;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    s[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return s;
}

Settings merge_settings(Settings base, const Settings& over) {
  for (const auto& [k, v] : over) base[k] = v;
  return base;
}

const std::vector<std::string>& allowed_keys(const std::string& command) {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"sample", keys_for({kModelKeys, kCommonKeys, {"window", "mode", "boundary", "n-max", "budget-work",
                                                     "budget-rejection"}})},
      {"couple", keys_for({kModelKeys, kCommonKeys, {"algo", "window", "perturb-box", "reps", "retention",
                                                     "budget-work"}})},
      {"percolation", keys_for({kCommonKeys, {"alpha0", "r0", "dim", "distances", "reps", "margin"}})},
      {"functional", keys_for({{"out", "spec", "in", "window", "variant"}})},
      {"clt", keys_for({kModelKeys, kCommonKeys, {"functional", "n", "reps", "route", "variant", "margin",
                                                  "report", "extra-window", "budget-work",
                                                  "budget-rejection"}})},
      {"decay", keys_for({kModelKeys, kCommonKeys, {"distances", "reps", "margin", "retention",
                                                    "budget-work"}})},
  };
  const auto it = table.find(command);
  if (it == table.end()) throw ConfigError("command: unknown subcommand '" + command + "'");
  return it->second;
}

RunConfig make_config(const std::string& command, const Settings& given) {
  const auto& allowed = allowed_keys(command);
  for (const auto& [k, v] : given)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError(k + ": unknown key for '" + command + "'");

  Settings s = given;
  auto def = [&](const std::string& k, const std::string& v) {
    if (std::find(allowed.begin(), allowed.end(), k) != allowed.end() && !s.count(k)) s[k] = v;
  };
  def("model", "poisson");
  def("alpha0", "1");
  def("r0", "0.3");
  def("beta", "0.5");
  def("gamma", "0.5");
  def("grid", "0");
  def("dim", "2");
  def("seed", "1");
  def("threads", "0");
  def("window", "10");
  def("mode", "auto");
  def("route", "auto");
  def("boundary", "none");
  def("algo", "radial");
  def("reps", "1");
  def("retention", "exact");
  def("variant", "full");
  def("distances", "2,4,6,8");
  def("n", "10,20,40");
  def("extra-window", "20");

  RunConfig c;
  c.command = command;
  auto has = [&](const std::string& k) { return s.count(k) > 0; };

  if (has("seed")) c.seed = to_unsigned(s, "seed");
  if (has("threads")) c.threads = static_cast<unsigned>(to_unsigned(s, "threads"));
  if (has("out")) c.out = s["out"];
  if (has("report")) c.report = s["report"];

  if (has("dim")) {
    const auto d = to_unsigned(s, "dim");
    if (d != 2 && d != 3) throw ConfigError("dim: must be 2 or 3");
    c.model.dim = static_cast<int>(d);
  }
  if (has("model")) {
    c.model.kind = checked("model", [&] { return parse_model_kind(s["model"]); });
    c.model.alpha0 = to_double(s, "alpha0");
    c.model.r0 = to_double(s, "r0");
    if (c.model.kind == ModelKind::strauss) c.model.beta = to_double(s, "beta");
    if (c.model.kind == ModelKind::area_interaction) {
      c.model.gamma = to_double(s, "gamma");
      c.model.grid_resolution = to_double(s, "grid");
    }
    validate_model(c.model);
  } else if (has("alpha0")) {
    c.model = InteractionModel::poisson(to_double(s, "alpha0"), to_double(s, "r0"), c.model.dim);
    validate_model(c.model);
  }

  if (has("window")) {
    c.window = to_double(s, "window");
    c.has_window = given.count("window") > 0;
    if (!(c.window > 0.0)) throw ConfigError("window: must be positive");
  }
  if (has("mode")) c.route = checked("mode", [&] { return parse_route(s["mode"]); });
  if (has("route")) c.route = checked("route", [&] { return parse_route(s["route"]); });
  if (has("boundary")) c.boundary = s["boundary"];
  if (has("retention")) {
    const std::string& r = s["retention"];
    if (r == "exact") {
      c.retention = RetentionMode::exact();
    } else if (r.rfind("plugin:", 0) == 0) {
      Settings one{{"retention", r.substr(7)}};
      const auto m = to_unsigned(one, "retention");
      c.retention = checked("retention", [&] { return RetentionMode::plugin(static_cast<int>(m)); });
    } else {
      throw ConfigError("retention: expected exact or plugin:<M>, got '" + r + "'");
    }
  }
  if (has("algo")) c.algo = checked("algo", [&] { return parse_coupling_algo(s["algo"]); });
  if (has("reps")) {
    c.reps = to_unsigned(s, "reps");
    if (c.reps == 0) throw ConfigError("reps: must be positive");
  }
  if (has("distances")) {
    c.distances = to_list(s, "distances");
    for (double d : c.distances)
      if (d < 0.0) throw ConfigError("distances: must be non-negative");
  }
  if (has("margin")) {
    c.margin = to_double(s, "margin");
    if (c.margin < 0.0) throw ConfigError("margin: must be non-negative");
  }
  if (has("spec")) c.spec = checked("spec", [&] { return ScoreSpec::parse(s["spec"]); });
  if (has("functional")) c.spec = checked("functional", [&] { return ScoreSpec::parse(s["functional"]); });
  if (has("spec") || has("functional"))
    checked(has("spec") ? "spec" : "functional", [&] {
      c.spec.validate(c.model.dim);
      return 0;
    });
  if (has("in")) c.in = s["in"];
  if (has("variant")) c.variant = checked("variant", [&] { return parse_variant(s["variant"]); });
  if (has("n")) {
    c.n_list = to_list(s, "n");
    for (double n : c.n_list)
      if (!(n > 0.0)) throw ConfigError("n: window sizes must be positive");
  }
  if (has("budget-work")) c.budget.retention_work = to_unsigned(s, "budget-work");
  if (has("budget-rejection")) c.budget.rejection_iterations = to_unsigned(s, "budget-rejection");
  if (has("n-max")) c.n_max = to_double(s, "n-max");
  if (has("extra-window")) c.n_max = to_double(s, "extra-window");

  if (has("perturb-box")) {
    const auto v = to_list(s, "perturb-box");
    if (v.size() != static_cast<std::size_t>(2 * c.model.dim))
      throw ConfigError("perturb-box: expected " + std::to_string(2 * c.model.dim) + " numbers");
    for (int i = 0; i < c.model.dim; ++i) {
      c.perturb_box.lo[i] = v[static_cast<std::size_t>(i)];
      c.perturb_box.hi[i] = v[static_cast<std::size_t>(i + c.model.dim)];
      if (!(c.perturb_box.lo[i] < c.perturb_box.hi[i])) throw ConfigError("perturb-box: empty box");
    }
  } else if (command == "couple") {
    // Unit box just outside the right face of Q_n.
    const double h = 0.5 * c.window;
    c.perturb_box = Box{Point(h + 1e-9, -0.5, -0.5), Point(h + 1.0, 0.5, 0.5)};
    std::ostringstream box;
    box.precision(17);
    for (int i = 0; i < c.model.dim; ++i) box << c.perturb_box.lo[i] << ',';
    for (int i = 0; i < c.model.dim; ++i) box << c.perturb_box.hi[i] << (i + 1 < c.model.dim ? "," : "");
    s["perturb-box"] = box.str();
  }
  if (command == "functional" && !has("in")) throw ConfigError("in: input pattern is required");
  if (command == "sample" && c.route.route == SamplingRoute::infinite_volume && !has("n-max"))
    c.n_max = c.window + 20.0;
  c.settings = s;
  return c;
}

std::string output_header(const RunConfig& c) {
  std::ostringstream os;
  os << "# gibbsdc " << GIBBSDC_VERSION << "\n# command = " << c.command << '\n';
  for (const auto& [k, v] : c.settings) os << "# " << k << " = " << v << '\n';
  os << "# master seed = " << c.seed << '\n';
  return os.str();
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.precision(17);
  return f;
}

PointPattern load_pattern(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("input: cannot open " + path);
  return read_csv(f);
}

int run_sample(const RunConfig& c, std::ostream& log) {
  const Region q = Region::cube(c.window, c.model.dim);
  PointPattern psi(c.model.dim);
  if (c.boundary != "none") psi = load_pattern(c.boundary).unmarked();
  for (const auto& p : psi.points())
    if (q.contains(p)) throw ConfigError("boundary: points must lie outside the window");
  const RngStream rng(c.seed, static_cast<std::uint64_t>(StreamPurpose::replicate));
  PointPattern x(c.model.dim);
  if (c.route.route == SamplingRoute::infinite_volume) {
    const auto r = infinite_volume_approx(c.model, q, psi, Region::everything(c.model.dim), c.n_max,
                                          RetentionMode::exact(), rng, c.budget);
    if (!r.certified) throw BudgetExceeded("n-max reached without a window certificate");
    x = r.on_a;
    log << "certificate window " << r.n_star << '\n';
  } else {
    x = sample_window(c.model, q, psi, c.route, rng, c.budget);
  }
  log << x.size() << " points\n";
  if (!c.out.empty()) {
    auto f = open_out(c.out);
    f << output_header(c);
    write_csv(f, x);
  }
  return exit_ok;
}

int run_couple(const RunConfig& c, std::ostream& log) {
  const auto e = coupling_experiment(c.model, c.algo, c.window, c.perturb_box, c.reps, c.seed,
                                     c.retention, 0.5 * c.model.r0, c.budget);
  log << e.reps << " runs, " << e.disagreeing_runs << " with disagreement, " << e.violations
      << " confinement violations\n";
  if (!c.out.empty()) {
    auto f = open_out(c.out);
    f << output_header(c);
    write_coupling_csv(f, e);
  }
  return e.violations == 0 ? exit_ok : exit_failure;
}

int run_percolation(const RunConfig& c, std::ostream& log) {
  const int d = c.model.dim;
  const double margin = c.margin >= 0.0 ? c.margin : 4.0 * c.model.r0;
  const auto rows = decay_curve(c.model.alpha0, c.model.r0, Region::cube(1.0, d), c.distances,
                                margin, c.reps, c.seed, d);
  const auto fit = fit_log_decay(rows);
  log << "log-linear fit: slope " << fit.slope << ", R^2 " << fit.r2 << " on " << fit.used << " rows\n";
  if (!c.out.empty()) {
    auto f = open_out(c.out);
    f << output_header(c) << "s,p_hat,stderr,reps\n";
    for (const auto& r : rows) f << r.s << ',' << r.p_hat << ',' << r.se << ',' << r.reps << '\n';
  }
  return exit_ok;
}

int run_functional(const RunConfig& c, std::ostream& log) {
  const PointPattern phi = load_pattern(c.in).unmarked();
  c.spec.validate(phi.dim());
  const Region q = c.has_window ? Region::cube(c.window, phi.dim()) : Region::everything(phi.dim());
  const double v = score_sum(phi, c.spec, q, c.variant);
  log.precision(17);
  log << v << '\n';
  if (!c.out.empty()) {
    auto f = open_out(c.out);
    f << output_header(c) << "spec,variant,points,value\n"
      << c.spec.to_string() << ',' << (c.variant == ScoreVariant::full ? "full" : "restricted") << ','
      << phi.size() << ',' << v << '\n';
  }
  return exit_ok;
}

void write_report(std::ostream& os, const RunConfig& c, const ExperimentTable& t) {
  os << "functional " << c.spec.to_string() << ", model " << to_string(c.model.kind) << '\n';
  os << "n,used,excluded,mean,variance,normalized_variance,ks\n";
  for (const auto& s : t.summarize())
    os << s.n << ',' << s.used << ',' << s.excluded << ',' << s.mean << ',' << s.variance << ','
       << s.normalized_variance << ',' << s.ks << '\n';
  if (t.windows().size() >= 2) {
    os << "n,normalized_variance,relative_change\n";
    for (const auto& v : variance_scaling(t))
      os << v.n << ',' << v.normalized_variance << ',' << v.relative_change << '\n';
  }
  std::map<std::string, std::size_t> flags;
  for (const auto& r : t.rows)
    if (!r.flag.empty()) ++flags[r.flag];
  os << "excluded rows:";
  if (flags.empty()) os << " none";
  for (const auto& [k, n] : flags) os << ' ' << k << '=' << n;
  os << '\n';
}

int run_clt(const RunConfig& c, std::ostream& log) {
  HarnessOptions opt;
  opt.route = c.route;
  opt.margin = c.margin;
  opt.budget = c.budget;
  opt.extra_window = c.n_max;
  const auto table = replicate_functional(c.model, c.spec, c.variant, c.n_list, c.reps, c.seed, opt);
  log.precision(6);
  write_report(log, c, table);
  if (!c.out.empty()) {
    auto f = open_out(c.out);
    f << output_header(c);
    table.write_csv(f);
  }
  if (!c.report.empty()) {
    auto f = open_out(c.report);
    f.precision(10);
    f << output_header(c);
    write_report(f, c, table);
  }
  return exit_ok;
}

int run_decay(const RunConfig& c, std::ostream& log) {
  DecayExperimentOptions opt;
  if (c.margin >= 0.0) opt.margin = c.margin;
  opt.lattice_spacing = 0.5 * c.model.r0;
  opt.mode = c.retention;
  opt.budget = c.budget;
  const auto rows = disagreement_decay_experiment(c.model, c.distances, c.reps, c.seed, opt);
  std::size_t bad = 0;
  for (const auto& r : rows) {
    log << "s=" << r.s << " p_disagree=" << r.p_disagree << " p_connect=" << r.p_connect << '\n';
    bad += r.dominance_violations + r.confinement_violations + r.control_disagreements;
  }
  if (!c.out.empty()) {
    auto f = open_out(c.out);
    f << output_header(c);
    write_decay_csv(f, rows);
  }
  return bad == 0 ? exit_ok : exit_failure;
}

}  // namespace

int run(const RunConfig& c, std::ostream& log) {
  if (c.threads > 0) ::setenv("GIBBSDC_THREADS", std::to_string(c.threads).c_str(), 1);
  if (c.command == "sample") return run_sample(c, log);
  if (c.command == "couple") return run_couple(c, log);
  if (c.command == "percolation") return run_percolation(c, log);
  if (c.command == "functional") return run_functional(c, log);
  if (c.command == "clt") return run_clt(c, log);
  if (c.command == "decay") return run_decay(c, log);
  throw ConfigError("command: unknown subcommand '" + c.command + "'");
}

}  // namespace gibbsdc
