#include "anonsense/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "anonsense/analytic.hpp"
#include "anonsense/io.hpp"
#include "anonsense/parallel.hpp"
#include "anonsense/protocol.hpp"
#include "anonsense/statevec.hpp"

namespace anonsense {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  std::string out_path;
};

// Thrown by verbs to report a failure with a specific exit code.
struct VerbFailure : std::runtime_error {
  int code;
  VerbFailure(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

void emit(const Globals& g, const std::string& text, std::ostream& out) {
  if (g.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(g.out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError(g.out_path, "cannot open output file");
  file << text;
  if (!file) throw InputError(g.out_path, "write failed");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  int n = 5;
  int m = 2;
  int trials = 20;
  std::string povm = "random";
  std::string mode = "exact";
  std::int64_t rounds = 100000;
  double tolerance = 1e-10;
  bool negative_control = false;
  std::string config_path;
};

struct VerifyCase {
  ProtocolConfig config;
  FieldVector fields;
};

// Field amplitudes in (0.1, 3], sorted; t in (0.1, 2].
VerifyCase draw_case(const VerifyOptions& o, std::uint64_t seed, int trial) {
  const CounterRng rng(seed, 100 + static_cast<std::uint64_t>(trial));
  std::uint64_t ctr = 0;
  const auto u = [&] { return rng.uniform(ctr++); };

  VerifyCase c;
  c.fields.t = 0.1 + 1.9 * (1.0 - u());
  for (int j = 0; j < o.m; ++j) c.fields.omegas.push_back(0.1 + 2.9 * (1.0 - u()));
  std::sort(c.fields.omegas.begin(), c.fields.omegas.end());

  if (o.povm == "preset") {
    if (o.m == 1) {
      c.config = ProtocolConfig::single_sender(o.n, c.fields.t);
    } else {
      if (o.n < 5) throw VerbFailure(kExitFailure, "--povm preset with --m 2 needs n >= 5");
      const int half = o.n / 2;
      const int a = 2 + static_cast<int>(u() * (half - 1));
      c.config = ProtocolConfig::two_sender(o.n, std::min(a, half), 0.05 + 0.9 * u(), c.fields.t);
    }
    return c;
  }

  // Custom POVM: random active projectors, branch weights only where some
  // projector at that index is active. Index 0 stays active so q is nonempty.
  c.config = ProtocolConfig::blank(o.n, c.fields.t);
  double total = 0.0;
  for (int i = 0; i <= c.config.half(); ++i) {
    const bool minus_exists = 2 * i != o.n;
    const bool plus = i == 0 || u() < 0.5;
    const bool minus = minus_exists && u() < 0.5;
    c.config.set_povm(i, Sign::plus, plus);
    c.config.set_povm(i, Sign::minus, minus);
    c.config.q[i] = (plus || minus) ? 0.05 + u() : 0.0;
    total += c.config.q[i];
  }
  for (auto& q : c.config.q) q /= total;
  return c;
}

double oracle_error(const VerifyCase& c, const std::vector<int>& positions) {
  const SenderAssignment assign{c.config.n, positions, c.fields};
  const auto oracle = oracle_distribution(assign, c.config);
  const auto analytic = outcome_distribution(c.config, c.fields);
  double err = 0.0;
  for (std::size_t x = 0; x < oracle.size(); ++x)
    err = std::max(err, std::abs(oracle.probabilities[x] - analytic.probabilities[x]));
  return err;
}

Json replay_json(const VerifyCase& c, const std::vector<int>& positions) {
  Json j;
  j["protocol"] = to_json(c.config);
  j["scenario"] = {{"sender_positions", positions}, {"omegas", c.fields.omegas}};
  return j;
}

int cmd_verify(const VerifyOptions& o, const Globals& g, std::ostream& out, std::ostream& err) {
  std::vector<VerifyCase> cases;
  int n = o.n;
  int m = o.m;
  if (!o.config_path.empty()) {
    const auto file = load_run_config(o.config_path);
    if (!file.scenario) throw InputError("scenario", "verify --config needs a scenario section");
    cases.push_back({file.protocol, file.scenario->fields});
    n = file.protocol.n;
    m = file.scenario->m();
  }
  if (n > oracle_limit()) throw OracleLimitExceeded(n, oracle_limit());
  if (n < 1) throw VerbFailure(kExitFailure, "--n must be >= 1");
  if (m < 1 || m > (n + 1) / 2) throw VerbFailure(kExitFailure, "--m must lie in [1, (n+1)/2]");
  if (o.povm != "random" && o.povm != "preset")
    throw VerbFailure(kExitFailure, "--povm must be random or preset");
  if (o.mode != "exact" && o.mode != "sampled")
    throw VerbFailure(kExitFailure, "--mode must be exact or sampled");
  if (cases.empty()) {
    VerifyOptions drawn = o;
    drawn.n = n;
    drawn.m = m;
    for (int trial = 0; trial < o.trials; ++trial) cases.push_back(draw_case(drawn, g.seed, trial));
  }

  TracelessnessOptions topt;
  topt.tolerance = o.tolerance;
  topt.rounds = o.rounds;
  topt.threads = g.threads;
  const auto mode = o.mode == "exact" ? TracelessnessMode::exact : TracelessnessMode::sampled;

  Json doc;
  doc["verb"] = "verify";
  doc["n"] = n;
  doc["m"] = m;
  doc["seed"] = g.seed;
  doc["povm"] = o.config_path.empty() ? o.povm : "config";
  doc["mode"] = o.negative_control ? "negative-control" : o.mode;

  Json rows = Json::array();
  Json failing = nullptr;
  double max_tv = 0.0;
  double max_err = 0.0;
  bool pass = true;
  const auto first = sender_subsets(n, m).front();

  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    topt.seed = CounterRng(g.seed, 200).bits(i);
    Json row;
    row["trial"] = i;
    row["t"] = c.fields.t;
    row["omegas"] = c.fields.omegas;
    if (o.negative_control) {
      const auto rep = negative_control(n, c.fields, c.config, topt);
      // Detected means the verifier's own verdict is "fail".
      const bool detected = !rep.pass;
      row["max_tv"] = rep.max_tv;
      row["leakage_detected"] = detected;
      max_tv = std::max(max_tv, rep.max_tv);
      if (!detected && failing.is_null()) failing = replay_json(c, first);
      pass = pass && detected;
    } else {
      const auto rep = verify_tracelessness(n, c.fields, c.config, mode, topt);
      const double e = std::max(oracle_error(c, rep.worst_a), oracle_error(c, rep.worst_b));
      const bool ok = rep.pass && e <= o.tolerance;
      row["max_tv"] = rep.max_tv;
      if (rep.p_value) row["p_value"] = *rep.p_value;
      row["oracle_vs_analytic"] = e;
      row["pass"] = ok;
      max_tv = std::max(max_tv, rep.max_tv);
      max_err = std::max(max_err, e);
      if (!ok && failing.is_null()) failing = replay_json(c, rep.worst_a);
      pass = pass && ok;
    }
    rows.push_back(std::move(row));
  }

  doc["tolerance"] = o.tolerance;
  doc["max_tv"] = max_tv;
  if (!o.negative_control) doc["max_oracle_vs_analytic"] = max_err;
  doc["cases"] = std::move(rows);
  doc["failing_case"] = failing;
  doc["pass"] = pass;
  emit(g, dump(doc), out);
  if (!pass) {
    err << (o.negative_control ? "negative control did not detect leakage\n"
                               : "verification failed; failing_case holds a replayable config\n");
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- scan

struct ScanOptions {
  std::string grid = "custom";
  int points = 64;
  std::string n, q0, theta1, theta2, config_path;
  std::optional<std::int64_t> a;
};

std::vector<double> theta_axis(int points) {
  std::vector<double> v;
  for (int j = 1; j <= points; ++j) v.push_back(std::numbers::pi * j / points);
  return v;
}

ScanSpec scan_spec(const ScanOptions& o) {
  ScanSpec s;
  // Preset grids: theta1, theta2 over (0, pi] at fixed n, or an n sweep.
  if (o.grid == "n10" || o.grid == "n10000" || o.grid == "inf") {
    s.ns = {o.grid == "n10" ? 10 : o.grid == "n10000" ? 10000 : 0};
    s.q0s = {0.33};
    s.theta1s = s.theta2s = theta_axis(o.points);
  } else if (o.grid == "sweep") {
    s.ns = parse_n_axis("log:5:10000:200");
    s.q0s = {0.33};
    s.theta1s = {2.0};
    s.theta2s = {0.5, 0.1, 0.05};
  } else if (o.grid == "custom") {
    if (!o.config_path.empty()) {
      const auto file = load_run_config(o.config_path);
      if (!file.scan) throw InputError("scan", "config has no scan section");
      s = *file.scan;
    }
    try {
      if (!o.n.empty()) s.ns = parse_n_axis(o.n);
      if (!o.q0.empty()) s.q0s = parse_axis(o.q0);
      if (!o.theta1.empty()) s.theta1s = parse_axis(o.theta1);
      if (!o.theta2.empty()) s.theta2s = parse_axis(o.theta2);
    } catch (const std::invalid_argument& e) {
      throw InputError("grid", e.what());
    }
    if (s.ns.empty() || s.q0s.empty() || s.theta1s.empty() || s.theta2s.empty())
      throw InputError("grid", "custom grid needs --n, --q0, --theta1 and --theta2 (or --config)");
  } else {
    throw InputError("--grid", "expected n10, n10000, inf, sweep or custom");
  }
  if (o.a) s.a = o.a;
  return s;
}

int cmd_scan(const ScanOptions& o, const Globals& g, std::ostream& out) {
  if (o.points < 1) throw InputError("--points", "must be >= 1");
  emit(g, scan_csv(scan_j22(scan_spec(o), g.threads)), out);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& path, const std::string& backend, const Globals& g,
                 std::ostream& out) {
  const auto file = load_run_config(path);
  if (!file.scenario) throw InputError("scenario", "required section is missing");
  if (!file.rounds) throw InputError("run.rounds", "required field is missing");
  RunOptions opt;
  opt.backend = file.backend;
  if (!backend.empty()) {
    const auto b = parse_backend(backend);
    if (!b) throw InputError("--backend", "expected auto, oracle or analytic");
    opt.backend = *b;
  }
  opt.threads = g.threads;
  const auto seed = g.seed_given ? g.seed : file.seed;
  const auto tr = run_protocol(*file.scenario, file.protocol, *file.rounds, seed, opt);
  emit(g, dump(to_json(tr)), out);
  return kExitOk;
}

// ---------------------------------------------------------------- estimate

int cmd_estimate(const std::string& counts_path, const std::string& config_path, const Globals& g,
                 std::ostream& out) {
  const auto counts = parse_counts(read_json_file(counts_path));
  ProtocolConfig config;
  if (!config_path.empty()) {
    config = load_run_config(config_path).protocol;
  } else {
    // A transcript carries its own config.
    const auto doc = read_json_file(counts_path);
    if (!doc.contains("config")) throw InputError("config", "pass --config or a transcript file");
    config = parse_run_config(Json{{"protocol", doc["config"]}}).protocol;
  }
  const auto report = mle_estimate(counts, config);
  emit(g, dump(to_json(report)), out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anonymous multi-party quantum sensing: verification, Fisher scans, simulation"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed (default 0; simulate: config seed)");
  app.add_option("--threads", g.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out_path, "Write the result here instead of stdout");

  VerifyOptions vo;
  auto* verify = app.add_subcommand("verify", "Oracle equivalence and tracelessness over all sender subsets");
  verify->add_option("--n", vo.n, "Number of participants");
  verify->add_option("--m", vo.m, "Number of senders");
  verify->add_option("--trials", vo.trials, "Random field draws")->check(CLI::PositiveNumber);
  verify->add_option("--povm", vo.povm, "random (custom q, c) or preset");
  verify->add_option("--mode", vo.mode, "exact or sampled");
  verify->add_option("--rounds", vo.rounds, "Rounds per subset in sampled mode")->check(CLI::PositiveNumber);
  verify->add_option("--tolerance", vo.tolerance, "Max allowed TV distance / oracle error");
  verify->add_flag("--negative-control", vo.negative_control, "Run the position-revealing control instead");
  verify->add_option("--config", vo.config_path, "Verify the single case in this config file");

  ScanOptions so;
  std::int64_t scan_a = 0;
  auto* scan = app.add_subcommand("scan", "(J^-1)_{2,2} grids as CSV");
  scan->add_option("--grid", so.grid, "n10, n10000, inf, sweep or custom");
  scan->add_option("--points", so.points, "theta samples per axis for n10, n10000 and inf");
  scan->add_option("--n", so.n, "n axis, e.g. 5,10 or log:5:10000:200 or inf");
  scan->add_option("--q0", so.q0, "q0 axis");
  scan->add_option("--theta1", so.theta1, "theta1 axis, e.g. lin:0:pi:65");
  scan->add_option("--theta2", so.theta2, "theta2 axis");
  auto* a_opt = scan->add_option("--a", scan_a, "Fixed a instead of floor(n/2)");
  scan->add_option("--config", so.config_path, "Take axes from the scan section of a config");

  std::string sim_path, sim_backend;
  auto* simulate = app.add_subcommand("simulate", "Run the protocol and write a transcript");
  simulate->add_option("config", sim_path, "Run configuration JSON")->required();
  simulate->add_option("--backend", sim_backend, "auto, oracle or analytic");

  std::string counts_path, est_config;
  auto* estimate = app.add_subcommand("estimate", "Maximum-likelihood estimate from outcome counts");
  estimate->add_option("--counts", counts_path, "Counts or transcript JSON")->required();
  estimate->add_option("--config", est_config, "Config whose protocol section defines the outcomes");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  g.seed_given = seed_opt->count() > 0;
  g.threads = resolve_threads(g.threads);
  if (a_opt->count() > 0) so.a = scan_a;

  try {
    if (verify->parsed()) return cmd_verify(vo, g, out, err);
    if (scan->parsed()) return cmd_scan(so, g, out);
    if (simulate->parsed()) return cmd_simulate(sim_path, sim_backend, g, out);
    if (estimate->parsed()) return cmd_estimate(counts_path, est_config, g, out);
  } catch (const OracleLimitExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const VerbFailure& e) {
    err << "error: " << e.what() << "\n";
    return e.code;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace anonsense
