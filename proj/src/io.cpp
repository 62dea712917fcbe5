#include "anonsense/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace anonsense {

InputError::InputError(std::string path, const std::string& message)
    : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

namespace {

// Strict object access: every key must be consumed, or finish() reports it.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw InputError(path_, "expected an object");
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* find(const std::string& key) {
    const auto it = obj_.find(key);
    if (it == obj_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  const Json& require(const std::string& key) {
    const Json* j = find(key);
    if (!j) throw InputError(child(key), "required field is missing");
    return *j;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) throw InputError(child(key), "unknown key");
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::int64_t as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw InputError(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::uint64_t as_uint(const Json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  throw InputError(path, "expected a non-negative integer");
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw InputError(path, "expected a number");
  return j.get<double>();
}

std::vector<double> as_doubles(const Json& j, const std::string& path) {
  if (!j.is_array()) throw InputError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

ProtocolConfig parse_protocol(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  const auto n = as_int(r.require("n"), r.child("n"));
  if (n < 1 || n > 1'000'000) throw InputError(r.child("n"), "n must lie in [1, 1000000]");
  const auto m_est = as_int(r.require("m_est"), r.child("m_est"));
  double t = 1.0;
  if (const Json* v = r.find("t")) t = as_double(*v, r.child("t"));

  ProtocolConfig cfg;
  const Json* q0 = r.find("q0");
  const Json* q = r.find("q");
  const Json* a = r.find("a");
  const Json* c = r.find("c");
  if (q0 && q) throw InputError(r.child("q0"), "give either q0 or q, not both");

  switch (m_est) {
    case 0:
      cfg = ProtocolConfig::blank(static_cast<int>(n), t);
      if (!q || !c) throw InputError(path, "m_est = 0 (custom POVM) requires both q and c");
      if (q0) throw InputError(r.child("q0"), "q0 applies to the m_est = 2 preset only");
      break;
    case 1:
      cfg = ProtocolConfig::single_sender(static_cast<int>(n), t);
      if (q0) throw InputError(r.child("q0"), "q0 applies to the m_est = 2 preset only");
      break;
    case 2: {
      if (!a) throw InputError(r.child("a"), "required field is missing for m_est = 2");
      const auto av = as_int(*a, r.child("a"));
      if (!q0 && !q) throw InputError(r.child("q0"), "m_est = 2 requires q0 (or a full q vector)");
      const double q0v = q0 ? as_double(*q0, r.child("q0")) : 0.0;
      cfg = ProtocolConfig::two_sender(static_cast<int>(n), static_cast<int>(av), q0v, t);
      break;
    }
    default:
      throw InputError(r.child("m_est"), "m_est must be 0, 1 or 2");
  }
  if (a && m_est != 2) cfg.a = static_cast<int>(as_int(*a, r.child("a")));

  if (q) {
    auto values = as_doubles(*q, r.child("q"));
    if (values.size() != cfg.q.size())
      throw InputError(r.child("q"), "expected " + std::to_string(cfg.q.size()) +
                                         " entries (floor(n/2) + 1)");
    cfg.q = std::move(values);
  }
  if (c) {
    if (!c->is_array()) throw InputError(r.child("c"), "expected an array of labels like \"0+\"");
    for (auto& row : cfg.c) row = {false, false};
    for (std::size_t i = 0; i < c->size(); ++i) {
      const auto p = indexed(r.child("c"), i);
      if (!(*c)[i].is_string()) throw InputError(p, "expected a label string like \"0+\"");
      const auto label = OutcomeLabel::parse((*c)[i].get<std::string>());
      if (!label || label->is_fail || label->index > cfg.half())
        throw InputError(p, "not a projector label for n = " + std::to_string(n));
      cfg.set_povm(label->index, label->sign, true);
    }
  }
  r.finish();

  const auto violations = validate_config(cfg);
  if (!violations.empty())
    throw InputError(path, violations.front().invariant + " (" + violations.front().detail + ")");
  return cfg;
}

SenderAssignment parse_scenario(const Json& j, const std::string& path, const ProtocolConfig& cfg) {
  ObjectReader r(j, path);
  SenderAssignment a;
  a.n = cfg.n;
  const auto& pos = r.require("sender_positions");
  if (!pos.is_array()) throw InputError(r.child("sender_positions"), "expected an array");
  for (std::size_t i = 0; i < pos.size(); ++i)
    a.positions.push_back(static_cast<int>(as_int(pos[i], indexed(r.child("sender_positions"), i))));
  a.fields.omegas = as_doubles(r.require("omegas"), r.child("omegas"));
  a.fields.t = cfg.t;
  r.finish();
  if (!a.fields.is_canonical())
    throw InputError(r.child("omegas"), "amplitudes must be positive and nondecreasing");
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(r.child("sender_positions"), e.what());
  }
  return a;
}

std::vector<std::int64_t> parse_n_values(const Json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return parse_n_axis(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw InputError(path, e.what());
    }
  }
  if (!j.is_array()) throw InputError(path, "expected an axis string or an array");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_string() && j[i].get<std::string>() == "inf") {
      out.push_back(0);
      continue;
    }
    const auto v = as_int(j[i], indexed(path, i));
    if (v < 1) throw InputError(indexed(path, i), "n must be positive");
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_axis_values(const Json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return parse_axis(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw InputError(path, e.what());
    }
  }
  return as_doubles(j, path);
}

ScanSpec parse_scan(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  ScanSpec s;
  s.ns = parse_n_values(r.require("n"), r.child("n"));
  s.q0s = parse_axis_values(r.require("q0"), r.child("q0"));
  s.theta1s = parse_axis_values(r.require("theta1"), r.child("theta1"));
  s.theta2s = parse_axis_values(r.require("theta2"), r.child("theta2"));
  if (const Json* a = r.find("a")) s.a = as_int(*a, r.child("a"));
  r.finish();
  return s;
}

double parse_number_token(const std::string& tok) {
  if (tok == "pi") return std::numbers::pi;
  if (tok.rfind("pi/", 0) == 0) return std::numbers::pi / parse_number_token(tok.substr(3));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + tok + "'");
  }
  if (used != tok.size()) throw std::invalid_argument("not a number: '" + tok + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

Json scan_to_json(const ScanSpec& s) {
  Json n = Json::array();
  for (auto v : s.ns) {
    if (v == 0)
      n.push_back("inf");
    else
      n.push_back(v);
  }
  Json j = {{"n", n}, {"q0", s.q0s}, {"theta1", s.theta1s}, {"theta2", s.theta2s}};
  if (s.a) j["a"] = *s.a;
  return j;
}

Json doubles_or_null(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) {
    if (std::isfinite(x))
      out.push_back(x);
    else
      out.push_back(nullptr);
  }
  return out;
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(source + " (byte " + std::to_string(e.byte) + ")", e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path.string());
}

RunConfigFile parse_run_config(const Json& doc) {
  ObjectReader r(doc, "");
  RunConfigFile f;
  f.protocol = parse_protocol(r.require("protocol"), "protocol");
  if (const Json* s = r.find("scenario")) f.scenario = parse_scenario(*s, "scenario", f.protocol);
  if (const Json* run = r.find("run")) {
    ObjectReader rr(*run, "run");
    f.has_run = true;
    const auto rounds = as_int(rr.require("rounds"), "run.rounds");
    if (rounds < 1) throw InputError("run.rounds", "must be >= 1");
    f.rounds = rounds;
    if (const Json* seed = rr.find("seed")) f.seed = as_uint(*seed, "run.seed");
    if (const Json* b = rr.find("backend")) {
      if (!b->is_string()) throw InputError("run.backend", "expected \"auto\", \"oracle\" or \"analytic\"");
      const auto parsed = parse_backend(b->get<std::string>());
      if (!parsed) throw InputError("run.backend", "expected \"auto\", \"oracle\" or \"analytic\"");
      f.backend = *parsed;
    }
    rr.finish();
  }
  if (const Json* s = r.find("scan")) f.scan = parse_scan(*s, "scan");
  r.finish();
  return f;
}

RunConfigFile load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_json_file(path));
}

Json to_json(const ProtocolConfig& cfg) {
  Json j;
  j["n"] = cfg.n;
  j["m_est"] = cfg.m_est;
  j["t"] = cfg.t;
  if (cfg.m_est == 2 || cfg.a != 0) j["a"] = cfg.a;
  j["q"] = cfg.q;
  Json c = Json::array();
  for (const auto& label : cfg.outcome_labels())
    if (!label.is_fail) c.push_back(label.to_string());
  j["c"] = c;
  return j;
}

Json to_json(const RunConfigFile& f) {
  Json j;
  j["protocol"] = to_json(f.protocol);
  if (f.scenario)
    j["scenario"] = {{"sender_positions", f.scenario->positions},
                     {"omegas", f.scenario->fields.omegas}};
  if (f.has_run)
    j["run"] = {{"rounds", f.rounds.value_or(0)}, {"seed", f.seed}, {"backend", to_string(f.backend)}};
  if (f.scan) j["scan"] = scan_to_json(*f.scan);
  return j;
}

Json to_json(const OutcomeCounts& counts) {
  Json j = Json::object();
  for (std::size_t i = 0; i < counts.labels.size(); ++i)
    j[counts.labels[i].to_string()] = counts.counts[i];
  return j;
}

Json to_json(const EstimateReport& r) {
  Json j;
  j["m_est"] = r.theta_hat.m_est;
  j["theta_hat"] = r.theta_hat.theta;
  j["omega_hat"] = r.omega_hat.omegas;
  j["omega_flagged"] = r.omega_hat.flagged;
  if (r.omega_hat.flagged) j["omega_note"] = r.omega_hat.note;
  j["log_likelihood"] = r.log_likelihood;
  j["se_observed"] = doubles_or_null(r.se_observed);
  j["se_crb"] = doubles_or_null(r.se_expected);
  j["N"] = r.N;
  j["converged"] = r.converged;
  return j;
}

Json to_json(const Transcript& tr) {
  Json j;
  j["schema"] = "anonsense.transcript/1";
  j["config"] = to_json(tr.config);
  j["rounds"] = tr.rounds;
  j["seed"] = tr.seed;
  j["backend"] = to_string(tr.backend);
  j["counts"] = to_json(tr.counts);
  j["broadcast"] = tr.broadcast ? to_json(*tr.broadcast) : Json(nullptr);
  return j;
}

Json to_json(const TracelessnessReport& r) {
  Json j;
  j["n"] = r.n;
  j["m"] = r.m;
  j["fields"] = {{"omegas", r.fields.omegas}, {"t", r.fields.t}};
  j["mode"] = r.mode == TracelessnessMode::exact ? "exact" : "sampled";
  j["subsets"] = r.subsets;
  j["max_tv"] = r.max_tv;
  j["worst_pair"] = Json::array({r.worst_a, r.worst_b});
  j["tolerance"] = r.tolerance;
  if (r.chi_square) j["chi_square"] = *r.chi_square;
  if (r.dof) j["dof"] = *r.dof;
  if (r.p_value) j["p_value"] = *r.p_value;
  j["pass"] = r.pass;
  return j;
}

OutcomeCounts parse_counts(const Json& doc) {
  if (!doc.is_object()) throw InputError("", "counts document must be an object");
  const auto it = doc.find("counts");
  if (it == doc.end()) throw InputError("counts", "required field is missing");
  if (!it->is_object()) throw InputError("counts", "expected an object of label -> count");
  OutcomeCounts out;
  for (const auto& [key, value] : it->items()) {
    const auto label = OutcomeLabel::parse(key);
    if (!label) throw InputError("counts." + key, "not an outcome label");
    const auto v = as_int(value, "counts." + key);
    if (v < 0) throw InputError("counts." + key, "counts must be non-negative");
    out.add(*label, v);
  }
  return out;
}

std::vector<double> parse_axis(const std::string& spec) {
  if (spec.empty()) throw std::invalid_argument("empty axis spec");
  if (spec.rfind("lin:", 0) == 0) {
    const auto parts = split(spec.substr(4), ':');
    if (parts.size() != 3) throw std::invalid_argument("expected lin:START:STOP:COUNT");
    const double a = parse_number_token(parts[0]);
    const double b = parse_number_token(parts[1]);
    const long count = std::lround(parse_number_token(parts[2]));
    if (count < 1) throw std::invalid_argument("axis COUNT must be >= 1");
    std::vector<double> out;
    for (long i = 0; i < count; ++i)
      out.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    return out;
  }
  std::vector<double> out;
  for (const auto& tok : split(spec, ',')) out.push_back(parse_number_token(tok));
  return out;
}

std::vector<std::int64_t> parse_n_axis(const std::string& spec) {
  if (spec == "inf") return {0};
  const bool log = spec.rfind("log:", 0) == 0;
  if (log || spec.rfind("lin:", 0) == 0) {
    const auto parts = split(spec.substr(4), ':');
    if (parts.size() != 3) throw std::invalid_argument("expected log:START:STOP:COUNT");
    const double a = parse_number_token(parts[0]);
    const double b = parse_number_token(parts[1]);
    const long count = std::lround(parse_number_token(parts[2]));
    if (!(a >= 1.0) || !(b >= a) || count < 1)
      throw std::invalid_argument("n axis needs 1 <= START <= STOP and COUNT >= 1");
    std::vector<std::int64_t> out;
    for (long i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      const double v = log ? std::exp(std::log(a) + f * (std::log(b) - std::log(a))) : a + f * (b - a);
      const auto n = static_cast<std::int64_t>(std::llround(v));
      if (out.empty() || out.back() != n) out.push_back(n);
    }
    return out;
  }
  std::vector<std::int64_t> out;
  for (const auto& tok : split(spec, ',')) {
    if (tok == "inf") {
      out.push_back(0);
      continue;
    }
    const double v = parse_number_token(tok);
    if (v < 1.0 || v != std::floor(v)) throw std::invalid_argument("n must be a positive integer: " + tok);
    out.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::string out = "n,a,q0,theta1,theta2,j22,log10_j22,flag\n";
  for (const auto& r : rows) {
    out += (r.n == 0 ? std::string("inf") : std::to_string(r.n)) + ',';
    out += (r.n == 0 ? std::string("inf") : std::to_string(r.a)) + ',';
    out += format_double(r.q0) + ',' + format_double(r.theta1) + ',' + format_double(r.theta2) + ',';
    out += format_double(r.j22) + ',' + format_double(r.log10_j22) + ',' + r.flag + '\n';
  }
  return out;
}

}  // namespace anonsense
