#include "anonsense/config.hpp"

#include <cmath>
#include <numeric>

namespace anonsense {

std::string OutcomeLabel::to_string() const {
  if (is_fail) return "f";
  return std::to_string(index) + sign_char(sign);
}

std::optional<OutcomeLabel> OutcomeLabel::parse(const std::string& text) {
  if (text == "f") return fail();
  if (text.size() < 2) return std::nullopt;
  const char s = text.back();
  if (s != '+' && s != '-') return std::nullopt;
  int value = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char ch = text[i];
    if (ch < '0' || ch > '9' || value > 100000000) return std::nullopt;
    value = value * 10 + (ch - '0');
  }
  return povm(value, s == '+' ? Sign::plus : Sign::minus);
}

std::vector<OutcomeLabel> ProtocolConfig::outcome_labels() const {
  std::vector<OutcomeLabel> out;
  for (int i = 0; i < static_cast<int>(c.size()); ++i)
    for (Sign s : {Sign::plus, Sign::minus})
      if (povm(i, s)) out.push_back(OutcomeLabel::povm(i, s));
  out.push_back(OutcomeLabel::fail());
  return out;
}

ProtocolConfig ProtocolConfig::blank(int n, double t) {
  ProtocolConfig cfg;
  cfg.n = n;
  cfg.t = t;
  const int size = n >= 0 ? n / 2 + 1 : 0;
  cfg.q.assign(size, 0.0);
  cfg.c.assign(size, {false, false});
  return cfg;
}

ProtocolConfig ProtocolConfig::single_sender(int n, double t) {
  auto cfg = blank(n, t);
  cfg.m_est = 1;
  if (!cfg.q.empty()) {
    cfg.q[0] = 1.0;
    cfg.c[0] = {true, false};
  }
  return cfg;
}

ProtocolConfig ProtocolConfig::two_sender(int n, int a, double q0, double t) {
  auto cfg = blank(n, t);
  cfg.m_est = 2;
  cfg.a = a;
  if (!cfg.q.empty()) {
    cfg.q[0] = q0;
    cfg.c[0] = {true, true};
  }
  if (a > 0 && a < static_cast<int>(cfg.q.size())) {
    cfg.q[a] = 1.0 - q0;
    cfg.c[a][0] = true;
  }
  return cfg;
}

std::vector<Violation> validate_config(const ProtocolConfig& cfg) {
  std::vector<Violation> out;
  auto add = [&](std::string inv, std::string detail) {
    out.push_back({std::move(inv), std::move(detail)});
  };

  if (cfg.n < 1) {
    add("n >= 1", "n = " + std::to_string(cfg.n));
    return out;
  }
  if (!(cfg.t > 0.0) || !std::isfinite(cfg.t))
    add("t > 0", "t = " + std::to_string(cfg.t));
  if (cfg.m_est < 0 || cfg.m_est > 2)
    add("m_est in {0,1,2}", "m_est = " + std::to_string(cfg.m_est));

  const std::size_t size = static_cast<std::size_t>(cfg.half()) + 1;
  if (cfg.q.size() != size || cfg.c.size() != size) {
    add("q and c have floor(n/2)+1 entries",
        "expected " + std::to_string(size) + ", got q:" +
            std::to_string(cfg.q.size()) + " c:" + std::to_string(cfg.c.size()));
    return out;
  }

  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    if (!(cfg.q[i] >= 0.0) || !std::isfinite(cfg.q[i]))
      add("q_i >= 0", "q[" + std::to_string(i) + "] = " + std::to_string(cfg.q[i]));
    total += cfg.q[i];
    if (!cfg.c[i][0] && !cfg.c[i][1] && cfg.q[i] != 0.0)
      add("q_i = 0 when c_{i,+} = c_{i,-} = 0",
          "q[" + std::to_string(i) + "] = " + std::to_string(cfg.q[i]));
  }
  if (std::abs(total - 1.0) > 1e-12)
    add("sum q_i = 1", "sum = " + std::to_string(total));

  if (cfg.m_est == 1) {
    for (std::size_t i = 0; i < size; ++i) {
      const bool plus_expected = (i == 0);
      if (cfg.c[i][0] != plus_expected || cfg.c[i][1])
        add("m_est=1 preset: c_{0,+} = 1, all other c = 0",
            "index " + std::to_string(i));
    }
    if (std::abs(cfg.q[0] - 1.0) > 1e-12)
      add("m_est=1 preset: q_0 = 1", "q[0] = " + std::to_string(cfg.q[0]));
  } else if (cfg.m_est == 2) {
    if (cfg.n < 5) add("m_est=2 preset: n >= 5 required", "n = " + std::to_string(cfg.n));
    if (cfg.a < 2 || cfg.a > cfg.half()) {
      add("m_est=2 preset: 2 <= a <= floor(n/2)", "a = " + std::to_string(cfg.a));
    } else {
      for (std::size_t i = 0; i < size; ++i) {
        const bool plus_expected = (i == 0) || (static_cast<int>(i) == cfg.a);
        const bool minus_expected = (i == 0);
        if (cfg.c[i][0] != plus_expected || cfg.c[i][1] != minus_expected)
          add("m_est=2 preset: c_{0,+} = c_{0,-} = c_{a,+} = 1, all other c = 0",
              "index " + std::to_string(i));
      }
      if (std::abs(cfg.q[0] + cfg.q[cfg.a] - 1.0) > 1e-12)
        add("m_est=2 preset: q_0 + q_a = 1",
            "q_0 + q_a = " + std::to_string(cfg.q[0] + cfg.q[cfg.a]));
    }
  }
  return out;
}

double OutcomeDistribution::at(const OutcomeLabel& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return probabilities[i];
  return 0.0;
}

double OutcomeDistribution::total() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

double total_variation(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  if (p.labels != q.labels)
    throw std::invalid_argument("total_variation: outcome label sets differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    acc += std::abs(p.probabilities[i] - q.probabilities[i]);
  return 0.5 * acc;
}

namespace {
std::string summarize(const std::vector<Violation>& v) {
  std::string msg = "invalid protocol config:";
  for (const auto& x : v) msg += " [" + x.invariant + ": " + x.detail + "]";
  return msg;
}
}  // namespace

ConfigError::ConfigError(std::vector<Violation> violations)
    : std::invalid_argument(summarize(violations)),
      violations_(std::move(violations)) {}

void require_valid(const ProtocolConfig& config) {
  auto v = validate_config(config);
  if (!v.empty()) throw ConfigError(std::move(v));
}

}  // namespace anonsense
