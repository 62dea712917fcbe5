#include "anonsense/analytic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace anonsense {

namespace {

void check_gamma_args(int n, int m, int k) {
  if (n < 1) throw std::invalid_argument("gamma: n must be >= 1");
  if (k < 0 || k > n / 2)
    throw std::invalid_argument("gamma: k = " + std::to_string(k) + " outside [0," +
                                std::to_string(n / 2) + "]");
  if (m < 1 || m > (n + 1) / 2)
    throw std::invalid_argument("gamma: m = " + std::to_string(m) +
                                " outside [1, floor((n+1)/2) = " + std::to_string((n + 1) / 2) + "]");
}

// C(|R|, k-l) / (2 C(n,k)) for l in [max(0, k-|R|), min(k, m)].
std::vector<std::pair<int, double>> gamma_weights(int n, int m, int k) {
  const int rest = n - m;
  std::vector<std::pair<int, double>> out;
  for (int l = std::max(0, k - rest); l <= std::min(k, m); ++l)
    out.emplace_back(l, 0.5 * binomial_ratio(rest, k - l, n, k));
  return out;
}

}  // namespace

std::complex<double> gamma(int n, const FieldVector& fields, int k, Sign sign) {
  check_gamma_args(n, fields.m(), k);
  if (2 * k == n && sign == Sign::minus) return 0.0;
  const auto g = g_coefficients(fields, sign).values;
  std::complex<double> acc{};
  for (const auto& [l, w] : gamma_weights(n, fields.m(), k)) acc += w * g[l];
  return acc;
}

GammaTable gamma_table(int n, const FieldVector& fields) {
  check_gamma_args(n, fields.m(), 0);
  GammaTable table{n, fields.m(), {}, {}};
  const auto gp = g_coefficients(fields, Sign::plus).values;
  const auto gm = g_coefficients(fields, Sign::minus).values;
  for (int k = 0; k <= n / 2; ++k) {
    std::complex<double> p{}, q{};
    for (const auto& [l, w] : gamma_weights(n, fields.m(), k)) {
      p += w * gp[l];
      q += w * gm[l];
    }
    table.plus.push_back(p);
    table.minus.push_back(2 * k == n ? std::complex<double>{} : q);
  }
  return table;
}

AnalyticModel::AnalyticModel(const ProtocolConfig& config, int senders)
    : config_(config), m_(senders), labels_(config.outcome_labels()) {
  require_valid(config_);
  check_gamma_args(config_.n, m_, 0);

  for (const auto& label : labels_) {
    if (label.is_fail) continue;
    Projector proj{label.index, label.sign, config_.q[label.index], {}};
    const bool null_element = (2 * label.index == config_.n && label.sign == Sign::minus);
    if (!null_element && proj.q > 0.0)
      for (const auto& [l, w] : gamma_weights(config_.n, m_, label.index))
        proj.terms.push_back({l, w});
    projectors_.push_back(std::move(proj));
  }

  signs_.resize(m_ + 1);
  for (int l = 0; l <= m_; ++l)
    for (const auto& f : hw_bitstrings(m_, l)) signs_[l].push_back(sign_vector(f.bits).entries);
}

std::complex<double> AnalyticModel::amplitude(std::span<const double> phases, int k, Sign s) const {
  if (static_cast<int>(phases.size()) != m_)
    throw std::invalid_argument("AnalyticModel: expected " + std::to_string(m_) + " phases");
  for (const auto& proj : projectors_) {
    if (proj.k != k || proj.sign != s) continue;
    double acc = 0.0;
    for (const auto& term : proj.terms) {
      double sum = 0.0;
      for (const auto& r : signs_[term.weight]) {
        double theta = 0.0;
        for (int j = 0; j < m_; ++j) theta += r[j] * phases[j];
        sum += s == Sign::plus ? std::cos(0.5 * theta) : std::sin(0.5 * theta);
      }
      acc += term.factor * 2.0 * sum;
    }
    return s == Sign::plus ? std::complex<double>(acc, 0.0) : std::complex<double>(0.0, -acc);
  }
  throw std::invalid_argument("AnalyticModel: (" + std::to_string(k) + sign_char(s) +
                              ") is not an active projector");
}

std::vector<double> AnalyticModel::probabilities(std::span<const double> phases) const {
  std::vector<double> out(labels_.size(), 0.0);
  double used = 0.0;
  for (std::size_t x = 0; x < projectors_.size(); ++x) {
    const auto& proj = projectors_[x];
    if (proj.terms.empty()) continue;
    const auto g = amplitude(phases, proj.k, proj.sign);
    const double p = proj.q * std::norm(g);
    // Literal signed form +-q gamma^2 must agree with q |gamma|^2.
    assert(std::abs(sign_value(proj.sign) * proj.q * (g * g).real() - p) < 1e-12);
    out[x] = p;
    used += p;
  }
  const double rest = 1.0 - used;
  assert(rest >= -1e-12);
  out.back() = std::clamp(rest, 0.0, 1.0);
  return out;
}

AnalyticModel::Derivatives AnalyticModel::derivatives(std::span<const double> theta,
                                                      std::span<const double> phase_map,
                                                      int dim) const {
  if (static_cast<int>(theta.size()) != dim || static_cast<int>(phase_map.size()) != m_ * dim)
    throw std::invalid_argument("AnalyticModel::derivatives: shape mismatch");

  std::vector<double> phases(m_, 0.0);
  for (int j = 0; j < m_; ++j)
    for (int a = 0; a < dim; ++a) phases[j] += phase_map[j * dim + a] * theta[a];

  Derivatives out;
  out.probability.resize(labels_.size());
  out.amplitude.resize(labels_.size());
  const auto zero_jet = [dim]<typename T>(Jet<T>& jet) {
    jet.grad.assign(dim, T{});
    jet.hess.assign(dim * dim, T{});
  };
  for (auto& j : out.probability) zero_jet(j);
  for (auto& j : out.amplitude) zero_jet(j);

  std::vector<double> dtheta(dim);
  auto& fail = out.probability.back();
  fail.value = 1.0;

  for (std::size_t x = 0; x < projectors_.size(); ++x) {
    const auto& proj = projectors_[x];
    if (proj.terms.empty()) continue;
    // Real scalar r with gamma = r (plus) or gamma = -i r (minus).
    Jet<double> r;
    zero_jet(r);
    for (const auto& term : proj.terms) {
      const double w = 2.0 * term.factor;
      for (const auto& sv : signs_[term.weight]) {
        double ph = 0.0;
        for (int a = 0; a < dim; ++a) {
          double d = 0.0;
          for (int j = 0; j < m_; ++j) d += sv[j] * phase_map[j * dim + a];
          dtheta[a] = d;
        }
        for (int j = 0; j < m_; ++j) ph += sv[j] * phases[j];
        const double c = std::cos(0.5 * ph);
        const double s = std::sin(0.5 * ph);
        const double f0 = proj.sign == Sign::plus ? c : s;
        const double f1 = proj.sign == Sign::plus ? -0.5 * s : 0.5 * c;
        const double f2 = -0.25 * f0;
        r.value += w * f0;
        for (int a = 0; a < dim; ++a) {
          r.grad[a] += w * f1 * dtheta[a];
          for (int b = 0; b < dim; ++b) r.hess[a * dim + b] += w * f2 * dtheta[a] * dtheta[b];
        }
      }
    }

    const std::complex<double> unit = proj.sign == Sign::plus ? std::complex<double>(1.0, 0.0)
                                                              : std::complex<double>(0.0, -1.0);
    auto& amp = out.amplitude[x];
    amp.value = unit * r.value;
    for (int a = 0; a < dim; ++a) amp.grad[a] = unit * r.grad[a];
    for (int ab = 0; ab < dim * dim; ++ab) amp.hess[ab] = unit * r.hess[ab];

    auto& p = out.probability[x];
    p.value = proj.q * r.value * r.value;
    for (int a = 0; a < dim; ++a) p.grad[a] = 2.0 * proj.q * r.value * r.grad[a];
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        p.hess[a * dim + b] =
            2.0 * proj.q * (r.grad[a] * r.grad[b] + r.value * r.hess[a * dim + b]);

    fail.value -= p.value;
    for (int a = 0; a < dim; ++a) fail.grad[a] -= p.grad[a];
    for (int ab = 0; ab < dim * dim; ++ab) fail.hess[ab] -= p.hess[ab];
  }
  fail.value = std::clamp(fail.value, 0.0, 1.0);
  return out;
}

OutcomeDistribution outcome_distribution(const ProtocolConfig& config, const FieldVector& fields) {
  const AnalyticModel model(config, fields.m());
  const auto phases = fields.phases();
  return OutcomeDistribution{model.labels(), model.probabilities(phases)};
}

std::vector<double> phase_map_for(int m_est) {
  switch (m_est) {
    case 1:
      return {1.0};
    case 2:
      return {0.5, 0.5, 0.5, -0.5};
    default:
      throw std::invalid_argument("phase_map_for: m_est must be 1 or 2, got " +
                                  std::to_string(m_est));
  }
}

}  // namespace anonsense
