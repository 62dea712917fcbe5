#include "anonsense/statevec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <string>

namespace anonsense {

OracleLimitExceeded::OracleLimitExceeded(int n, int limit)
    : std::runtime_error("oracle limit exceeded: n = " + std::to_string(n) +
                         " > " + std::to_string(limit) +
                         " (set ANONSENSE_ORACLE_LIMIT to raise)") {}

int oracle_limit() {
  if (const char* env = std::getenv("ANONSENSE_ORACLE_LIMIT")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 40) return static_cast<int>(v);
  }
  return 20;
}

namespace {

void check_n(int n) {
  if (n < 1) throw std::invalid_argument("state vector needs n >= 1");
  const int limit = oracle_limit();
  if (n > limit) throw OracleLimitExceeded(n, limit);
}

}  // namespace

StateVector::StateVector(int n) : n_(n) {
  check_n(n);
  amps_.assign(std::size_t{1} << n, Amplitude{});
  amps_[0] = 1.0;
}

StateVector::StateVector(int n, std::vector<Amplitude> amplitudes)
    : n_(n), amps_(std::move(amplitudes)) {
  check_n(n);
  if (amps_.size() != (std::size_t{1} << n))
    throw std::invalid_argument("StateVector: amplitude count is not 2^n");
}

double StateVector::norm_squared() const {
  double acc = 0.0;
  for (const auto& a : amps_) acc += std::norm(a);
  return acc;
}

Amplitude StateVector::inner(const StateVector& other) const {
  if (other.n_ != n_) throw std::invalid_argument("inner: qubit count mismatch");
  Amplitude acc{};
  for (std::size_t x = 0; x < amps_.size(); ++x) acc += std::conj(amps_[x]) * other.amps_[x];
  return acc;
}

StateVector dicke_state(int n, int k) {
  check_n(n);
  if (k < 0 || k > n)
    throw std::invalid_argument("dicke_state: k = " + std::to_string(k) +
                                " outside [0," + std::to_string(n) + "]");
  std::vector<Amplitude> amps(std::size_t{1} << n);
  const double a = 1.0 / std::sqrt(binomial(n, k).convert_to<double>());
  for (std::size_t x = 0; x < amps.size(); ++x)
    if (std::popcount(x) == k) amps[x] = a;
  return StateVector(n, std::move(amps));
}

std::optional<StateVector> phi_state(int n, int k, Sign sign) {
  if (k < 0 || k > n / 2)
    throw std::invalid_argument("phi_state: k = " + std::to_string(k) +
                                " outside [0," + std::to_string(n / 2) + "]");
  if (2 * k == n) {
    if (sign == Sign::minus) return std::nullopt;
    return dicke_state(n, k);
  }
  auto lo = dicke_state(n, k);
  const auto hi = dicke_state(n, n - k);
  const double s = sign_value(sign) / std::sqrt(2.0);
  auto out = lo.amplitudes();
  auto in = hi.amplitudes();
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = out[x] / std::sqrt(2.0) + s * in[x];
  return lo;
}

StateVector flip_all(const StateVector& state) {
  const std::size_t mask = state.dim() - 1;
  std::vector<Amplitude> amps(state.dim());
  for (std::size_t x = 0; x < state.dim(); ++x) amps[x ^ mask] = state[x];
  return StateVector(state.n(), std::move(amps));
}

void SenderAssignment::validate() const {
  if (n < 1) throw std::invalid_argument("sender assignment: n must be >= 1");
  if (static_cast<int>(positions.size()) != fields.m())
    throw std::invalid_argument("sender assignment: " + std::to_string(positions.size()) +
                                " positions but " + std::to_string(fields.m()) +
                                " field amplitudes");
  if (m() > (n + 1) / 2)
    throw std::invalid_argument("sender assignment: m = " + std::to_string(m()) +
                                " exceeds floor((n+1)/2) = " + std::to_string((n + 1) / 2));
  std::vector<int> sorted = positions;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    if (sorted[j] < 1 || sorted[j] > n)
      throw std::invalid_argument("sender assignment: position " + std::to_string(sorted[j]) +
                                  " outside [1," + std::to_string(n) + "]");
    if (j > 0 && sorted[j] == sorted[j - 1])
      throw std::invalid_argument("sender assignment: duplicate position " +
                                  std::to_string(sorted[j]));
  }
}

StateVector apply_sender_unitary(const StateVector& state, const SenderAssignment& assign) {
  assign.validate();
  if (state.n() != assign.n)
    throw std::invalid_argument("apply_sender_unitary: state has " + std::to_string(state.n()) +
                                " qubits, assignment has " + std::to_string(assign.n));
  // Each sender contributes a single-qubit phase factor; the diagonal of U
  // is their product.
  std::vector<Amplitude> amps(state.amplitudes().begin(), state.amplitudes().end());
  for (int j = 0; j < assign.m(); ++j) {
    const double half = 0.5 * assign.fields.t * assign.fields.omegas[j];
    const Amplitude on_zero = std::polar(1.0, -half);
    const Amplitude on_one = std::polar(1.0, +half);
    const std::size_t bit = std::size_t{1} << (assign.positions[j] - 1);
    for (std::size_t x = 0; x < amps.size(); ++x) amps[x] *= (x & bit) ? on_one : on_zero;
  }
  return StateVector(state.n(), std::move(amps));
}

std::vector<OutcomeDistribution> oracle_branch_distributions(const SenderAssignment& assign,
                                                             const ProtocolConfig& config) {
  require_valid(config);
  assign.validate();
  if (assign.n != config.n)
    throw std::invalid_argument("oracle_distribution: assignment n = " + std::to_string(assign.n) +
                                " but config n = " + std::to_string(config.n));
  check_n(config.n);

  const auto labels = config.outcome_labels();
  std::vector<std::optional<StateVector>> projectors;
  for (const auto& label : labels)
    projectors.push_back(label.is_fail ? std::nullopt
                                       : phi_state(config.n, label.index, label.sign));

  std::vector<OutcomeDistribution> branches(config.q.size());
  for (int ip = 0; ip <= config.half(); ++ip) {
    if (config.q[ip] == 0.0) continue;
    const auto evolved = apply_sender_unitary(*phi_state(config.n, ip, Sign::plus), assign);
    auto& d = branches[ip];
    d.labels = labels;
    d.probabilities.assign(labels.size(), 0.0);
    double used = 0.0;
    for (std::size_t x = 0; x + 1 < labels.size(); ++x) {
      if (!projectors[x]) continue;  // the null (n/2, -) element
      const double p = std::norm(projectors[x]->inner(evolved));
      d.probabilities[x] = p;
      used += p;
    }
    d.probabilities.back() = std::clamp(1.0 - used, 0.0, 1.0);
  }
  return branches;
}

OutcomeDistribution oracle_distribution(const SenderAssignment& assign,
                                        const ProtocolConfig& config) {
  const auto branches = oracle_branch_distributions(assign, config);
  OutcomeDistribution out;
  out.labels = config.outcome_labels();
  out.probabilities.assign(out.labels.size(), 0.0);
  double used = 0.0;
  for (std::size_t ip = 0; ip < branches.size(); ++ip) {
    if (branches[ip].labels.empty()) continue;
    for (std::size_t x = 0; x + 1 < out.labels.size(); ++x)
      out.probabilities[x] += config.q[ip] * branches[ip].probabilities[x];
  }
  for (std::size_t x = 0; x + 1 < out.labels.size(); ++x) used += out.probabilities[x];
  out.probabilities.back() = std::clamp(1.0 - used, 0.0, 1.0);
  return out;
}

}  // namespace anonsense
