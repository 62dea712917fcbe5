#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anonsense/combinatorics.hpp"

namespace anonsense {

/// Measurement outcome: a projector (index, sign) or the complement "f".
struct OutcomeLabel {
  bool is_fail = false;
  int index = 0;
  Sign sign = Sign::plus;

  static OutcomeLabel povm(int i, Sign s) { return {false, i, s}; }
  static OutcomeLabel fail() { return {true, 0, Sign::plus}; }

  /// "0+", "2-", "f"
  std::string to_string() const;
  static std::optional<OutcomeLabel> parse(const std::string& text);

  friend bool operator==(const OutcomeLabel&, const OutcomeLabel&) = default;
};

/// Protocol parameters shared by the distributer and the measurer.
///
/// m_est selects the preset the measurer estimates with: 1 (GHZ readout),
/// 2 (the c_{0,+-} = c_{a,+} = 1 layout) or 0 for a custom POVM used only for
/// distribution-level analysis.
struct ProtocolConfig {
  int n = 0;
  int m_est = 0;
  double t = 1.0;
  int a = 0;
  std::vector<double> q;               // size n/2 + 1
  std::vector<std::array<bool, 2>> c;  // c[i][0] = c_{i,+}, c[i][1] = c_{i,-}

  int half() const { return n / 2; }
  bool povm(int i, Sign s) const { return c[i][s == Sign::plus ? 0 : 1]; }
  void set_povm(int i, Sign s, bool on) { c[i][s == Sign::plus ? 0 : 1] = on; }

  /// Projector labels with c = 1, ordered by (index, +, -), then "f".
  std::vector<OutcomeLabel> outcome_labels() const;

  /// All-zero POVM with the given n; q and c sized accordingly.
  static ProtocolConfig blank(int n, double t = 1.0);
  /// GHZ preset: c_{0,+} = 1, q_0 = 1.
  static ProtocolConfig single_sender(int n, double t = 1.0);
  /// c_{0,+} = c_{0,-} = c_{a,+} = 1, q_0 + q_a = 1.
  static ProtocolConfig two_sender(int n, int a, double q0, double t = 1.0);
};

struct Violation {
  std::string invariant;
  std::string detail;
};

/// Every broken ProtocolConfig invariant; empty means the config is usable.
std::vector<Violation> validate_config(const ProtocolConfig& config);

/// Probabilities over a config's outcome labels, in outcome_labels() order.
struct OutcomeDistribution {
  std::vector<OutcomeLabel> labels;
  std::vector<double> probabilities;

  std::size_t size() const { return labels.size(); }
  /// Probability of a label; 0 for labels not in the set.
  double at(const OutcomeLabel& label) const;
  double total() const;
};

/// Total-variation distance, sum |p - q| / 2. Labels must match in order.
double total_variation(const OutcomeDistribution& p, const OutcomeDistribution& q);

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Throws ConfigError when validate_config reports anything.
void require_valid(const ProtocolConfig& config);

}  // namespace anonsense
