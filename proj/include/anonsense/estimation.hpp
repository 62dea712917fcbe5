#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anonsense/config.hpp"
#include "anonsense/fisher.hpp"

namespace anonsense {

struct OutcomeCounts {
  std::vector<OutcomeLabel> labels;
  std::vector<std::int64_t> counts;

  /// Zero counts over a config's outcome labels.
  static OutcomeCounts zeros(const ProtocolConfig& config);

  std::int64_t total() const;
  std::int64_t at(const OutcomeLabel& label) const;
  /// Adds to an existing label or appends a new one.
  void add(const OutcomeLabel& label, std::int64_t count);
};

/// sum_x counts[x] log P_x(theta). Returns -infinity when an observed label
/// has model probability zero. Throws std::invalid_argument for labels the
/// config cannot produce.
double log_likelihood(const OutcomeCounts& counts, const ProtocolConfig& config,
                      const PhaseParameters& params);

struct RecoveredOmegas {
  std::vector<double> omegas;  // sorted ascending
  bool flagged = false;
  std::string note;
};

/// Inverts theta = t*omega (one sender) or (theta1, theta2) =
/// ((w1+w2)t, (w1-w2)t); flags amplitudes that are not strictly positive.
RecoveredOmegas recover_omegas(const PhaseParameters& theta_hat, double t);

struct MleOptions {
  int grid_points = 181;             // per axis over [0, pi]
  double coordinate_tolerance = 1e-10;
  int max_cycles = 2000;
};

struct EstimateReport {
  PhaseParameters theta_hat;
  RecoveredOmegas omega_hat;
  double log_likelihood = 0.0;
  std::vector<double> se_observed;  // from the observed information; NaN if not PD
  std::vector<double> se_expected;  // sqrt((J^-1)_ii / N) at theta_hat; NaN if singular
  std::int64_t N = 0;
  bool converged = false;
};

/// Maximum-likelihood estimate of theta over [0, pi]^m_est: grid search,
/// then cyclic coordinate-wise golden-section refinement. Deterministic;
/// grid ties go to the lexicographically smaller theta.
EstimateReport mle_estimate(const OutcomeCounts& counts, const ProtocolConfig& config,
                            const MleOptions& options = {});

}  // namespace anonsense
