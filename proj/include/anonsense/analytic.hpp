#pragma once

#include <complex>
#include <span>
#include <vector>

#include "anonsense/combinatorics.hpp"
#include "anonsense/config.hpp"

namespace anonsense {

/// gamma^{n,m}_{k,s} = <phi_{k,+}|U|phi_{k,s}>, evaluated through the
/// g-coefficient sum; it depends on the number of senders but not on who
/// they are.
std::complex<double> gamma(int n, const FieldVector& fields, int k, Sign sign);

/// gamma for every k in [0, n/2] and both signs.
struct GammaTable {
  int n = 0;
  int m = 0;
  std::vector<std::complex<double>> plus;
  std::vector<std::complex<double>> minus;

  std::complex<double> at(int k, Sign s) const { return s == Sign::plus ? plus[k] : minus[k]; }
};

GammaTable gamma_table(int n, const FieldVector& fields);

/// Closed-form outcome distribution. fields carries the true sender count,
/// which may differ from config.m_est.
OutcomeDistribution outcome_distribution(const ProtocolConfig& config, const FieldVector& fields);

/// Value, gradient and Hessian of a scalar with respect to the estimation
/// parameters. hess is row-major, size dim*dim.
template <typename T>
struct Jet {
  T value{};
  std::vector<T> grad;
  std::vector<T> hess;
};

/// Precomputed closed-form model for a fixed (config, sender count).
///
/// The per-sender phases t*omega_j are a linear function of the estimation
/// parameters, phases = phase_map * theta (phase_map is m x dim,
/// row-major). The model caches the exact binomial weights and sign
/// patterns so that repeated evaluation, as in likelihood maximization, does
/// not repeat any big-integer work.
class AnalyticModel {
 public:
  AnalyticModel(const ProtocolConfig& config, int senders);

  const ProtocolConfig& config() const { return config_; }
  int senders() const { return m_; }
  const std::vector<OutcomeLabel>& labels() const { return labels_; }

  /// Probabilities at the given per-sender phases, in labels() order.
  std::vector<double> probabilities(std::span<const double> phases) const;

  /// gamma_{k,s} at the given phases for an active projector.
  std::complex<double> amplitude(std::span<const double> phases, int k, Sign s) const;

  /// Per-label probability jets plus, for projector labels, the amplitude
  /// jets. The amplitude of the "f" label is left zero.
  struct Derivatives {
    std::vector<Jet<double>> probability;
    std::vector<Jet<std::complex<double>>> amplitude;
  };
  Derivatives derivatives(std::span<const double> theta, std::span<const double> phase_map,
                          int dim) const;

 private:
  struct Term {
    int weight;     // l: ones among the sender bits
    double factor;  // C(n-m, k-l) / (2 C(n,k))
  };
  struct Projector {
    int k;
    Sign sign;
    double q;
    std::vector<Term> terms;
  };

  ProtocolConfig config_;
  int m_;
  std::vector<OutcomeLabel> labels_;
  std::vector<Projector> projectors_;                 // parallel to labels_ minus "f"
  std::vector<std::vector<std::vector<int>>> signs_;  // [l][p][j] = +-1
};

/// Phase map for the (theta1, theta2) parameterization of two senders:
/// t*omega_1 = (theta1 + theta2)/2, t*omega_2 = (theta1 - theta2)/2.
/// For one sender theta = t*omega.
std::vector<double> phase_map_for(int m_est);

}  // namespace anonsense
