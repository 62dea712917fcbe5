#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anonsense/config.hpp"

namespace anonsense {

/// theta for one sender, (theta1, theta2) = ((w1+w2)t, (w1-w2)t) for two.
struct PhaseParameters {
  int m_est = 1;
  std::vector<double> theta;

  static PhaseParameters single(double theta) { return {1, {theta}}; }
  static PhaseParameters pair(double theta1, double theta2) { return {2, {theta1, theta2}}; }
  /// Phases of a two-sender field vector (or theta = t*omega for one).
  static PhaseParameters from_fields(const FieldVector& fields);

  /// Per-sender phases t*omega_j.
  std::vector<double> sender_phases() const;
};

enum class DerivativeMethod { analytic, finite_difference };

std::string to_string(DerivativeMethod method);

struct FisherResult {
  Eigen::MatrixXd J;
  Eigen::MatrixXd J_inv;
  std::vector<double> crb_diag;  // (J^{-1})_{ii} / N
  std::int64_t N = 1;
  DerivativeMethod method = DerivativeMethod::analytic;
};

/// J has a (numerically) null direction, e.g. theta2 = 0 for two senders.
class UnidentifiableDirection : public std::runtime_error {
 public:
  UnidentifiableDirection(const std::string& what, std::vector<double> null_vector,
                          double condition_number);
  const std::vector<double>& null_vector() const { return null_vector_; }
  double condition_number() const { return condition_; }

 private:
  std::vector<double> null_vector_;
  double condition_;
};

/// An outcome with p = 0 but a non-vanishing derivative: the Fisher
/// information is infinite there.
class SingularFisherTerm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kFisherConditionLimit = 1e12;
inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Fisher matrix only; no inversion.
Eigen::MatrixXd fisher_information(const ProtocolConfig& config, const PhaseParameters& params,
                                   DerivativeMethod method = DerivativeMethod::analytic);

/// J_{ij} = sum_x (d_i p_x)(d_j p_x)/p_x with respect to theta, its inverse
/// and the Cramer-Rao diagonal for N shots.
FisherResult fisher_matrix(const ProtocolConfig& config, const PhaseParameters& params,
                           DerivativeMethod method = DerivativeMethod::analytic,
                           std::int64_t shots = 1);

/// Bound on Cov(omega_hat) from a theta-space result, via the linear map
/// theta = A (t omega). Not part of the theta-space analysis itself; it is a
/// change of variables provided for convenience.
Eigen::MatrixXd omega_covariance_bound(const FisherResult& result, double t);

/// 2a(n-a) / (n(n-1)).
double dilution(std::int64_t n, std::int64_t a);

/// (J^{-1})_{2,2} for the two-sender preset in closed form.
double closed_form_j22(std::int64_t n, std::int64_t a, double q0, double theta1, double theta2);

/// floor(n/2), the POVM index minimizing (J^{-1})_{2,2}.
std::int64_t optimal_a(std::int64_t n);

/// n -> infinity limit of closed_form_j22(n, floor(n/2), ...).
double limit_j22(double q0, double theta1, double theta2);

/// (J^{-1})_{2,2} diverges at theta2 = 0.
class DivergentBound : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Grid over (n, q0, theta1, theta2). n = 0 in `ns` stands for n -> infinity.
/// a defaults to floor(n/2) unless `a` is set.
struct ScanSpec {
  std::vector<std::int64_t> ns;
  std::vector<double> q0s;
  std::vector<double> theta1s;
  std::vector<double> theta2s;
  std::optional<std::int64_t> a;
};

struct ScanRow {
  std::int64_t n = 0;  // 0 = infinity
  std::int64_t a = 0;  // 0 = not applicable (infinite n)
  double q0 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double j22 = 0.0;
  double log10_j22 = 0.0;
  std::string flag;  // "ok", "divergent" or "invalid"
};

/// Rows in grid-index order: n outermost, then q0, theta1, theta2.
std::vector<ScanRow> scan_j22(const ScanSpec& spec, int threads = 1);

}  // namespace anonsense
