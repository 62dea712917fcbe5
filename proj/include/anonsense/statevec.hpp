#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "anonsense/combinatorics.hpp"
#include "anonsense/config.hpp"

namespace anonsense {

// Dense brute-force reference path. Participant j (1-based) is bit j-1 of
// the basis-state index, so participant 1 is the least-significant bit.

using Amplitude = std::complex<double>;

class OracleLimitExceeded : public std::runtime_error {
 public:
  OracleLimitExceeded(int n, int limit);
};

/// Largest n the dense oracle accepts: 20, or ANONSENSE_ORACLE_LIMIT.
int oracle_limit();

class StateVector {
 public:
  StateVector() = default;
  /// |0...0> on n qubits; checks the oracle limit.
  explicit StateVector(int n);
  StateVector(int n, std::vector<Amplitude> amplitudes);

  int n() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const Amplitude> amplitudes() const { return amps_; }
  std::span<Amplitude> amplitudes() { return amps_; }
  Amplitude operator[](std::size_t x) const { return amps_[x]; }

  double norm_squared() const;
  /// <this|other>
  Amplitude inner(const StateVector& other) const;

 private:
  int n_ = 0;
  std::vector<Amplitude> amps_;
};

StateVector dicke_state(int n, int k);

/// (|D_k> + s|D_{n-k}>)/sqrt(2); for n = 2k returns |D_{n/2}> for s = + and
/// nothing for s = -.
std::optional<StateVector> phi_state(int n, int k, Sign sign);

/// Product of sigma_x on every qubit.
StateVector flip_all(const StateVector& state);

/// Who holds a non-zero field. positions are 1-based; positions[j] carries
/// fields.omegas[j].
struct SenderAssignment {
  int n = 0;
  std::vector<int> positions;
  FieldVector fields;

  int m() const { return static_cast<int>(positions.size()); }
  /// Throws std::invalid_argument on duplicate/out-of-range positions, a
  /// size mismatch with fields, or m > floor((n+1)/2).
  void validate() const;
};

/// |x> -> exp(-(i t / 2) sum_j omega_j (-1)^{x_{s_j}}) |x>
StateVector apply_sender_unitary(const StateVector& state,
                                 const SenderAssignment& assign);

/// P_{i,s} = c_{i,s} sum_{i'} q_{i'} |<phi_{i,s}|U|phi_{i',+}>|^2 by dense
/// inner products, P_f = 1 - sum.
OutcomeDistribution oracle_distribution(const SenderAssignment& assign,
                                        const ProtocolConfig& config);

/// Same distribution split by the distributer's branch: row i' holds the
/// outcome distribution given the initial state |phi_{i',+}>. Rows with
/// q_{i'} = 0 are left empty.
std::vector<OutcomeDistribution> oracle_branch_distributions(
    const SenderAssignment& assign, const ProtocolConfig& config);

}  // namespace anonsense
