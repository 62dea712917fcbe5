#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anonsense/config.hpp"
#include "anonsense/estimation.hpp"
#include "anonsense/rng.hpp"
#include "anonsense/statevec.hpp"

namespace anonsense {

enum class Backend { automatic, oracle, analytic };

std::string to_string(Backend backend);
std::optional<Backend> parse_backend(const std::string& text);

/// Everything classical the protocol produces: what the measurer saw and
/// what it broadcast. The type has no member that can hold sender
/// positions, which is exactly the information the protocol must hide.
struct Transcript {
  ProtocolConfig config;
  std::int64_t rounds = 0;
  std::uint64_t seed = 0;
  Backend backend = Backend::analytic;  // resolved, never automatic
  OutcomeCounts counts;
  std::optional<EstimateReport> broadcast;  // absent for custom POVMs
};

struct RunOptions {
  Backend backend = Backend::automatic;
  int threads = 1;
  MleOptions mle;
};

/// One full run: the distributer prepares |phi_{i,+}> (i drawn with weight
/// q_i), participants imprint their local fields, the measurer applies the
/// POVM, repeats for N rounds, estimates theta and broadcasts; participants
/// then read the field amplitudes off the broadcast.
///
/// Round r uses draws at counter r of fixed streams derived from `seed`, so
/// the transcript does not depend on the worker count.
Transcript run_protocol(const SenderAssignment& assign, const ProtocolConfig& config,
                        std::int64_t rounds, std::uint64_t seed, const RunOptions& options = {});

/// Eve's view: all classical information, i.e. the transcript itself.
Transcript eavesdropper_view(const Transcript& transcript);

/// Multinomial counts drawn round by round from a distribution.
OutcomeCounts sample_counts(const OutcomeDistribution& dist, std::int64_t rounds,
                            const CounterRng& rng, int threads = 1);

/// All m-subsets of {1..n} in lexicographic order.
std::vector<std::vector<int>> sender_subsets(int n, int m);

enum class TracelessnessMode { exact, sampled };

struct TracelessnessOptions {
  double tolerance = 1e-10;      // exact mode: max allowed TV distance
  std::int64_t rounds = 100000;  // sampled mode: rounds per subset
  std::uint64_t seed = 0;
  double alpha = 1e-3;  // sampled mode: pass iff p-value >= alpha
  int threads = 1;
};

struct TracelessnessReport {
  int n = 0;
  int m = 0;
  FieldVector fields;
  TracelessnessMode mode = TracelessnessMode::exact;
  std::size_t subsets = 0;
  double max_tv = 0.0;  // max over all subset pairs
  std::vector<int> worst_a, worst_b;
  double tolerance = 0.0;
  std::optional<double> chi_square;
  std::optional<int> dof;
  std::optional<double> p_value;
  bool pass = false;
};

/// Compares the outcome distributions produced by every placement of the
/// senders. Exact mode uses the dense oracle; sampled mode runs a
/// chi-square homogeneity test on oracle-sampled counts.
TracelessnessReport verify_tracelessness(int n, const FieldVector& fields,
                                         const ProtocolConfig& config, TracelessnessMode mode,
                                         const TracelessnessOptions& options = {});

/// Verifier sensitivity check: the same subset sweep on a deliberately
/// position-revealing setup (unentangled |+>^n sensors, participant 1 read
/// out in the Hadamard basis, outcome |1>). Leakage shows up as pass = false.
TracelessnessReport negative_control(int n, const FieldVector& fields,
                                     const ProtocolConfig& config,
                                     const TracelessnessOptions& options = {});

/// max over sender subsets of 1 - |<psi_S|psi_S0>| for the evolved pure
/// state U_S|phi_{k,+}>; zero means even state tomography reveals nothing.
double max_evolved_state_distance(int n, const FieldVector& fields, int k, int threads = 1);

}  // namespace anonsense
