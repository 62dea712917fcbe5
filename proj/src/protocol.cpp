#include "anonsense/protocol.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "anonsense/analytic.hpp"
#include "anonsense/parallel.hpp"

namespace anonsense {

namespace {

// RNG stream ids under the run seed.
constexpr std::uint64_t kDistributerStream = 1;
constexpr std::uint64_t kMeasurerStream = 2;

// Counts per label of `dist`, drawing categorical outcomes from a per-round
// weight table chosen by `select` (round -> row index into `tables`).
template <typename Select>
std::vector<std::int64_t> count_rounds(const std::vector<std::vector<double>>& tables,
                                       std::size_t labels, std::int64_t rounds,
                                       const CounterRng& outcome_rng, Select&& select,
                                       int threads) {
  const int workers = static_cast<int>(std::clamp<std::int64_t>(rounds / 4096, 1, threads));
  std::vector<std::vector<std::int64_t>> partial(workers, std::vector<std::int64_t>(labels, 0));
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    const std::int64_t begin = rounds * static_cast<std::int64_t>(w) / workers;
    const std::int64_t end = rounds * static_cast<std::int64_t>(w + 1) / workers;
    auto& local = partial[w];
    for (std::int64_t r = begin; r < end; ++r) {
      const auto& table = tables[select(static_cast<std::uint64_t>(r))];
      ++local[sample_categorical(table, outcome_rng.uniform(static_cast<std::uint64_t>(r)))];
    }
  });
  std::vector<std::int64_t> total(labels, 0);
  for (const auto& p : partial)
    for (std::size_t x = 0; x < labels; ++x) total[x] += p[x];
  return total;
}

// --- protocol roles -------------------------------------------------------

// Prepares |phi_{i,+}> with probability q_i each round.
class Distributer {
 public:
  Distributer(const ProtocolConfig& config, std::uint64_t seed)
      : config_(config), rng_(seed, kDistributerStream) {}

  std::size_t branch(std::uint64_t round) const {
    return sample_categorical(config_.q, rng_.uniform(round));
  }
  StateVector prepare(int branch) const { return *phi_state(config_.n, branch, Sign::plus); }

 private:
  const ProtocolConfig& config_;
  CounterRng rng_;
};

// A participant imprints its local field (zero for non-senders) on its qubit.
class Participant {
 public:
  Participant(int position, double omega) : position_(position), omega_(omega) {}

  void interact(StateVector& state, double t) const {
    if (omega_ == 0.0) return;
    const double half = 0.5 * omega_ * t;
    const Amplitude on_zero = std::polar(1.0, -half);
    const Amplitude on_one = std::polar(1.0, +half);
    const std::size_t bit = std::size_t{1} << (position_ - 1);
    auto amps = state.amplitudes();
    for (std::size_t x = 0; x < amps.size(); ++x) amps[x] *= (x & bit) ? on_one : on_zero;
  }

 private:
  int position_;
  double omega_;
};

// POVM readout, estimation, broadcast.
class Measurer {
 public:
  Measurer(const ProtocolConfig& config, std::uint64_t seed)
      : config_(config), labels_(config.outcome_labels()), rng_(seed, kMeasurerStream) {
    for (const auto& label : labels_)
      projectors_.push_back(label.is_fail ? std::nullopt
                                          : phi_state(config.n, label.index, label.sign));
  }

  const std::vector<OutcomeLabel>& labels() const { return labels_; }
  const CounterRng& rng() const { return rng_; }

  std::vector<double> readout_distribution(const StateVector& state) const {
    std::vector<double> p(labels_.size(), 0.0);
    double used = 0.0;
    for (std::size_t x = 0; x + 1 < labels_.size(); ++x) {
      if (!projectors_[x]) continue;
      p[x] = std::norm(projectors_[x]->inner(state));
      used += p[x];
    }
    p.back() = std::clamp(1.0 - used, 0.0, 1.0);
    return p;
  }

  std::optional<EstimateReport> estimate(const OutcomeCounts& counts, const MleOptions& mle) const {
    if (config_.m_est != 1 && config_.m_est != 2) return std::nullopt;
    return mle_estimate(counts, config_, mle);
  }

 private:
  const ProtocolConfig& config_;
  std::vector<OutcomeLabel> labels_;
  std::vector<std::optional<StateVector>> projectors_;
  CounterRng rng_;
};

Backend resolve(Backend requested, int n) {
  if (requested != Backend::automatic) return requested;
  return n <= oracle_limit() ? Backend::oracle : Backend::analytic;
}

}  // namespace

std::string to_string(Backend backend) {
  switch (backend) {
    case Backend::automatic:
      return "auto";
    case Backend::oracle:
      return "oracle";
    case Backend::analytic:
      return "analytic";
  }
  return "auto";
}

std::optional<Backend> parse_backend(const std::string& text) {
  if (text == "auto") return Backend::automatic;
  if (text == "oracle") return Backend::oracle;
  if (text == "analytic") return Backend::analytic;
  return std::nullopt;
}

OutcomeCounts sample_counts(const OutcomeDistribution& dist, std::int64_t rounds,
                            const CounterRng& rng, int threads) {
  if (rounds < 0) throw std::invalid_argument("sample_counts: negative round count");
  const std::vector<std::vector<double>> tables{dist.probabilities};
  OutcomeCounts out;
  out.labels = dist.labels;
  out.counts = count_rounds(tables, dist.size(), rounds, rng,
                            [](std::uint64_t) { return std::size_t{0}; }, threads);
  return out;
}

Transcript run_protocol(const SenderAssignment& assign, const ProtocolConfig& config,
                        std::int64_t rounds, std::uint64_t seed, const RunOptions& options) {
  require_valid(config);
  assign.validate();
  if (assign.n != config.n)
    throw std::invalid_argument("run_protocol: assignment has n = " + std::to_string(assign.n) +
                                ", config has n = " + std::to_string(config.n));
  if (rounds < 1) throw std::invalid_argument("run_protocol: need at least one round");

  Transcript tr;
  tr.config = config;
  tr.rounds = rounds;
  tr.seed = seed;
  tr.backend = resolve(options.backend, config.n);

  const int threads = resolve_threads(options.threads);
  const Measurer measurer(config, seed);
  tr.counts.labels = measurer.labels();

  if (tr.backend == Backend::oracle) {
    const Distributer distributer(config, seed);
    std::vector<Participant> participants;
    for (int pos = 1; pos <= config.n; ++pos) {
      const auto it = std::find(assign.positions.begin(), assign.positions.end(), pos);
      participants.emplace_back(
          pos, it == assign.positions.end() ? 0.0 : assign.fields.omegas[it - assign.positions.begin()]);
    }
    // The evolution of each branch is deterministic, so the readout
    // distribution per branch is computed once and reused every round.
    std::vector<std::vector<double>> tables(config.q.size());
    for (int i = 0; i <= config.half(); ++i) {
      if (config.q[i] == 0.0) continue;
      auto state = distributer.prepare(i);
      for (const auto& p : participants) p.interact(state, assign.fields.t);
      tables[i] = measurer.readout_distribution(state);
    }
    tr.counts.counts = count_rounds(
        tables, measurer.labels().size(), rounds, measurer.rng(),
        [&](std::uint64_t r) { return distributer.branch(r); }, threads);
  } else {
    const auto dist = outcome_distribution(config, assign.fields);
    tr.counts = sample_counts(dist, rounds, measurer.rng(), threads);
  }

  tr.broadcast = measurer.estimate(tr.counts, options.mle);
  return tr;
}

Transcript eavesdropper_view(const Transcript& transcript) { return transcript; }

std::vector<std::vector<int>> sender_subsets(int n, int m) {
  if (m < 0 || m > n) throw std::invalid_argument("sender_subsets: need 0 <= m <= n");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(m);
  for (int j = 0; j < m; ++j) cur[j] = j + 1;
  while (true) {
    out.push_back(cur);
    int j = m - 1;
    while (j >= 0 && cur[j] == n - m + j + 1) --j;
    if (j < 0) break;
    ++cur[j];
    for (int i = j + 1; i < m; ++i) cur[i] = cur[i - 1] + 1;
  }
  return out;
}

namespace {

void fill_max_pair(TracelessnessReport& report, const std::vector<std::vector<int>>& subsets,
                   const std::vector<std::vector<double>>& dists) {
  report.max_tv = 0.0;
  for (std::size_t a = 0; a < dists.size(); ++a) {
    for (std::size_t b = a + 1; b < dists.size(); ++b) {
      double tv = 0.0;
      for (std::size_t x = 0; x < dists[a].size(); ++x) tv += std::abs(dists[a][x] - dists[b][x]);
      tv *= 0.5;
      if (tv > report.max_tv || report.worst_a.empty()) {
        report.max_tv = tv;
        report.worst_a = subsets[a];
        report.worst_b = subsets[b];
      }
    }
  }
}

TracelessnessReport base_report(int n, const FieldVector& fields, TracelessnessMode mode,
                                const TracelessnessOptions& options) {
  TracelessnessReport r;
  r.n = n;
  r.m = fields.m();
  r.fields = fields;
  r.mode = mode;
  r.tolerance = options.tolerance;
  return r;
}

}  // namespace

TracelessnessReport verify_tracelessness(int n, const FieldVector& fields,
                                         const ProtocolConfig& config, TracelessnessMode mode,
                                         const TracelessnessOptions& options) {
  if (config.n != n)
    throw std::invalid_argument("verify_tracelessness: config n does not match n");
  require_valid(config);
  if (n > oracle_limit()) throw OracleLimitExceeded(n, oracle_limit());

  auto report = base_report(n, fields, mode, options);
  const auto subsets = sender_subsets(n, fields.m());
  report.subsets = subsets.size();
  const int threads = resolve_threads(options.threads);

  if (mode == TracelessnessMode::exact) {
    std::vector<std::vector<double>> dists(subsets.size());
    parallel_for(subsets.size(), threads, [&](std::size_t s) {
      dists[s] = oracle_distribution(SenderAssignment{n, subsets[s], fields}, config).probabilities;
    });
    fill_max_pair(report, subsets, dists);
    report.pass = report.max_tv <= options.tolerance;
    return report;
  }

  // Sampled: one independent oracle-backed run per subset.
  const CounterRng master(options.seed, 0);
  std::vector<std::vector<std::int64_t>> table(subsets.size());
  RunOptions run;
  run.backend = Backend::oracle;
  parallel_for(subsets.size(), threads, [&](std::size_t s) {
    ProtocolConfig custom = config;
    custom.m_est = 0;  // counts only; no estimation
    const auto seed = master.split(s).bits(0);
    table[s] = run_protocol(SenderAssignment{n, subsets[s], fields}, custom, options.rounds, seed, run)
                   .counts.counts;
  });

  const std::size_t labels = table.empty() ? 0 : table[0].size();
  std::vector<double> col(labels, 0.0);
  double grand = 0.0;
  for (const auto& row : table)
    for (std::size_t x = 0; x < labels; ++x) col[x] += static_cast<double>(row[x]);
  for (double c : col) grand += c;
  std::vector<std::vector<double>> freq;
  double chi2 = 0.0;
  int used_labels = 0;
  for (double c : col) used_labels += c > 0.0 ? 1 : 0;
  for (const auto& row : table) {
    double row_total = 0.0;
    for (auto v : row) row_total += static_cast<double>(v);
    std::vector<double> f(labels);
    for (std::size_t x = 0; x < labels; ++x) {
      f[x] = static_cast<double>(row[x]) / row_total;
      if (col[x] == 0.0) continue;
      const double expected = row_total * col[x] / grand;
      const double diff = static_cast<double>(row[x]) - expected;
      chi2 += diff * diff / expected;
    }
    freq.push_back(std::move(f));
  }
  fill_max_pair(report, subsets, freq);
  const int dof = static_cast<int>(subsets.size() - 1) * std::max(used_labels - 1, 0);
  report.chi_square = chi2;
  report.dof = dof;
  report.p_value = dof > 0 ? boost::math::gamma_q(0.5 * dof, 0.5 * chi2) : 1.0;
  report.pass = *report.p_value >= options.alpha;
  return report;
}

TracelessnessReport negative_control(int n, const FieldVector& fields,
                                     const ProtocolConfig& config,
                                     const TracelessnessOptions& options) {
  if (config.n != n) throw std::invalid_argument("negative_control: config n does not match n");
  if (n > oracle_limit()) throw OracleLimitExceeded(n, oracle_limit());

  auto report = base_report(n, fields, TracelessnessMode::exact, options);
  const auto subsets = sender_subsets(n, fields.m());
  report.subsets = subsets.size();

  std::vector<Amplitude> plus(std::size_t{1} << n, Amplitude(std::pow(2.0, -0.5 * n), 0.0));
  const StateVector product(n, std::move(plus));

  std::vector<std::vector<double>> dists(subsets.size());
  parallel_for(subsets.size(), resolve_threads(options.threads), [&](std::size_t s) {
    const auto evolved = apply_sender_unitary(product, SenderAssignment{n, subsets[s], fields});
    // Hadamard on participant 1, then project onto |1>: amplitude
    // (psi[x] - psi[x|1]) / sqrt(2) for every x with bit 0 clear.
    double p1 = 0.0;
    for (std::size_t x = 0; x < evolved.dim(); x += 2)
      p1 += 0.5 * std::norm(evolved[x] - evolved[x | 1]);
    dists[s] = {p1, 1.0 - p1};
  });
  fill_max_pair(report, subsets, dists);
  report.pass = report.max_tv <= options.tolerance;
  return report;
}

double max_evolved_state_distance(int n, const FieldVector& fields, int k, int threads) {
  const auto subsets = sender_subsets(n, fields.m());
  const auto initial = phi_state(n, k, Sign::plus);
  const auto reference = apply_sender_unitary(*initial, SenderAssignment{n, subsets[0], fields});
  std::vector<double> dist(subsets.size(), 0.0);
  parallel_for(subsets.size(), resolve_threads(threads), [&](std::size_t s) {
    const auto evolved = apply_sender_unitary(*initial, SenderAssignment{n, subsets[s], fields});
    dist[s] = 1.0 - std::abs(reference.inner(evolved));
  });
  return *std::max_element(dist.begin(), dist.end());
}

}  // namespace anonsense
