#include "doctest.h"

#include <cmath>
#include <numbers>

#include "anonsense/analytic.hpp"
#include "anonsense/estimation.hpp"
#include "anonsense/protocol.hpp"
#include "anonsense/rng.hpp"
#include "support.hpp"

using namespace anonsense;

namespace {

OutcomeCounts single_counts(std::int64_t hits, std::int64_t misses) {
  OutcomeCounts c;
  c.add(OutcomeLabel::povm(0, Sign::plus), hits);
  c.add(OutcomeLabel::fail(), misses);
  return c;
}

}  // namespace

TEST_CASE("log-likelihood edge cases") {
  const auto cfg = ProtocolConfig::single_sender(3);
  CHECK(log_likelihood(single_counts(100, 0), cfg, PhaseParameters::single(0.0)) == 0.0);
  CHECK(log_likelihood(single_counts(0, 0), cfg, PhaseParameters::single(1.0)) == 0.0);
  CHECK(std::isinf(log_likelihood(single_counts(3, 1), cfg, PhaseParameters::single(0.0))));
  OutcomeCounts wrong;
  wrong.add(OutcomeLabel::povm(1, Sign::plus), 4);
  CHECK_THROWS(log_likelihood(wrong, cfg, PhaseParameters::single(0.5)));
}

TEST_CASE("single-sender likelihood is unimodal on [0, pi]") {
  const auto cfg = ProtocolConfig::single_sender(2);
  testsupport::Gen g(53);
  for (int trial = 0; trial < 10; ++trial) {
    const auto counts = single_counts(g.integer(1, 500), g.integer(1, 500));
    int turns = 0;
    double prev = log_likelihood(counts, cfg, PhaseParameters::single(0.0));
    int dir = 0;
    for (int i = 1; i <= 10000; ++i) {
      const double v = log_likelihood(counts, cfg, PhaseParameters::single(std::numbers::pi * i / 10000));
      const int d = v > prev ? 1 : (v < prev ? -1 : 0);
      if (d != 0 && dir != 0 && d != dir) ++turns;
      if (d != 0) dir = d;
      prev = v;
    }
    CHECK(turns <= 1);
  }
}

TEST_CASE("single-sender MLE equals the binomial argmax") {
  const auto cfg = ProtocolConfig::single_sender(4);
  const auto half = mle_estimate(single_counts(500, 500), cfg);
  CHECK(half.theta_hat.theta[0] == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
  CHECK(half.converged);
  CHECK(half.N == 1000);

  const auto all = mle_estimate(single_counts(1000, 0), cfg);
  CHECK(all.theta_hat.theta[0] == 0.0);
  CHECK(all.omega_hat.flagged);

  testsupport::Gen g(59);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = g.integer(10, 5000);
    const int k = g.integer(1, n - 1);
    const auto r = mle_estimate(single_counts(k, n - k), cfg);
    const double expect = 2.0 * std::acos(std::sqrt(static_cast<double>(k) / n));
    CHECK(r.theta_hat.theta[0] == doctest::Approx(expect).epsilon(1e-9));
    // Binomial observed information at the optimum equals the expected one.
    CHECK(r.se_observed[0] == doctest::Approx(r.se_expected[0]).epsilon(1e-6));
  }
}

TEST_CASE("MLE rejects empty and mismatched counts") {
  CHECK_THROWS(mle_estimate(single_counts(0, 0), ProtocolConfig::single_sender(3)));
  auto custom = ProtocolConfig::blank(3);
  custom.q[0] = 1.0;
  custom.set_povm(0, Sign::plus, true);
  CHECK_THROWS(mle_estimate(single_counts(1, 1), custom));
}

TEST_CASE("two-sender MLE lands within 5 standard errors") {
  const auto cfg = ProtocolConfig::two_sender(10, 5, 0.33, 1.0);
  const auto truth = PhaseParameters::pair(2.0, 0.5);
  const AnalyticModel model(cfg, 2);
  const auto p = model.probabilities(truth.sender_phases());
  const OutcomeDistribution dist{model.labels(), p};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto counts = sample_counts(dist, 100000, CounterRng(seed, 9), 1);
    const auto r = mle_estimate(counts, cfg);
    REQUIRE(r.converged);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(r.theta_hat.theta[i] - truth.theta[i]) < 5.0 * r.se_expected[i]);
  }
}

TEST_CASE("recover_omegas") {
  const auto w = recover_omegas(PhaseParameters::pair(2.0, 0.5), 1.0);
  CHECK(w.omegas[0] == doctest::Approx(0.75));
  CHECK(w.omegas[1] == doctest::Approx(1.25));
  CHECK_FALSE(w.flagged);
  const auto flipped = recover_omegas(PhaseParameters::pair(2.0, -0.5), 1.0);
  CHECK(flipped.omegas == w.omegas);

  const auto zero = recover_omegas(PhaseParameters::single(0.0), 1.0);
  CHECK(zero.omegas[0] == 0.0);
  CHECK(zero.flagged);

  testsupport::Gen g(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = g.fields(2);
    const auto back = recover_omegas(PhaseParameters::from_fields(f), f.t);
    for (int j = 0; j < 2; ++j) CHECK(back.omegas[j] == doctest::Approx(f.omegas[j]).epsilon(1e-14));
  }
}
