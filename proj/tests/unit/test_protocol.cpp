#include "doctest.h"

#include <cmath>
#include <numbers>

#include "anonsense/analytic.hpp"
#include "anonsense/io.hpp"
#include "anonsense/protocol.hpp"
#include "anonsense/rng.hpp"
#include "support.hpp"

using namespace anonsense;

TEST_CASE("counter RNG is a pure function of (seed, stream, counter)") {
  const CounterRng a(42, 1), b(42, 1), c(42, 2), d(43, 1);
  for (std::uint64_t i = 0; i < 100; ++i) {
    CHECK(a.bits(i) == b.bits(i));
    CHECK(a.bits(i) != c.bits(i));
    CHECK(a.bits(i) != d.bits(i));
    const double u = a.uniform(i);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(a.split(3).bits(0) == b.split(3).bits(0));
  CHECK(a.split(3).bits(0) != a.split(4).bits(0));
}

TEST_CASE("counter RNG uniforms look uniform") {
  const CounterRng r(7, 0);
  const int bins = 20, draws = 200000;
  std::vector<int> hist(bins, 0);
  for (int i = 0; i < draws; ++i) ++hist[static_cast<int>(r.uniform(i) * bins)];
  double chi2 = 0.0;
  const double expect = static_cast<double>(draws) / bins;
  for (int h : hist) chi2 += (h - expect) * (h - expect) / expect;
  CHECK(chi2 < 50.0);  // 19 dof; p ~ 1e-4
}

TEST_CASE("categorical sampling skips zero weights") {
  const std::vector<double> w{0.0, 1.0, 0.0, 3.0};
  CHECK(sample_categorical(w, 0.0) == 1);
  CHECK(sample_categorical(w, 0.2499) == 1);
  CHECK(sample_categorical(w, 0.25) == 3);
  CHECK(sample_categorical(w, 0.999999) == 3);
}

TEST_CASE("sender subsets") {
  const auto s = sender_subsets(5, 2);
  REQUIRE(s.size() == 10);
  CHECK(s.front() == std::vector<int>{1, 2});
  CHECK(s[1] == std::vector<int>{1, 3});
  CHECK(s.back() == std::vector<int>{4, 5});
}

TEST_CASE("single sender at theta = 0 only ever sees 0+") {
  const auto cfg = ProtocolConfig::single_sender(4);
  for (int pos = 1; pos <= 4; ++pos) {
    const auto tr = run_protocol(SenderAssignment{4, {pos}, FieldVector{{0.0}, 1.0}}, cfg, 500, 1);
    CHECK(tr.counts.at(OutcomeLabel::povm(0, Sign::plus)) == 500);
    CHECK(tr.counts.at(OutcomeLabel::fail()) == 0);
  }
}

TEST_CASE("transcripts do not depend on who the senders are") {
  const auto cfg = ProtocolConfig::two_sender(6, 3, 0.4, 1.0);
  const FieldVector f{{0.6, 1.7}, 1.0};
  for (Backend backend : {Backend::oracle, Backend::analytic}) {
    RunOptions opt;
    opt.backend = backend;
    const auto a = run_protocol(SenderAssignment{6, {1, 2}, f}, cfg, 20000, 99, opt);
    const auto b = run_protocol(SenderAssignment{6, {3, 6}, f}, cfg, 20000, 99, opt);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(to_json(eavesdropper_view(a)).dump() == to_json(a).dump());
  }
}

TEST_CASE("transcripts do not depend on the worker count") {
  const auto cfg = ProtocolConfig::two_sender(7, 3, 0.33, 1.0);
  const SenderAssignment s{7, {2, 5}, FieldVector{{0.8, 1.1}, 1.0}};
  RunOptions one, four;
  four.threads = 4;
  for (Backend backend : {Backend::oracle, Backend::analytic}) {
    one.backend = four.backend = backend;
    CHECK(to_json(run_protocol(s, cfg, 50000, 5, one)).dump() == to_json(run_protocol(s, cfg, 50000, 5, four)).dump());
  }
}

TEST_CASE("oracle and analytic backends sample the same law") {
  const auto cfg = ProtocolConfig::two_sender(6, 2, 0.5, 1.0);
  const FieldVector f{{0.9, 1.4}, 1.0};
  const auto p = outcome_distribution(cfg, f);
  RunOptions opt;
  const std::int64_t N = 200000;
  for (Backend backend : {Backend::oracle, Backend::analytic}) {
    opt.backend = backend;
    const auto tr = run_protocol(SenderAssignment{6, {1, 4}, f}, cfg, N, 3, opt);
    double chi2 = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
      const double e = N * p.probabilities[x];
      const double o = static_cast<double>(tr.counts.at(p.labels[x]));
      if (e > 0) chi2 += (o - e) * (o - e) / e;
    }
    CHECK(chi2 < 25.0);  // 3 dof
  }
}

TEST_CASE("broadcast estimate recovers the fields") {
  const auto cfg = ProtocolConfig::two_sender(5, 2, 0.33, 1.0);
  const FieldVector f{{0.75, 1.25}, 1.0};
  const auto tr = run_protocol(SenderAssignment{5, {2, 4}, f}, cfg, 100000, 42);
  REQUIRE(tr.broadcast);
  const auto& b = *tr.broadcast;
  CHECK(b.converged);
  // Three standard errors in omega: theta -> omega halves the variance of each combination.
  const double se = 0.5 * std::hypot(b.se_expected[0], b.se_expected[1]);
  for (int j = 0; j < 2; ++j) CHECK(std::abs(b.omega_hat.omegas[j] - f.omegas[j]) < 3.0 * se);
  CHECK(tr.backend == Backend::oracle);
}

TEST_CASE("custom POVM runs do not broadcast") {
  testsupport::Gen g(71);
  const auto cfg = g.custom_config(5, 1.0);
  const auto tr = run_protocol(SenderAssignment{5, {3}, FieldVector{{1.0}, 1.0}}, cfg, 1000, 8);
  CHECK_FALSE(tr.broadcast);
  CHECK(tr.counts.total() == 1000);
}

TEST_CASE("tracelessness holds for every sender placement") {
  testsupport::Gen g(73);
  for (int n = 3; n <= 7; ++n) {
    for (int m = 1; m <= 2; ++m) {
      const auto f = g.fields(m);
      const auto cfg = g.custom_config(n, f.t);
      const auto r = verify_tracelessness(n, f, cfg, TracelessnessMode::exact);
      CHECK(r.pass);
      CHECK(r.max_tv <= 1e-10);
      CHECK(r.subsets == sender_subsets(n, m).size());
    }
  }
}

TEST_CASE("tracelessness survives a wrong sender count") {
  // Two-sender preset, three actual senders.
  const auto cfg = ProtocolConfig::two_sender(7, 3, 0.33, 1.0);
  const auto r = verify_tracelessness(7, FieldVector{{0.4, 0.9, 2.2}, 1.0}, cfg, TracelessnessMode::exact);
  CHECK(r.pass);
  CHECK(r.subsets == 35);
}

TEST_CASE("sampled tracelessness passes the homogeneity test") {
  const auto cfg = ProtocolConfig::two_sender(6, 3, 0.33, 1.0);
  TracelessnessOptions opt;
  opt.rounds = 20000;
  opt.seed = 4;
  const auto r = verify_tracelessness(6, FieldVector{{0.5, 1.5}, 1.0}, cfg, TracelessnessMode::sampled, opt);
  REQUIRE(r.p_value);
  CHECK(*r.p_value > 1e-3);
  CHECK(r.pass);
}

TEST_CASE("negative control leaks") {
  const auto cfg = ProtocolConfig::single_sender(4);
  const auto leak = negative_control(4, FieldVector{{std::numbers::pi / 2}, 1.0}, cfg);
  CHECK_FALSE(leak.pass);
  CHECK(leak.max_tv > 0.01);
  const auto quiet = negative_control(4, FieldVector{{0.0}, 1.0}, cfg);
  CHECK(quiet.pass);
  const auto two = negative_control(5, FieldVector{{0.75, 1.25}, 1.0}, ProtocolConfig::two_sender(5, 2, 0.33));
  CHECK_FALSE(two.pass);
}

TEST_CASE("single-sender evolved states are identical (tomography-proof)") {
  testsupport::Gen g(79);
  for (int n = 1; n <= 8; ++n) CHECK(max_evolved_state_distance(n, g.fields(1), 0) < 1e-12);
}
