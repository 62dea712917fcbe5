#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "anonsense/combinatorics.hpp"
#include "anonsense/config.hpp"

// Small generators for property tests. Seeds are fixed so failures replay.
namespace testsupport {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  anonsense::FieldVector fields(int m) {
    anonsense::FieldVector f;
    f.t = uniform(0.1, 2.0);
    for (int j = 0; j < m; ++j) f.omegas.push_back(uniform(0.1, 3.0));
    std::sort(f.omegas.begin(), f.omegas.end());
    return f;
  }

  // Random custom POVM: active projectors and matching branch weights.
  anonsense::ProtocolConfig custom_config(int n, double t) {
    auto cfg = anonsense::ProtocolConfig::blank(n, t);
    double total = 0.0;
    for (int i = 0; i <= cfg.half(); ++i) {
      const bool plus = i == 0 || coin();
      const bool minus = 2 * i != n && coin();
      cfg.set_povm(i, anonsense::Sign::plus, plus);
      cfg.set_povm(i, anonsense::Sign::minus, minus);
      cfg.q[i] = (plus || minus) ? uniform(0.05, 1.0) : 0.0;
      total += cfg.q[i];
    }
    for (auto& q : cfg.q) q /= total;
    return cfg;
  }

  std::vector<int> positions(int n, int m) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i + 1;
    std::shuffle(all.begin(), all.end(), rng_);
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testsupport
