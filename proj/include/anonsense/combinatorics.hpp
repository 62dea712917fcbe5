#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace anonsense {

using BigInt = boost::multiprecision::cpp_int;

enum class Sign { plus, minus };

constexpr int sign_value(Sign s) { return s == Sign::plus ? +1 : -1; }
constexpr char sign_char(Sign s) { return s == Sign::plus ? '+' : '-'; }

/// Exact binomial coefficient C(n, k); zero outside 0 <= k <= n.
BigInt binomial(std::int64_t n, std::int64_t k);

/// C(r, j) / C(n, k) evaluated as an exact ratio of integers and rounded to
/// double once. Only the falling-factorial factors that do not cancel are
/// multiplied out, so the cost grows with (n - r), not with n.
double binomial_ratio(std::int64_t r, std::int64_t j, std::int64_t n,
                      std::int64_t k);

/// The p-th smallest m-bit integer of Hamming weight l.
///
/// Bit convention: bits[0] is the least-significant bit, i.e. bits[j] is the
/// bit that pairs with the (j+1)-th field amplitude and the (j+1)-th sender.
struct HwBitstring {
  int m = 0;
  int l = 0;
  std::uint64_t rank = 0;  // 1-based
  std::vector<std::uint8_t> bits;

  std::uint64_t value() const;
};

/// All m-bit strings of weight l in increasing integer order.
std::vector<HwBitstring> hw_bitstrings(int m, int l);

struct SignVector {
  std::vector<int> entries;
};

SignVector sign_vector(std::span<const std::uint8_t> bits);

/// Field amplitudes (rad/time) and the interaction time.
///
/// Physical scenarios have 0 < omega_1 <= ... <= omega_m; the numerical
/// machinery accepts any real values so that phase-space parameterizations
/// (and the zero-field case) go through the same code.
struct FieldVector {
  std::vector<double> omegas;
  double t = 1.0;

  int m() const { return static_cast<int>(omegas.size()); }
  /// t * omega_j for every j.
  std::vector<double> phases() const;
  /// Strictly positive, nondecreasing amplitudes and t > 0.
  bool is_canonical() const;
};

/// t * (omega . sign_vector(f)).
double effective_phase(const FieldVector& fields, const HwBitstring& f);

struct GCoefficients {
  int m = 0;
  Sign sign = Sign::plus;
  std::vector<std::complex<double>> values;  // indexed by weight l = 0..m
};

GCoefficients g_coefficients(const FieldVector& fields, Sign sign);

/// Same as g_coefficients but driven by the per-sender phases t*omega_j.
std::vector<std::complex<double>> g_from_phases(std::span<const double> phases,
                                                Sign sign);

namespace detail {
// h_{m,l} = sum_p exp(-i theta_{m,l,p} / 2). Exposed for tests only.
std::vector<std::complex<double>> h_coefficients(std::span<const double> phases);
}  // namespace detail

}  // namespace anonsense
