#include "anonsense/combinatorics.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace anonsense {

namespace {

using boost::multiprecision::cpp_rational;

// Gosper's hack: next larger integer with the same popcount.
std::uint64_t next_same_weight(std::uint64_t x) {
  const std::uint64_t c = x & (~x + 1);
  const std::uint64_t r = x + c;
  return (((r ^ x) >> 2) / c) | r;
}

constexpr int kMaxBits = 62;

}  // namespace

BigInt binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return BigInt{0};
  if (k > n - k) k = n - k;
  BigInt result = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;  // exact: result is C(n-k+i, i) here
  }
  return result;
}

double binomial_ratio(std::int64_t r, std::int64_t j, std::int64_t n,
                      std::int64_t k) {
  if (r < 0 || j < 0 || j > r) return 0.0;
  if (n < 0 || k < 0 || k > n)
    throw std::domain_error("binomial_ratio: zero denominator C(" +
                            std::to_string(n) + "," + std::to_string(k) + ")");
  if (r <= n && j <= k && r - j <= n - k) {
    // C(r,j)/C(n,k) = [k!/j!] [(n-k)!/(r-j)!] / [n!/r!]
    BigInt num = 1;
    BigInt den = 1;
    for (std::int64_t x = j + 1; x <= k; ++x) num *= x;
    for (std::int64_t x = r - j + 1; x <= n - k; ++x) num *= x;
    for (std::int64_t x = r + 1; x <= n; ++x) den *= x;
    return cpp_rational(num, den).convert_to<double>();
  }
  return cpp_rational(binomial(r, j), binomial(n, k)).convert_to<double>();
}

std::uint64_t HwBitstring::value() const {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) v |= std::uint64_t{1} << i;
  return v;
}

std::vector<HwBitstring> hw_bitstrings(int m, int l) {
  if (m <= 0) throw std::invalid_argument("hw_bitstrings: m must be >= 1");
  if (m > kMaxBits)
    throw std::invalid_argument("hw_bitstrings: m exceeds " +
                                std::to_string(kMaxBits));
  if (l < 0 || l > m)
    throw std::invalid_argument("hw_bitstrings: weight " + std::to_string(l) +
                                " outside [0," + std::to_string(m) + "]");

  const std::uint64_t limit = std::uint64_t{1} << m;
  std::vector<HwBitstring> out;
  out.reserve(binomial(m, l).convert_to<std::size_t>());
  std::uint64_t x = (l == 0) ? 0 : ((std::uint64_t{1} << l) - 1);
  std::uint64_t rank = 1;
  while (x < limit) {
    HwBitstring f{m, l, rank++, std::vector<std::uint8_t>(m)};
    for (int i = 0; i < m; ++i) f.bits[i] = (x >> i) & 1U;
    out.push_back(std::move(f));
    if (x == 0) break;
    x = next_same_weight(x);
  }
  return out;
}

SignVector sign_vector(std::span<const std::uint8_t> bits) {
  SignVector s;
  s.entries.reserve(bits.size());
  for (auto b : bits) s.entries.push_back(1 - 2 * static_cast<int>(b != 0));
  return s;
}

std::vector<double> FieldVector::phases() const {
  std::vector<double> out(omegas.size());
  for (std::size_t j = 0; j < omegas.size(); ++j) out[j] = t * omegas[j];
  return out;
}

bool FieldVector::is_canonical() const {
  if (!(t > 0.0) || omegas.empty()) return false;
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    if (!(omegas[j] > 0.0)) return false;
    if (j > 0 && omegas[j] < omegas[j - 1]) return false;
  }
  return true;
}

double effective_phase(const FieldVector& fields, const HwBitstring& f) {
  if (fields.m() != f.m)
    throw std::invalid_argument("effective_phase: " + std::to_string(fields.m()) +
                                " field amplitudes vs " + std::to_string(f.m) +
                                "-bit string");
  double acc = 0.0;
  for (int j = 0; j < f.m; ++j)
    acc += fields.omegas[j] * (f.bits[j] ? -1.0 : 1.0);
  return fields.t * acc;
}

namespace detail {

std::vector<std::complex<double>> h_coefficients(std::span<const double> phases) {
  const int m = static_cast<int>(phases.size());
  std::vector<std::complex<double>> h(m + 1);
  for (int l = 0; l <= m; ++l) {
    for (const auto& f : hw_bitstrings(m, l)) {
      double theta = 0.0;
      for (int j = 0; j < m; ++j) theta += f.bits[j] ? -phases[j] : phases[j];
      h[l] += std::polar(1.0, -0.5 * theta);
    }
  }
  return h;
}

}  // namespace detail

std::vector<std::complex<double>> g_from_phases(std::span<const double> phases,
                                                Sign sign) {
  if (phases.empty()) throw std::invalid_argument("g_coefficients: m must be >= 1");
  const int m = static_cast<int>(phases.size());
  std::vector<std::complex<double>> g(m + 1);
  // Summing cos / sin directly keeps g_+ exactly real and g_- exactly
  // imaginary instead of relying on h + conj(h) cancellation.
  for (int l = 0; l <= m; ++l) {
    double acc = 0.0;
    for (const auto& f : hw_bitstrings(m, l)) {
      double theta = 0.0;
      for (int j = 0; j < m; ++j) theta += f.bits[j] ? -phases[j] : phases[j];
      acc += sign == Sign::plus ? std::cos(0.5 * theta) : std::sin(0.5 * theta);
    }
    g[l] = sign == Sign::plus ? std::complex<double>(2.0 * acc, 0.0)
                              : std::complex<double>(0.0, -2.0 * acc);
  }
  if (m % 2 == 0 && sign == Sign::minus) g[m / 2] = 0.0;
  return g;
}

GCoefficients g_coefficients(const FieldVector& fields, Sign sign) {
  const auto phases = fields.phases();
  return GCoefficients{fields.m(), sign, g_from_phases(phases, sign)};
}

}  // namespace anonsense
