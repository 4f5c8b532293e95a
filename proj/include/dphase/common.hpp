#ifndef DPHASE_COMMON_HPP
#define DPHASE_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dphase {

using Vec = std::vector<double>;

inline double sqr(double x) { return x * x; }

inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Lebesgue measure of the d-ball of radius r.
inline double ball_volume(int d, double r) {
  return std::pow(M_PI, 0.5 * d) / std::tgamma(1.0 + 0.5 * d) * std::pow(r, d);
}

/// Surface measure of the unit (d-1)-sphere.
inline double sphere_surface(int d) {
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Deterministic unit directions in R^d from a seeded generator.
inline std::vector<Vec> unit_directions(int d, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> dirs;
  dirs.reserve(count);
  while (static_cast<int>(dirs.size()) < count) {
    Vec v(d);
    for (auto& c : v) c = gauss(rng);
    double n = norm2(v);
    if (n < 1e-12) continue;
    for (auto& c : v) c /= n;
    dirs.push_back(std::move(v));
  }
  return dirs;
}

/// Uniform points in the ball B(x0, R), seeded.
inline std::vector<Vec> ball_points(std::span<const double> x0, double R, int count,
                                    std::uint64_t seed) {
  const int d = static_cast<int>(x0.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> pts;
  pts.reserve(count);
  while (static_cast<int>(pts.size()) < count) {
    Vec v(d);
    for (auto& c : v) c = gauss(rng);
    double n = norm2(v);
    if (n < 1e-12) continue;
    double r = R * std::pow(unif(rng), 1.0 / d);
    for (int i = 0; i < d; ++i) v[i] = x0[i] + r * v[i] / n;
    pts.push_back(std::move(v));
  }
  return pts;
}

/// Kendall rank correlation of a series against its index.
/// +1 means monotone increasing, -1 monotone decreasing.
inline double kendall_tau(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (y[j] > y[i]) ++concordant;
      else if (y[j] < y[i]) ++discordant;
    }
  const double total = 0.5 * n * (n - 1);
  return (concordant - discordant) / total;
}

/// FNV-1a digest of a byte string; used to fingerprint configs and inputs.
inline std::uint64_t fnv1a(std::span<const char> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex_digest(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

inline std::string digest_of_doubles(std::span<const double> v) {
  return hex_digest(fnv1a(std::span<const char>(
      reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double))));
}

}  // namespace dphase

#endif
