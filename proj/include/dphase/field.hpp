#ifndef DPHASE_FIELD_HPP
#define DPHASE_FIELD_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dphase/common.hpp"

namespace dphase {

/// Discrete carrier for u (and optionally |grad u|) over a truncated domain:
/// node coordinates, positive quadrature weights, nodal values.
struct SampledField {
  int dim = 3;
  Vec coords;   // size() * dim, row-major
  Vec weights;  // cell measures; their sum is the truncated-domain measure
  Vec values;
  Vec grad;     // |grad u| per node; empty when not carried
  double truncation_radius = 0.0;
  // |u| is a nonincreasing function of |x| (ball-sup probes may then use the
  // centered ball, where the sup is attained).
  bool radial_nonincreasing = false;

  std::size_t size() const { return weights.size(); }
  std::span<const double> node(std::size_t i) const {
    return {coords.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  bool has_gradient() const { return grad.size() == weights.size(); }

  double total_measure() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
  double max_abs_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
  }

  SampledField scaled(double c) const {
    SampledField out = *this;
    for (auto& v : out.values) v *= c;
    if (has_gradient())
      for (auto& g : out.grad) g *= std::fabs(c);
    return out;
  }

  /// Field carrying |grad u| as its values (for gradient-side norms).
  SampledField gradient_field() const {
    if (!has_gradient()) throw std::invalid_argument("field carries no gradient values");
    SampledField out = *this;
    out.values = grad;
    out.grad.clear();
    return out;
  }
};

/// Radial grid about x0: exact shell-volume weights split over a deterministic
/// set of directions, so the weight sum equals the ball measure to rounding.
inline SampledField radial_field(int d, std::span<const double> x0, double R, int n_shells,
                                 int n_dirs, const std::function<double(double)>& u,
                                 const std::function<double(double)>& grad_mag = nullptr,
                                 std::uint64_t seed = 2024) {
  if (R <= 0 || n_shells < 1 || n_dirs < 1)
    throw std::invalid_argument("radial_field: bad grid spec");
  SampledField f;
  f.dim = d;
  f.truncation_radius = R;
  const auto dirs = unit_directions(d, n_dirs, seed);
  const double dr = R / n_shells;
  f.coords.reserve(n_shells * n_dirs * d);
  f.weights.reserve(n_shells * n_dirs);
  f.values.reserve(n_shells * n_dirs);
  for (int i = 0; i < n_shells; ++i) {
    const double r_lo = i * dr, r_hi = (i + 1) * dr;
    const double r_mid = 0.5 * (r_lo + r_hi);
    const double shell = ball_volume(d, r_hi) - ball_volume(d, r_lo);
    const double w = shell / n_dirs;
    const double uv = u(r_mid);
    const double gv = grad_mag ? grad_mag(r_mid) : 0.0;
    for (int j = 0; j < n_dirs; ++j) {
      for (int k = 0; k < d; ++k) f.coords.push_back(x0[k] + r_mid * dirs[j][k]);
      f.weights.push_back(w);
      f.values.push_back(uv);
      if (grad_mag) f.grad.push_back(gv);
    }
  }
  return f;
}

/// Uniform cell-centered box grid over [center - half, center + half]^... with
/// the given spacing; weights are exact cell volumes.
inline SampledField box_field(
    std::span<const double> center, std::span<const double> half, double spacing,
    const std::function<double(std::span<const double>)>& u,
    const std::function<double(std::span<const double>)>& grad_mag = nullptr) {
  const int d = static_cast<int>(center.size());
  if (d < 1 || d > 4) throw std::invalid_argument("box_field supports dim 1..4");
  std::vector<int> counts(d);
  for (int k = 0; k < d; ++k) {
    counts[k] = std::max(1, static_cast<int>(std::ceil(2.0 * half[k] / spacing)));
  }
  SampledField f;
  f.dim = d;
  double rad = 0.0;
  for (int k = 0; k < d; ++k) rad = std::max(rad, std::fabs(center[k]) + half[k]);
  f.truncation_radius = rad * std::sqrt(static_cast<double>(d));

  std::vector<int> idx(d, 0);
  Vec x(d);
  double cell = 1.0;
  Vec step(d);
  for (int k = 0; k < d; ++k) {
    step[k] = 2.0 * half[k] / counts[k];
    cell *= step[k];
  }
  while (true) {
    for (int k = 0; k < d; ++k)
      x[k] = center[k] - half[k] + (idx[k] + 0.5) * step[k];
    for (int k = 0; k < d; ++k) f.coords.push_back(x[k]);
    f.weights.push_back(cell);
    f.values.push_back(u(x));
    if (grad_mag) f.grad.push_back(grad_mag(x));
    int k = 0;
    while (k < d && ++idx[k] == counts[k]) idx[k++] = 0;
    if (k == d) break;
  }
  return f;
}

inline void write_field_csv(const SampledField& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.precision(17);
  for (int k = 0; k < f.dim; ++k) os << "x" << k << ",";
  os << "weight,value";
  if (f.has_gradient()) os << ",gradient";
  os << "\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int k = 0; k < f.dim; ++k) os << f.coords[i * f.dim + k] << ",";
    os << f.weights[i] << "," << f.values[i];
    if (f.has_gradient()) os << "," << f.grad[i];
    os << "\n";
  }
}

inline SampledField read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(is, header);
  int dim = 0;
  bool has_grad = header.find(",gradient") != std::string::npos;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.size() > 1 && col[0] == 'x') ++dim;
    }
  }
  if (dim < 1) throw std::runtime_error("field csv: no coordinate columns in " + path);
  SampledField f;
  f.dim = dim;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (static_cast<int>(row.size()) < dim + 2)
      throw std::runtime_error("field csv: short row in " + path);
    for (int k = 0; k < dim; ++k) f.coords.push_back(row[k]);
    f.weights.push_back(row[dim]);
    f.values.push_back(row[dim + 1]);
    if (has_grad) f.grad.push_back(row[dim + 2]);
    double r = 0.0;
    for (int k = 0; k < dim; ++k) r += row[k] * row[k];
    f.truncation_radius = std::max(f.truncation_radius, std::sqrt(r));
  }
  return f;
}

}  // namespace dphase

#endif
