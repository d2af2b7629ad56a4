#pragma once

// Deterministic composite quadrature on intervals, rectangles and boxes.
//
// Rules: composite midpoint (order 2), composite Simpson with 3 nodes per
// panel (order 4), and composite 5-point Gauss-Legendre (exact through
// polynomial degree 9 per axis).  The error estimate is the difference
// against one refinement pass with `refinement_factor` times the panels.
// Summation order is fixed (axis 0 outermost, ascending nodes), so results
// are reproducible bit for bit.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hhbox/expr.hpp"

namespace hhbox {

enum class Rule { midpoint, simpson, gauss5 };

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::midpoint: return "midpoint";
    case Rule::simpson: return "simpson";
    case Rule::gauss5: return "gauss5";
  }
  return "?";
}

inline Rule rule_from_name(const std::string& s) {
  if (s == "midpoint") return Rule::midpoint;
  if (s == "simpson") return Rule::simpson;
  if (s == "gauss5") return Rule::gauss5;
  throw std::invalid_argument("unknown quadrature rule '" + s + "'");
}

struct QuadSpec {
  Rule rule = Rule::gauss5;
  int subdivisions = 8;       // panels per axis
  int refinement_factor = 2;  // panel multiplier for the error estimate

  void validate() const {
    if (subdivisions < 1)
      throw std::invalid_argument("QuadSpec: subdivisions must be >= 1");
    if (refinement_factor < 2)
      throw std::invalid_argument("QuadSpec: refinement_factor must be >= 2");
  }
};

// Axis-aligned interval / rectangle / box with strictly increasing finite
// bounds.  Axis 0 = [a,b], axis 1 = [c,d], axis 2 = [e,f].
class BoxND {
 public:
  explicit BoxND(std::vector<std::pair<double, double>> bounds) {
    if (bounds.empty() || bounds.size() > 3)
      throw std::invalid_argument("BoxND: dimension must be 1, 2 or 3");
    for (auto [lo, hi] : bounds) {
      if (!std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("BoxND: bounds must be finite");
      if (!(lo < hi))
        throw std::invalid_argument("BoxND: requires lo < hi on every axis");
    }
    dim_ = static_cast<int>(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i) bounds_[i] = bounds[i];
  }

  static BoxND interval(double a, double b) { return BoxND({{a, b}}); }
  static BoxND rect(double a, double b, double c, double d) {
    return BoxND({{a, b}, {c, d}});
  }
  static BoxND box3(double a, double b, double c, double d, double e,
                    double f) {
    return BoxND({{a, b}, {c, d}, {e, f}});
  }
  // Flat lo,hi list per axis in order x,y,z; dimension = count / 2.
  static BoxND from_flat(std::span<const double> flat) {
    if (flat.size() % 2 != 0 || flat.empty() || flat.size() > 6)
      throw std::invalid_argument(
          "box bounds must be lo,hi pairs for 1 to 3 axes");
    std::vector<std::pair<double, double>> b;
    for (std::size_t i = 0; i < flat.size(); i += 2)
      b.emplace_back(flat[i], flat[i + 1]);
    return BoxND(std::move(b));
  }

  int dim() const { return dim_; }
  double lo(int axis) const { return bounds_[check(axis)].first; }
  double hi(int axis) const { return bounds_[check(axis)].second; }
  double width(int axis) const {
    return bounds_[check(axis)].second - bounds_[check(axis)].first;
  }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim_; ++i) v *= width(i);
    return v;
  }
  Point3 midpoint() const {
    Point3 p;
    for (int i = 0; i < dim_; ++i) p.set(i, 0.5 * (lo(i) + hi(i)));
    return p;
  }

  // The 2^dim corners, axis 0 outermost (lo before hi on every axis).
  std::vector<Point3> vertices() const {
    std::vector<Point3> out;
    out.reserve(std::size_t{1} << dim_);
    const int n = 1 << dim_;
    for (int mask = 0; mask < n; ++mask) {
      Point3 p;
      for (int axis = 0; axis < dim_; ++axis) {
        const bool high = (mask >> (dim_ - 1 - axis)) & 1;
        p.set(axis, high ? hi(axis) : lo(axis));
      }
      out.push_back(p);
    }
    return out;
  }

  // Box over the first `d` axes.
  BoxND prefix(int d) const {
    if (d < 1 || d > dim_) throw std::invalid_argument("prefix dimension");
    std::vector<std::pair<double, double>> b(bounds_.begin(),
                                             bounds_.begin() + d);
    return BoxND(std::move(b));
  }

  // Box with axis `axis` removed (remaining axes keep their order).
  BoxND without_axis(int axis) const {
    check(axis);
    if (dim_ < 2)
      throw std::invalid_argument("cannot drop the only axis of a 1D box");
    std::vector<std::pair<double, double>> b;
    for (int i = 0; i < dim_; ++i)
      if (i != axis) b.push_back(bounds_[i]);
    return BoxND(std::move(b));
  }

  bool operator==(const BoxND& other) const {
    if (dim_ != other.dim_) return false;
    for (int i = 0; i < dim_; ++i)
      if (bounds_[i] != other.bounds_[i]) return false;
    return true;
  }

 private:
  int check(int axis) const {
    if (axis < 0 || axis >= dim_) throw std::out_of_range("BoxND axis");
    return axis;
  }

  int dim_ = 1;
  std::array<std::pair<double, double>, 3> bounds_{};
};

struct IntegralResult {
  double value = 0.0;
  double err_est = 0.0;
};

namespace detail {

// 5-point Gauss-Legendre abscissae/weights on [-1,1].
inline constexpr double kG5X1 = 0.5384693101056830910363144;
inline constexpr double kG5X2 = 0.9061798459386639927976269;
inline constexpr double kG5W0 = 0.5688888888888888888888889;  // 128/225
inline constexpr double kG5W1 = 0.4786286704993664680412915;
inline constexpr double kG5W2 = 0.2369268850561890875142640;

// Composite nodes/weights for one axis, ascending.  Weights carry the
// panel scaling, so a plain weighted sum yields the integral.
inline void composite_axis(Rule rule, double lo, double hi, int panels,
                           std::vector<double>& xs, std::vector<double>& ws) {
  xs.clear();
  ws.clear();
  const double h = (hi - lo) / panels;
  for (int i = 0; i < panels; ++i) {
    const double left = lo + i * h;
    const double mid = left + 0.5 * h;
    switch (rule) {
      case Rule::midpoint:
        xs.push_back(mid);
        ws.push_back(h);
        break;
      case Rule::simpson:
        xs.push_back(left);
        xs.push_back(mid);
        xs.push_back(left + h);
        ws.push_back(h / 6.0);
        ws.push_back(4.0 * h / 6.0);
        ws.push_back(h / 6.0);
        break;
      case Rule::gauss5: {
        const double half = 0.5 * h;
        xs.push_back(mid - kG5X2 * half);
        xs.push_back(mid - kG5X1 * half);
        xs.push_back(mid);
        xs.push_back(mid + kG5X1 * half);
        xs.push_back(mid + kG5X2 * half);
        ws.push_back(kG5W2 * half);
        ws.push_back(kG5W1 * half);
        ws.push_back(kG5W0 * half);
        ws.push_back(kG5W1 * half);
        ws.push_back(kG5W2 * half);
        break;
      }
    }
  }
}

template <class F>
double tensor_value(F&& f, const BoxND& box, Rule rule, int panels) {
  std::vector<double> xs[3], ws[3];
  for (int a = 0; a < box.dim(); ++a)
    composite_axis(rule, box.lo(a), box.hi(a), panels, xs[a], ws[a]);

  double acc = 0.0;
  Point3 p;
  switch (box.dim()) {
    case 1:
      for (std::size_t i = 0; i < xs[0].size(); ++i) {
        p.x = xs[0][i];
        acc += ws[0][i] * f(p);
      }
      break;
    case 2:
      for (std::size_t i = 0; i < xs[0].size(); ++i) {
        p.x = xs[0][i];
        double row = 0.0;
        for (std::size_t j = 0; j < xs[1].size(); ++j) {
          p.y = xs[1][j];
          row += ws[1][j] * f(p);
        }
        acc += ws[0][i] * row;
      }
      break;
    case 3:
      for (std::size_t i = 0; i < xs[0].size(); ++i) {
        p.x = xs[0][i];
        double plane = 0.0;
        for (std::size_t j = 0; j < xs[1].size(); ++j) {
          p.y = xs[1][j];
          double row = 0.0;
          for (std::size_t k = 0; k < xs[2].size(); ++k) {
            p.z = xs[2][k];
            row += ws[2][k] * f(p);
          }
          plane += ws[1][j] * row;
        }
        acc += ws[0][i] * plane;
      }
      break;
  }
  return acc;
}

}  // namespace detail

template <class F>
IntegralResult integrate(F&& f, const BoxND& box, const QuadSpec& spec) {
  spec.validate();
  const double coarse = detail::tensor_value(f, box, spec.rule,
                                             spec.subdivisions);
  const double fine = detail::tensor_value(
      f, box, spec.rule, spec.subdivisions * spec.refinement_factor);
  return {coarse, std::fabs(coarse - fine)};
}

template <class F>
IntegralResult mean(F&& f, const BoxND& box, const QuadSpec& spec) {
  IntegralResult r = integrate(f, box, spec);
  const double v = box.volume();
  return {r.value / v, r.err_est / v};
}

// Mean of f over the sub-box obtained by pinning the `fixed` axes.  The
// remaining axes are integrated; axes beyond the box dimension stay 0.
template <class F>
IntegralResult mean_on_slice(F&& f, const BoxND& box,
                             std::span<const std::pair<int, double>> fixed,
                             const QuadSpec& spec) {
  std::array<bool, 3> pinned{false, false, false};
  Point3 base;
  for (auto [axis, value] : fixed) {
    if (axis < 0 || axis >= box.dim())
      throw std::invalid_argument("mean_on_slice: fixed axis out of range");
    if (pinned[axis])
      throw std::invalid_argument("mean_on_slice: duplicate fixed axis");
    pinned[axis] = true;
    base.set(axis, value);
  }
  std::vector<std::pair<double, double>> free_bounds;
  std::array<int, 3> free_axis{};
  for (int a = 0; a < box.dim(); ++a) {
    if (!pinned[a]) {
      free_axis[free_bounds.size()] = a;
      free_bounds.emplace_back(box.lo(a), box.hi(a));
    }
  }
  if (free_bounds.empty())
    throw std::invalid_argument("mean_on_slice: needs at least one free axis");

  const BoxND sub(free_bounds);
  const int nfree = sub.dim();
  auto g = [&](const Point3& sp) {
    Point3 full = base;
    for (int i = 0; i < nfree; ++i) full.set(free_axis[i], sp[i]);
    return f(full);
  };
  return mean(g, sub, spec);
}

template <class F>
IntegralResult mean_on_slice(
    F&& f, const BoxND& box,
    std::initializer_list<std::pair<int, double>> fixed, const QuadSpec& spec) {
  return mean_on_slice(std::forward<F>(f), box,
                       std::span<const std::pair<int, double>>(fixed.begin(),
                                                               fixed.size()),
                       spec);
}

}  // namespace hhbox
