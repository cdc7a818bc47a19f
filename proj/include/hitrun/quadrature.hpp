#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

namespace hitrun::quad {

inline double max_abs(double v) { return std::abs(v); }

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived> &m) {
  return m.cwiseAbs().maxCoeff();
}

template <class T> struct Result {
  T value;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kronrod_nodes[1], [3], [5] and the centre.
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T> struct Panel {
  double a, b;
  T value;
  double error;
};

template <class F> auto kronrod15(F &f, double a, double b) {
  using T = std::decay_t<decltype(f(a))>;
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const T fc = f(centre);
  T kronrod = kronrod_weights[7] * fc;
  T gauss = gauss_weights[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kronrod_nodes[j];
    const T sum = f(centre - dx) + f(centre + dx);
    kronrod = kronrod + kronrod_weights[j] * sum;
    if (j % 2 == 1)
      gauss = gauss + gauss_weights[j / 2] * sum;
  }
  const T diff = half * (kronrod - gauss);
  return Panel<T>{a, b, half * kronrod, max_abs(diff)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (G7/K15) integration of a scalar or
/// fixed-size Eigen-valued integrand over [a, b]. The panel with the largest
/// error estimate is bisected until the summed estimate falls below
/// max(abs_tol, rel_tol * |value|) or `max_panels` is reached. Starting from
/// several equal panels keeps narrow peaks from slipping between nodes.
template <class F>
auto integrate(F &&f, double a, double b, double abs_tol, double rel_tol = 0.0,
               std::size_t max_panels = 4000, std::size_t initial_panels = 1) {
  using T = std::decay_t<decltype(f(a))>;
  using detail::Panel;

  auto by_error = [](const Panel<T> &l, const Panel<T> &r) {
    return l.error < r.error;
  };
  std::vector<Panel<T>> heap;
  initial_panels = std::max<std::size_t>(initial_panels, 1);
  const double width = (b - a) / static_cast<double>(initial_panels);
  for (std::size_t i = 0; i < initial_panels; ++i) {
    const double lo = a + width * static_cast<double>(i);
    const double hi = i + 1 == initial_panels ? b : lo + width;
    heap.push_back(detail::kronrod15(f, lo, hi));
  }
  std::make_heap(heap.begin(), heap.end(), by_error);
  std::size_t evaluations = 15 * initial_panels;

  auto totals = [&heap]() {
    T value = heap.front().value;
    double error = heap.front().error;
    for (std::size_t i = 1; i < heap.size(); ++i) {
      value = value + heap[i].value;
      error += heap[i].error;
    }
    return std::pair<T, double>(value, error);
  };

  // Running totals drive the loop; the final sum is recomputed exactly.
  auto [value, error] = totals();
  while (error > std::max(abs_tol, rel_tol * max_abs(value)) &&
         heap.size() < max_panels) {
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const Panel<T> worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel<T> left = detail::kronrod15(f, worst.a, mid);
    const Panel<T> right = detail::kronrod15(f, mid, worst.b);
    value = value + (left.value + right.value - worst.value);
    error += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), by_error);
    evaluations += 30;
  }
  std::tie(value, error) = totals();

  Result<T> out{value, error, evaluations,
                error <= std::max(abs_tol, rel_tol * max_abs(value))};
  return out;
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

} // namespace hitrun::quad
