#include "sadiv/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sadiv {

namespace {

struct Bracket {
  double lo;
  double hi;
  Maximum best;
};

Bracket scan(const std::function<double(double)>& f, double lo, double hi, int n,
             int* local_maxima) {
  std::vector<double> xs(n), ys(n);
  const double step = (hi - lo) / n;
  for (int i = 0; i < n; ++i) {
    xs[i] = lo + step * (i + 1);
    ys[i] = f(xs[i]);
  }
  const auto it = std::max_element(ys.begin(), ys.end());
  const int i = static_cast<int>(it - ys.begin());

  int peaks = 0;
  for (int j = 0; j < n; ++j) {
    const bool left = j == 0 || ys[j] > ys[j - 1];
    const bool right = j == n - 1 || ys[j] > ys[j + 1];
    if (left && right) ++peaks;
  }
  if (local_maxima != nullptr) *local_maxima = peaks;

  return {i == 0 ? lo : xs[i - 1], i == n - 1 ? hi : xs[i + 1], {xs[i], ys[i]}};
}

}  // namespace

Maximum maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                        double x_tol, int grid_points) {
  if (!(hi > lo)) throw std::invalid_argument("maximize_scalar: empty interval");
  if (grid_points < 3) throw std::invalid_argument("maximize_scalar: grid too coarse");

  int peaks = 0;
  Bracket br = scan(f, lo, hi, grid_points, &peaks);
  if (peaks > 1) br = scan(f, lo, hi, grid_points * 10, nullptr);

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = br.lo;
  double b = br.hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > x_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  const Maximum refined{x, f(x)};
  return refined.value >= br.best.value ? refined : br.best;
}

}  // namespace sadiv
