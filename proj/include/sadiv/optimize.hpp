#pragma once

#include <functional>

namespace sadiv {

struct Maximum {
  double x = 0.0;
  double value = 0.0;
};

/// Maximizes `f` over (lo, hi].
///
/// A coarse grid scan brackets the best point; golden-section search then
/// refines it until the bracket is no wider than `x_tol`. If the scan sees
/// more than one local maximum the function is treated as non-unimodal and
/// the bracket comes from a ten times finer grid instead.
Maximum maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                        double x_tol = 1e-8, int grid_points = 400);

}  // namespace sadiv
