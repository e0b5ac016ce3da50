#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gstbench/errors.hpp"

namespace gst {

// One real-valued spatial grid slice. `width` is the x extent (columns),
// `height` the y extent (rows); values are stored row-major.
struct Field {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  Field() = default;
  Field(int w, int h, double fill = 0.0) : width(w), height(h) {
    require(w > 0 && h > 0, ErrorCode::InvalidArgument,
            "field dimensions must be positive");
    v.assign(static_cast<std::size_t>(w) * h, fill);
  }

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * width + c]; }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Field& o) const {
    return width == o.width && height == o.height;
  }
  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  friend bool operator==(const Field& a, const Field& b) {
    return a.width == b.width && a.height == b.height && a.v == b.v;
  }
};

// 3x3 stencil, row-major with the anchor at (1,1). Applied as
// cross-correlation: out(r,c) = sum_{i,j} k[i][j] * in(r+i-1, c+j-1),
// never flipped.
struct Kernel3 {
  std::array<double, 9> k{};

  double operator()(int i, int j) const { return k[static_cast<std::size_t>(i) * 3 + j]; }
  double sum() const {
    double s = 0.0;
    for (double x : k) s += x;
    return s;
  }

  static Kernel3 identity() {
    Kernel3 out;
    out.k = {0, 0, 0, 0, 1, 0, 0, 0, 0};
    return out;
  }
  // Center-weighted neighborhood average; entries sum to 1.
  static Kernel3 smoothing() {
    Kernel3 out;
    const double s = 1.0 / 16.0;
    out.k = {s, s, s, s, 8 * s, s, s, s, s};
    return out;
  }
  // Directional transport stencil; entries sum to 1 with an east/north bias.
  static Kernel3 drift() {
    Kernel3 out;
    out.k = {0.0, 0.45, 0.0, 0.15, 0.0, 0.35, 0.0, 0.05, 0.0};
    return out;
  }
};

}  // namespace gst
