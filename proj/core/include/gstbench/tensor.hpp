#pragma once

#include <cstddef>
#include <vector>

#include "gstbench/errors.hpp"
#include "gstbench/field.hpp"

namespace gst {

// Dense channels x height x width value, row-major planes. Convolution
// weights are stored as (out_channels, in_channels, k*k) in the same
// container.
struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_, double fill = 0.0) : c(c_), h(h_), w(w_) {
    require(c_ > 0 && h_ > 0 && w_ > 0, ErrorCode::InvalidArgument,
            "tensor dimensions must be positive");
    v.assign(static_cast<std::size_t>(c_) * h_ * w_, fill);
  }

  static Tensor from_field(const Field& f) {
    Tensor t(1, f.height, f.width);
    t.v = f.v;
    return t;
  }

  Field to_field(int channel = 0) const {
    Field f(w, h);
    const std::size_t off = static_cast<std::size_t>(channel) * plane();
    std::copy(v.begin() + off, v.begin() + off + plane(), f.v.begin());
    return f;
  }

  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::size_t size() const { return v.size(); }
  double& at(int ch, int r, int col) {
    return v[(static_cast<std::size_t>(ch) * h + r) * w + col];
  }
  double at(int ch, int r, int col) const {
    return v[(static_cast<std::size_t>(ch) * h + r) * w + col];
  }
  bool same_shape(const Tensor& o) const {
    return c == o.c && h == o.h && w == o.w;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.c == b.c && a.h == b.h && a.w == b.w && a.v == b.v;
  }
};

}  // namespace gst
