#pragma once

// Naive reference implementations used as independent oracles in tests.
// These deliberately share no code with the library paths they check.

#include <algorithm>

#include "gstbench/field.hpp"
#include "gstbench/tensor.hpp"

namespace gst::testref {

inline Field naive_conv2_same(const Field& in, const Kernel3& k) {
  Field out(in.width, in.height);
  for (int r = 0; r < in.height; ++r)
    for (int c = 0; c < in.width; ++c) {
      double acc = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const int rr = r + i - 1, cc = c + j - 1;
          if (rr < 0 || rr >= in.height || cc < 0 || cc >= in.width) continue;
          acc += k(i, j) * in.at(rr, cc);
        }
      out.at(r, c) = acc;
    }
  return out;
}

// Multi-channel zero-padded cross-correlation; weight (out_ch, in_ch, k*k).
inline Tensor naive_conv2d(const Tensor& x, const Tensor& w, const Tensor* bias,
                           int ksize) {
  const int half = ksize / 2;
  Tensor out(w.c, x.h, x.w, 0.0);
  for (int co = 0; co < w.c; ++co)
    for (int r = 0; r < x.h; ++r)
      for (int c = 0; c < x.w; ++c) {
        double acc = bias ? bias->v[static_cast<std::size_t>(co)] : 0.0;
        for (int ci = 0; ci < x.c; ++ci)
          for (int i = 0; i < ksize; ++i)
            for (int j = 0; j < ksize; ++j) {
              const int rr = r + i - half, cc = c + j - half;
              if (rr < 0 || rr >= x.h || cc < 0 || cc >= x.w) continue;
              acc += w.at(co, ci, i * ksize + j) * x.at(ci, rr, cc);
            }
        out.at(co, r, c) = acc;
      }
  return out;
}

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

}  // namespace gst::testref
