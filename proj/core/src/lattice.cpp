#include "gstbench/lattice.hpp"

#include <cmath>

namespace gst {

Field conv2_same(const Field& input, const Kernel3& kernel) {
  require(input.width > 0 && input.height > 0, ErrorCode::InvalidArgument,
          "conv2_same: field dimensions must be positive");
  const int w = input.width, h = input.height;
  Field out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -1; i <= 1; ++i) {
        const int rr = r + i;
        if (rr < 0 || rr >= h) continue;
        for (int j = -1; j <= 1; ++j) {
          const int cc = c + j;
          if (cc < 0 || cc >= w) continue;
          acc += kernel(i + 1, j + 1) * input.at(rr, cc);
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

Field sigmoid_map(const Field& input) {
  Field out(input.width, input.height);
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double x = input.v[i];
    if (x >= 0.0) {
      out.v[i] = 1.0 / (1.0 + std::exp(-x));
    } else {
      const double e = std::exp(x);
      out.v[i] = e / (1.0 + e);
    }
  }
  return out;
}

Field gaussian_field(int width, int height, double mean, double stddev,
                     RngStream& rng) {
  require(stddev >= 0.0, ErrorCode::InvalidArgument,
          "gaussian_field: stddev must be >= 0");
  Field out(width, height);
  for (auto& x : out.v) x = mean + stddev * rng.next_gaussian();
  return out;
}

Field bernoulli_field(const Field& prob, RngStream& rng) {
  Field out(prob.width, prob.height);
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double p = prob.v[i];
    require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidArgument,
            "bernoulli_field: probability outside [0, 1]");
    out.v[i] = rng.next_uniform() < p ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace gst
