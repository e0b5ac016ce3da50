#pragma once

#include "gstbench/field.hpp"
#include "gstbench/rng.hpp"

namespace gst {

// Same-shape 3x3 cross-correlation with zero padding at the boundary.
Field conv2_same(const Field& input, const Kernel3& kernel);

// Elementwise logistic map 1/(1+exp(-x)).
Field sigmoid_map(const Field& input);

// I.i.d. N(mean, stddev^2) per cell; stddev must be >= 0.
Field gaussian_field(int width, int height, double mean, double stddev,
                     RngStream& rng);

// Each cell independently 1 with its cell's probability, else 0.
// Probabilities must lie in [0, 1].
Field bernoulli_field(const Field& prob, RngStream& rng);

}  // namespace gst
