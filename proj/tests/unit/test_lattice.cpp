#include <doctest.h>

#include <cmath>

#include "gstbench/lattice.hpp"
#include "support/reference_ops.hpp"

using namespace gst;

namespace {
Field random_field(int w, int h, RngStream& rng, double scale = 1.0) {
  Field f(w, h);
  for (auto& x : f.v) x = scale * (2.0 * rng.next_uniform() - 1.0);
  return f;
}
}  // namespace

TEST_CASE("default kernels sum to one") {
  CHECK(std::abs(Kernel3::smoothing().sum() - 1.0) < 1e-12);
  CHECK(std::abs(Kernel3::drift().sum() - 1.0) < 1e-12);
  CHECK(Kernel3::identity().sum() == 1.0);
}

TEST_CASE("conv2_same identity kernel leaves fields unchanged") {
  RngStream rng(7, 0);
  Field f = random_field(9, 5, rng);
  Field g = conv2_same(f, Kernel3::identity());
  CHECK(g == f);
}

TEST_CASE("conv2_same constant field with unit-sum kernel") {
  Field f(8, 8, 2.0);
  Field g = conv2_same(f, Kernel3::smoothing());
  // Interior cells see the full kernel.
  CHECK(g.at(3, 4) == doctest::Approx(2.0).epsilon(1e-12));
  // Top-left corner under zero padding: 2 * (8 + 1 + 1 + 1) / 16.
  CHECK(g.at(0, 0) == doctest::Approx(1.375).epsilon(1e-12));
}

TEST_CASE("conv2_same matches the naive reference") {
  RngStream rng(11, 1);
  Kernel3 k = Kernel3::drift();
  for (int trial = 0; trial < 4; ++trial) {
    Field f = random_field(6 + trial, 9 - trial, rng, 3.0);
    CHECK(testref::max_abs_diff(conv2_same(f, k), testref::naive_conv2_same(f, k)) < 1e-13);
  }
}

TEST_CASE("conv2_same orientation is cross-correlation, no flip") {
  // drift() puts 0.45 on the row above the anchor, so a single impulse
  // contributes 0.45 to the cell below it.
  Field f(5, 5, 0.0);
  f.at(2, 2) = 1.0;
  Field g = conv2_same(f, Kernel3::drift());
  CHECK(g.at(3, 2) == doctest::Approx(0.45).epsilon(1e-12));  // reads north
  CHECK(g.at(2, 1) == doctest::Approx(0.35).epsilon(1e-12));  // reads east
  CHECK(g.at(2, 3) == doctest::Approx(0.15).epsilon(1e-12));  // reads west
  CHECK(g.at(1, 2) == doctest::Approx(0.05).epsilon(1e-12));  // reads south
}

TEST_CASE("conv2_same is linear") {
  RngStream rng(13, 2);
  Kernel3 k = Kernel3::smoothing();
  Field f = random_field(12, 7, rng);
  Field g = random_field(12, 7, rng);
  const double a = 1.7, b = -0.3;
  Field combo(12, 7);
  for (std::size_t i = 0; i < combo.size(); ++i)
    combo.v[i] = a * f.v[i] + b * g.v[i];
  Field lhs = conv2_same(combo, k);
  Field cf = conv2_same(f, k), cg = conv2_same(g, k);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double rhs = a * cf.v[i] + b * cg.v[i];
    CHECK(std::abs(lhs.v[i] - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("unit-sum kernels preserve constants at interior cells") {
  Field f(10, 6, -3.25);
  for (const Kernel3& k : {Kernel3::smoothing(), Kernel3::drift()}) {
    Field g = conv2_same(f, k);
    for (int r = 1; r < 5; ++r)
      for (int c = 1; c < 9; ++c)
        CHECK(g.at(r, c) == doctest::Approx(-3.25).epsilon(1e-12));
  }
}

TEST_CASE("conv2_same rejects degenerate dimensions") {
  CHECK_THROWS_AS(Field(0, 4), Error);
  CHECK_THROWS_AS(Field(4, -1), Error);
}

TEST_CASE("sigmoid_map fixed values") {
  Field f(3, 1, 0.0);
  f.v = {0.0, -1.0, 20.0};
  Field s = sigmoid_map(f);
  CHECK(s.v[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.v[1] == doctest::Approx(0.26894).epsilon(1e-4));
  CHECK(std::abs(s.v[1] - 1.0 / (1.0 + std::exp(1.0))) < 1e-15);
  CHECK(s.v[2] > 0.999999);
}

TEST_CASE("sigmoid_map symmetry and range") {
  RngStream rng(17, 3);
  Field f = random_field(14, 9, rng, 15.0);
  Field neg = f;
  for (auto& x : neg.v) x = -x;
  Field s1 = sigmoid_map(f), s2 = sigmoid_map(neg);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(std::abs(s1.v[i] + s2.v[i] - 1.0) < 1e-12);
    CHECK(s1.v[i] > 0.0);
    CHECK(s1.v[i] < 1.0);
  }
  CHECK(s1.all_finite());
}

TEST_CASE("bernoulli_field forced probabilities") {
  RngStream rng(19, 4);
  Field zero(6, 6, 0.0), one(6, 6, 1.0);
  Field b0 = bernoulli_field(zero, rng);
  Field b1 = bernoulli_field(one, rng);
  for (double x : b0.v) CHECK(x == 0.0);
  for (double x : b1.v) CHECK(x == 1.0);
}

TEST_CASE("bernoulli_field rejects probabilities outside [0,1]") {
  RngStream rng(19, 5);
  Field bad(2, 2, 1.5);
  CHECK_THROWS_AS(bernoulli_field(bad, rng), Error);
}

TEST_CASE("gaussian_field sample statistics at 64x64") {
  RngStream rng(42, 6);
  Field g = gaussian_field(64, 64, 0.0, 1.0, rng);
  double mean = 0.0;
  for (double x : g.v) mean += x;
  mean /= static_cast<double>(g.size());
  double var = 0.0;
  for (double x : g.v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(g.size() - 1);
  CHECK(std::abs(mean) <= 4.0 / 64.0);           // four standard errors
  CHECK(std::abs(std::sqrt(var) - 1.0) <= 0.1);
  CHECK_THROWS_AS(gaussian_field(4, 4, 0.0, -1.0, rng), Error);
}

TEST_CASE("identical stream identity reproduces draws bit for bit") {
  RngStream a(123, 9), b(123, 9);
  Field prob(5, 5, 0.4);
  Field a1 = bernoulli_field(prob, a);
  Field a2 = gaussian_field(5, 5, 0.0, 1.0, a);
  Field b1 = bernoulli_field(prob, b);
  Field b2 = gaussian_field(5, 5, 0.0, 1.0, b);
  CHECK(a1 == b1);
  CHECK(a2 == b2);

  RngStream c(123, 10);
  Field c1 = bernoulli_field(prob, c);
  CHECK(a1.v != c1.v);  // different stream id, different draws
}

TEST_CASE("substreams are independent of draw position") {
  RngStream a(5, 1);
  RngStream before = a.substream(77, 3);
  for (int i = 0; i < 100; ++i) a.next_u64();
  RngStream after = a.substream(77, 3);
  for (int i = 0; i < 16; ++i) CHECK(before.next_u64() == after.next_u64());
}
