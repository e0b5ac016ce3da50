#include <doctest.h>

#include <cmath>

#include "gstbench/tape.hpp"
#include "support/gradcheck.hpp"
#include "support/reference_ops.hpp"

using namespace gst;
using testsup::check_gradients;
using testsup::random_tensor;

TEST_CASE("conv2d forward matches the naive reference") {
  RngStream rng(21, 0);
  ParamStore store;
  Tensor x = random_tensor(3, 6, 5, rng);
  for (int ksize : {1, 3}) {
    Tensor w = random_tensor(4, 3, ksize * ksize, rng);
    Tensor b = random_tensor(4, 1, 1, rng);
    int wid = store.add("w" + std::to_string(ksize), w);
    int bid = store.add("b" + std::to_string(ksize), b);
    Tape t(&store, false);
    Var out = t.conv2d(t.input(x), t.param(wid), t.param(bid), ksize);
    Tensor expect = testref::naive_conv2d(x, w, &b, ksize);
    CHECK(testref::max_abs_diff(t.value(out), expect) < 1e-12);
  }
}

TEST_CASE("sum of squared parameters has gradient 2*param exactly") {
  RngStream rng(22, 0);
  ParamStore store;
  int pid = store.add("p", random_tensor(2, 3, 3, rng));
  Tape t(&store, true);
  Var loss = t.sum_squares(t.param(pid));
  t.backward(loss);
  const Tensor* g = t.param_grad(pid);
  REQUIRE(g != nullptr);
  for (std::size_t i = 0; i < g->size(); ++i)
    CHECK(g->v[i] == 2.0 * store.entry(pid).value.v[i]);
}

TEST_CASE("constant loss has zero gradients everywhere") {
  RngStream rng(22, 1);
  ParamStore store;
  int pid = store.add("p", random_tensor(1, 2, 2, rng));
  Tape t(&store, true);
  (void)t.param(pid);  // touched but not used by the loss
  Var loss = t.sum_squares(t.input(random_tensor(1, 4, 4, rng)));
  t.backward(loss);
  CHECK(t.param_grad(pid) == nullptr);
}

TEST_CASE("backward misuse is rejected") {
  ParamStore store;
  SUBCASE("no forward recorded") {
    Tape t(&store, true);
    CHECK_THROWS_AS(t.backward(Var{0}), Error);
  }
  SUBCASE("non-recording tape") {
    Tape t(&store, false);
    Var v = t.sum_squares(t.input(Tensor(1, 1, 1, 2.0)));
    CHECK_THROWS_AS(t.backward(v), Error);
  }
  SUBCASE("non-scalar loss") {
    RngStream rng(1, 1);
    int pid = store.add("p", random_tensor(1, 2, 2, rng));
    Tape t(&store, true);
    Var v = t.param(pid);
    CHECK_THROWS_AS(t.backward(v), Error);
  }
}

TEST_CASE("finite differences validate every differentiable op") {
  RngStream rng(23, 0);

  SUBCASE("conv2d k=3 with bias") {
    ParamStore store;
    int x = store.add("x", random_tensor(2, 5, 4, rng));
    int w = store.add("w", random_tensor(3, 2, 9, rng));
    int b = store.add("b", random_tensor(3, 1, 1, rng));
    auto res = check_gradients(store, [&](Tape& t) {
      return t.sum_squares(t.conv2d(t.param(x), t.param(w), t.param(b), 3));
    });
    CHECK(res.pass_rate() >= 0.99);
  }
  SUBCASE("conv2d k=1") {
    ParamStore store;
    int x = store.add("x", random_tensor(3, 4, 4, rng));
    int w = store.add("w", random_tensor(2, 3, 1, rng));
    auto res = check_gradients(store, [&](Tape& t) {
      return t.sum_squares(t.conv2d(t.param(x), t.param(w), Var{}, 1));
    });
    CHECK(res.pass_rate() >= 0.99);
  }
  SUBCASE("elementwise and gating ops") {
    ParamStore store;
    int a = store.add("a", random_tensor(2, 4, 4, rng));
    int b = store.add("b", random_tensor(2, 4, 4, rng));
    int g = store.add("g", random_tensor(1, 4, 4, rng));
    auto res = check_gradients(store, [&](Tape& t) {
      Var s = t.mul(t.add(t.param(a), t.param(b)), t.sub(t.param(a), t.param(b)));
      Var gated = t.mul_gate(t.sigmoid(t.param(g)), t.tanh_(s));
      return t.sum_squares(gated);
    });
    CHECK(res.pass_rate() >= 0.99);
  }
  SUBCASE("relu with kink screening") {
    ParamStore store;
    int a = store.add("a", random_tensor(2, 5, 5, rng));
    auto res = check_gradients(store, [&](Tape& t) {
      return t.sum_squares(t.relu(t.param(a)));
    });
    CHECK(res.checked > 0);
    CHECK(res.pass_rate() >= 0.99);
  }
  SUBCASE("concat and slice") {
    ParamStore store;
    int a = store.add("a", random_tensor(2, 3, 3, rng));
    int b = store.add("b", random_tensor(3, 3, 3, rng));
    auto res = check_gradients(store, [&](Tape& t) {
      Var cat = t.concat_c({t.param(a), t.param(b)});
      return t.sum_squares(t.slice_c(cat, 1, 3));
    });
    CHECK(res.pass_rate() >= 0.99);
  }
  SUBCASE("maxpool and upsample") {
    ParamStore store;
    int a = store.add("a", random_tensor(2, 6, 6, rng));
    auto res = check_gradients(store, [&](Tape& t) {
      return t.sum_squares(t.upsample2(t.maxpool2(t.param(a))));
    });
    CHECK(res.checked > 0);
    CHECK(res.pass_rate() >= 0.99);
  }
  SUBCASE("masked weighted mse") {
    ParamStore store;
    int a = store.add("a", random_tensor(1, 4, 4, rng));
    Tensor target = random_tensor(1, 4, 4, rng);
    Tensor mask(1, 4, 4, 1.0);
    mask.v[3] = 0.0;
    mask.v[7] = 0.0;
    Tensor weights(1, 4, 4, 1.0);
    for (auto& x : weights.v) x = 0.5 + rng.next_uniform();
    auto res = check_gradients(store, [&](Tape& t) {
      return t.masked_wmse(t.param(a), target, &mask, &weights);
    });
    CHECK(res.pass_rate() >= 0.99);
  }
  SUBCASE("binary cross entropy with logits") {
    ParamStore store;
    int a = store.add("a", random_tensor(1, 4, 4, rng, 2.0));
    Tensor labels(1, 4, 4, 0.0);
    for (auto& x : labels.v) x = rng.next_uniform() < 0.5 ? 0.0 : 1.0;
    auto res = check_gradients(store, [&](Tape& t) {
      return t.bce_logits(t.param(a), labels, nullptr);
    });
    CHECK(res.pass_rate() >= 0.99);
  }
}

TEST_CASE("masked weighted mse fixed values") {
  ParamStore store;
  Tensor pred(1, 1, 2, 0.0);
  pred.v = {1.0, 3.0};
  Tensor target(1, 1, 2, 0.0);
  Tensor mask(1, 1, 2, 0.0);
  mask.v = {1.0, 0.0};
  Tensor weights(1, 1, 2, 0.0);
  weights.v = {2.0, 9.0};

  Tape t(&store, false);
  Var loss = t.masked_wmse(t.input(pred), target, &mask, &weights);
  CHECK(t.value(loss).v[0] == doctest::Approx(1.0).epsilon(1e-15));

  // Perfect prediction.
  Tape t2(&store, false);
  Var z = t2.masked_wmse(t2.input(target), target, nullptr, nullptr);
  CHECK(t2.value(z).v[0] == 0.0);

  // A masked-out target cell cannot influence the loss.
  Tensor target2 = target;
  target2.v[1] = 1e9;
  Tape t3(&store, false);
  Var l3 = t3.masked_wmse(t3.input(pred), target2, &mask, &weights);
  CHECK(t3.value(l3).v[0] == t.value(loss).v[0]);

  // All-zero effective weight is rejected.
  Tensor zero_mask(1, 1, 2, 0.0);
  Tape t4(&store, false);
  CHECK_THROWS_AS(t4.masked_wmse(t4.input(pred), target, &zero_mask, nullptr), Error);
}

TEST_CASE("bce of a constant even-odds predictor is log 2") {
  ParamStore store;
  Tensor logits(1, 3, 3, 0.0);
  Tensor labels(1, 3, 3, 1.0);
  labels.v[0] = 0.0;
  Tape t(&store, false);
  Var loss = t.bce_logits(t.input(logits), labels, nullptr);
  CHECK(t.value(loss).v[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("adam update semantics") {
  SUBCASE("zero gradient leaves parameters unchanged from a fresh state") {
    ParamStore store;
    RngStream rng(24, 0);
    int pid = store.add("p", random_tensor(2, 2, 2, rng));
    Tensor before = store.entry(pid).value;
    store.zero_grads();
    store.adam_update(1e-3);
    CHECK(store.entry(pid).value == before);
  }
  SUBCASE("first step with unit gradient moves by about -lr") {
    ParamStore store;
    int pid = store.add("p", Tensor(1, 1, 1, 0.0));
    store.entry(pid).grad.v[0] = 1.0;
    store.adam_update(1e-3);
    CHECK(store.entry(pid).value.v[0] ==
          doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
  }
  SUBCASE("two identical runs produce bit-identical trajectories") {
    auto run = [] {
      ParamStore store;
      RngStream rng(25, 0);
      int pid = store.add("p", random_tensor(1, 3, 3, rng));
      for (int step = 0; step < 5; ++step) {
        Tape t(&store, true);
        Var loss = t.sum_squares(t.param(pid));
        t.backward(loss);
        store.zero_grads();
        t.merge_grads_into(store);
        store.adam_update(1e-2);
      }
      return store.entry(pid).value;
    };
    CHECK(run() == run());
  }
  SUBCASE("moments persist across calls") {
    ParamStore store;
    int pid = store.add("p", Tensor(1, 1, 1, 0.0));
    store.entry(pid).grad.v[0] = 1.0;
    store.adam_update(1e-3);
    const double m1 = store.entry(pid).m.v[0];
    store.zero_grads();
    store.adam_update(1e-3);
    CHECK(store.entry(pid).m.v[0] == doctest::Approx(0.9 * m1).epsilon(1e-12));
    CHECK(store.adam_step_count() == 2);
  }
}
