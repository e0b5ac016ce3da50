#pragma once

// Central finite-difference comparison against tape gradients. Coordinates
// whose forward evaluation passes near a relu/maxpool kink are screened out,
// mirroring how the non-smooth points make the comparison meaningless.

#include <algorithm>
#include <cmath>
#include <functional>

#include "gstbench/params.hpp"
#include "gstbench/rng.hpp"
#include "gstbench/tape.hpp"

namespace gst::testsup {

struct GradCheck {
  int checked = 0;
  int passed = 0;
  int screened = 0;
  double worst_rel = 0.0;

  double pass_rate() const {
    return checked == 0 ? 1.0 : static_cast<double>(passed) / checked;
  }
};

// `build` records the scalar loss for the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

inline GradCheck check_gradients(ParamStore& store, const LossBuilder& build,
                                 double h = 1e-5, double tol = 1e-4,
                                 double screen = 1e-4,
                                 int max_coords_per_param = 0,
                                 std::uint64_t sample_seed = 1234) {
  Tape tape(&store, true);
  Var loss = build(tape);
  tape.backward(loss);

  GradCheck result;
  RngStream pick(sample_seed, 0);
  for (int pid = 0; pid < store.count(); ++pid) {
    auto& entry = store.entry(pid);
    const Tensor* analytic = tape.param_grad(pid);
    const std::size_t n = entry.value.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (max_coords_per_param > 0 &&
          n > static_cast<std::size_t>(max_coords_per_param) &&
          pick.next_uniform() >
              static_cast<double>(max_coords_per_param) / static_cast<double>(n))
        continue;
      const double saved = entry.value.v[i];

      entry.value.v[i] = saved + h;
      Tape tp(&store, false);
      const double fp = tp.value(build(tp)).v[0];
      const double margin_p = tp.kink_margin();

      entry.value.v[i] = saved - h;
      Tape tm(&store, false);
      const double fm = tm.value(build(tm)).v[0];
      const double margin_m = tm.kink_margin();

      entry.value.v[i] = saved;

      if (std::min(margin_p, margin_m) < screen) {
        ++result.screened;
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic ? analytic->v[i] : 0.0;
      const double diff = std::abs(a - numeric);
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double rel = scale > 0.0 ? diff / scale : 0.0;
      ++result.checked;
      if (diff <= tol * std::max(1.0, scale) || diff <= 1e-9) {
        ++result.passed;
      }
      result.worst_rel = std::max(result.worst_rel, rel);
    }
  }
  return result;
}

inline Tensor random_tensor(int c, int h, int w, RngStream& rng,
                            double scale = 1.0) {
  Tensor t(c, h, w);
  for (auto& x : t.v) x = scale * (2.0 * rng.next_uniform() - 1.0);
  return t;
}

}  // namespace gst::testsup
