#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gstbench/field.hpp"
#include "gstbench/lattice.hpp"
#include "gstbench/rng.hpp"

namespace gst {

// Coefficients and stencils of the synthetic confounded lattice process.
// Defaults reproduce the reference configuration exactly.
struct DgpParams {
  // Covariate update: x_t = a0 + a1*x_{t-1} + a2*treat_{t-1} + a3*(kX*x_{t-1}) + eps_x
  double alpha0 = 0.5, alpha1 = 0.5, alpha2 = -2.0, alpha3 = 0.2;
  // Treatment logit: p_t = sigmoid(beta1 * (beta0 + mean_{l=0..L-1} kA*x_{t-l}))
  double beta0 = -1.0;
  double beta1 = 1.0;  // confounding strength; 0 removes covariate feedback
  // Outcome update: y_t = g0 + g1*(kYA*a_{t-1}) + g2*mean_{l=1..L} kYX*x_{t-l} + g3*y_{t-1} + eps_y
  double gamma0 = 2.0, gamma1 = 1.5, gamma2 = 0.5, gamma3 = 0.5;
  Kernel3 kX = Kernel3::drift();
  Kernel3 kA = Kernel3::smoothing();
  Kernel3 kYA = Kernel3::smoothing();
  Kernel3 kYX = Kernel3::smoothing();
  int lags = 5;  // L
  double noise_std_x = 1.0;
  double noise_std_y = 1.0;
  int grid_width = 64;
  int grid_height = 64;
  int burn_in = 20;

  void validate() const;
};

// Time-indexed stacks of covariate/treatment/outcome slices, plus optional
// static covariates and a validity mask (masked-out cells are zero in every
// stack).
struct Trajectory {
  std::vector<Field> x;
  std::vector<Field> a;
  std::vector<Field> y;
  std::vector<Field> static_v;
  std::optional<Field> mask;

  int length() const { return static_cast<int>(x.size()); }
  int width() const { return x.empty() ? 0 : x[0].width; }
  int height() const { return x.empty() ? 0 : x[0].height; }

  // Zeroes masked-out cells in every stack and records the mask.
  void apply_mask(const Field& m);
  void validate() const;
};

// Fixed treatment sequence a_{t}, ..., a_{t+horizon-1} applied from `start`
// (1-based time index of the first intervened step).
struct InterventionPlan {
  int start = 1;
  int horizon = 1;
  std::vector<Field> a_plan;

  void validate() const;
};

// One evaluation instance: an observed history, the shared plan, and the
// exact conditional mean outcome per horizon step.
struct TestCase {
  Trajectory history;
  InterventionPlan plan;
  Field true_capo;                    // final-step conditional mean outcome
  std::vector<Field> per_step_capo;   // all horizon steps, diagnostics
};

struct StepResult {
  Field x;
  Field a;
  Field p_treat;
  Field y;
};

// Substream tags used by the simulator; exposed so counterfactual rollouts
// can replay the exact per-step noise of a factual run.
namespace rng_tag {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kEpsX = 2;
inline constexpr std::uint64_t kTreat = 3;
inline constexpr std::uint64_t kEpsY = 4;
inline constexpr std::uint64_t kRollout = 5;
}  // namespace rng_tag

// One transition. `x_prev` holds at least L prior covariate slices ordered
// oldest-to-newest. Noise and the treatment draw come from per-step
// substreams of `rng` at absolute step index `step`; passing nullptr runs
// the noiseless dynamics, in which case the treatment slice equals the
// treatment probability unless `forced_a` overrides it.
StepResult dgp_step(const std::vector<Field>& x_prev, const Field& a_prev,
                    const Field& y_prev, const DgpParams& params,
                    const RngStream* rng, std::uint64_t step,
                    const Field* forced_a = nullptr);

// Factual simulation: gaussian-initialized lag buffer, `burn_in` discarded
// steps, then T recorded steps. Deterministic given (rng seed, stream).
Trajectory simulate_factual(const DgpParams& params, int T, const RngStream& rng);

enum class RolloutMode { Noisy, Noiseless };

// Evolves covariates and outcomes forward `plan.horizon` steps with the
// treatment path fixed to the plan (treatment equation bypassed). Returns
// the outcome slice of each horizon step. In noisy mode, per-step noise is
// drawn from substreams of `rng` starting at absolute step `first_step`, so
// passing a factual run's stream and offset reproduces its continuation.
std::vector<Field> counterfactual_rollout(const Trajectory& history,
                                          const InterventionPlan& plan,
                                          const DgpParams& params,
                                          RolloutMode mode,
                                          const RngStream& rng = RngStream(),
                                          std::uint64_t first_step = 0);

struct MonteCarloCapo {
  std::vector<Field> mean;    // per horizon step
  std::vector<Field> stderr_; // standard error of the mean, per step
};

// Per-cell mean and standard error over n_rollouts independent noisy
// counterfactual rollouts.
MonteCarloCapo monte_carlo_capo(const Trajectory& history,
                                const InterventionPlan& plan,
                                const DgpParams& params, int n_rollouts,
                                const RngStream& rng);

// Exact conditional mean outcomes under the plan. The transition is affine
// in (x, y, noise) once treatments are fixed, so the conditional mean equals
// the zero-noise rollout.
std::vector<Field> analytic_capo(const Trajectory& history,
                                 const InterventionPlan& plan,
                                 const DgpParams& params);

// n_test fresh histories of length l_H (tail of a params_T-step simulation),
// one shared random plan, and exact per-case ground truth.
std::vector<TestCase> build_test_set(const DgpParams& params, int n_test,
                                     int l_H, int tau,
                                     const RngStream& plan_rng,
                                     const RngStream& history_rng,
                                     int params_T);

// Canonical stacked export of one test case:
// [outcome history (l_H) | plan (tau) | true final-step mean (1)].
std::vector<Field> stacked_test_case(const TestCase& tc);

}  // namespace gst
