#include "gstbench/dgp.hpp"

#include <cmath>
#include <string>

namespace gst {

void DgpParams::validate() const {
  require(beta1 >= 0.0, ErrorCode::InvalidArgument, "dgp: beta1 must be >= 0");
  require(lags >= 1, ErrorCode::InvalidArgument, "dgp: lags must be >= 1");
  require(noise_std_x >= 0.0 && noise_std_y >= 0.0, ErrorCode::InvalidArgument,
          "dgp: noise std must be >= 0");
  require(grid_width > 0 && grid_height > 0, ErrorCode::InvalidArgument,
          "dgp: grid dimensions must be positive");
  require(burn_in >= 0, ErrorCode::InvalidArgument, "dgp: burn_in must be >= 0");
}

void Trajectory::validate() const {
  require(x.size() == a.size() && a.size() == y.size(),
          ErrorCode::InvalidState, "trajectory: stacks must share length");
  for (int t = 0; t < length(); ++t) {
    require(x[t].same_shape(x[0]) && a[t].same_shape(x[0]) && y[t].same_shape(x[0]),
            ErrorCode::InvalidState, "trajectory: stacks must share grid shape");
    for (double av : a[t].v)
      require(av == 0.0 || av == 1.0, ErrorCode::InvalidState,
              "trajectory: treatment values must be binary");
  }
}

void Trajectory::apply_mask(const Field& m) {
  require(length() > 0 && m.same_shape(x[0]), ErrorCode::InvalidArgument,
          "trajectory: mask shape mismatch");
  auto zero_out = [&m](Field& f) {
    for (std::size_t i = 0; i < f.size(); ++i)
      if (m.v[i] == 0.0) f.v[i] = 0.0;
  };
  for (auto& f : x) zero_out(f);
  for (auto& f : a) zero_out(f);
  for (auto& f : y) zero_out(f);
  for (auto& f : static_v) zero_out(f);
  mask = m;
}

void InterventionPlan::validate() const {
  require(horizon >= 1, ErrorCode::InvalidArgument, "plan: horizon must be >= 1");
  require(static_cast<int>(a_plan.size()) == horizon, ErrorCode::InvalidArgument,
          "plan: horizon must equal the number of plan slices");
  for (const auto& f : a_plan)
    for (double av : f.v)
      require(av == 0.0 || av == 1.0, ErrorCode::InvalidArgument,
              "plan: treatment values must be binary");
}

namespace {

void add_inplace(Field& dst, const Field& src, double s = 1.0) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.v[i] += s * src.v[i];
}

// x_t from x_{t-1} and a_{t-1}; `x_lags` ends at x_{t-1}.
Field x_update(const std::vector<Field>& x_lags, const Field& a_prev,
               const DgpParams& p, const RngStream* rng, std::uint64_t step) {
  const Field& x1 = x_lags.back();
  Field out(x1.width, x1.height, p.alpha0);
  add_inplace(out, x1, p.alpha1);
  add_inplace(out, a_prev, p.alpha2);
  add_inplace(out, conv2_same(x1, p.kX), p.alpha3);
  if (rng && p.noise_std_x > 0.0) {
    RngStream s = rng->substream(rng_tag::kEpsX, step);
    add_inplace(out, gaussian_field(x1.width, x1.height, 0.0, p.noise_std_x, s));
  }
  return out;
}

// y_t from the L covariate slices before t, a_{t-1}, and y_{t-1};
// `x_lags` ends at x_{t-1}.
Field y_update(const std::vector<Field>& x_lags, const Field& a_prev,
               const Field& y_prev, const DgpParams& p, const RngStream* rng,
               std::uint64_t step) {
  const int L = p.lags;
  Field out(y_prev.width, y_prev.height, p.gamma0);
  add_inplace(out, conv2_same(a_prev, p.kYA), p.gamma1);
  for (int l = 1; l <= L; ++l)
    add_inplace(out, conv2_same(x_lags[x_lags.size() - l], p.kYX), p.gamma2 / L);
  add_inplace(out, y_prev, p.gamma3);
  if (rng && p.noise_std_y > 0.0) {
    RngStream s = rng->substream(rng_tag::kEpsY, step);
    add_inplace(out, gaussian_field(out.width, out.height, 0.0, p.noise_std_y, s));
  }
  return out;
}

// Treatment probability at t; `x_incl` ends at the just-computed x_t.
Field treat_prob(const std::vector<Field>& x_incl, const DgpParams& p) {
  const int L = p.lags;
  const Field& x0 = x_incl.back();
  Field logit(x0.width, x0.height, p.beta0);
  for (int l = 0; l < L; ++l)
    add_inplace(logit, conv2_same(x_incl[x_incl.size() - 1 - l], p.kA), 1.0 / L);
  for (auto& x : logit.v) x *= p.beta1;
  return sigmoid_map(logit);
}

}  // namespace

StepResult dgp_step(const std::vector<Field>& x_prev, const Field& a_prev,
                    const Field& y_prev, const DgpParams& params,
                    const RngStream* rng, std::uint64_t step,
                    const Field* forced_a) {
  params.validate();
  require(static_cast<int>(x_prev.size()) >= params.lags, ErrorCode::InvalidState,
          "dgp_step: need at least L prior covariate slices");

  StepResult out;
  // Update order within a step is x, then a, then y.
  out.x = x_update(x_prev, a_prev, params, rng, step);
  out.y = y_update(x_prev, a_prev, y_prev, params, rng, step);

  std::vector<Field> x_incl = x_prev;
  x_incl.push_back(out.x);
  out.p_treat = treat_prob(x_incl, params);
  if (forced_a != nullptr) {
    out.a = *forced_a;
  } else if (rng) {
    RngStream s = rng->substream(rng_tag::kTreat, step);
    out.a = bernoulli_field(out.p_treat, s);
  } else {
    out.a = out.p_treat;  // noiseless mode leaves the draw unsampled
  }
  return out;
}

Trajectory simulate_factual(const DgpParams& params, int T, const RngStream& rng) {
  params.validate();
  require(T >= 1, ErrorCode::InvalidArgument, "simulate_factual: T must be >= 1");
  const int w = params.grid_width, h = params.grid_height;
  const int L = params.lags;

  std::vector<Field> x_lags;
  x_lags.reserve(static_cast<std::size_t>(L) + params.burn_in + T);
  for (int i = 0; i < L; ++i) {
    RngStream s = rng.substream(rng_tag::kInit, i);
    x_lags.push_back(gaussian_field(w, h, 0.0, 1.0, s));
  }
  RngStream init_a = rng.substream(rng_tag::kInit, L);
  Field a_prev = bernoulli_field(Field(w, h, 0.5), init_a);
  Field y_prev(w, h, params.gamma0);

  Trajectory traj;
  traj.x.reserve(T);
  traj.a.reserve(T);
  traj.y.reserve(T);
  const int total = params.burn_in + T;
  for (int k = 0; k < total; ++k) {
    Field x_new = x_update(x_lags, a_prev, params, &rng, k);
    Field y_new = y_update(x_lags, a_prev, y_prev, params, &rng, k);
    x_lags.push_back(std::move(x_new));
    Field p = treat_prob(x_lags, params);
    RngStream s = rng.substream(rng_tag::kTreat, k);
    a_prev = bernoulli_field(p, s);
    y_prev = std::move(y_new);
    if (k >= params.burn_in) {
      traj.x.push_back(x_lags.back());
      traj.a.push_back(a_prev);
      traj.y.push_back(y_prev);
    }
  }
  return traj;
}

std::vector<Field> counterfactual_rollout(const Trajectory& history,
                                          const InterventionPlan& plan,
                                          const DgpParams& params,
                                          RolloutMode mode,
                                          const RngStream& rng,
                                          std::uint64_t first_step) {
  params.validate();
  plan.validate();
  const int L = params.lags;
  require(history.length() >= L, ErrorCode::InvalidState,
          "counterfactual_rollout: history shorter than the lag order");

  std::vector<Field> x_lags(history.x.end() - L, history.x.end());
  Field y_prev = history.y.back();
  const RngStream* noise = mode == RolloutMode::Noisy ? &rng : nullptr;

  // The treatment path is fixed to the plan; the treatment equation never
  // runs, so the result does not depend on beta0/beta1.
  std::vector<Field> outcomes;
  outcomes.reserve(plan.horizon);
  for (int j = 0; j < plan.horizon; ++j) {
    const std::uint64_t step = first_step + static_cast<std::uint64_t>(j);
    const Field& a_prev = plan.a_plan[j];
    Field x_new = x_update(x_lags, a_prev, params, noise, step);
    Field y_new = y_update(x_lags, a_prev, y_prev, params, noise, step);
    x_lags.push_back(std::move(x_new));
    y_prev = y_new;
    outcomes.push_back(std::move(y_new));
  }
  return outcomes;
}

MonteCarloCapo monte_carlo_capo(const Trajectory& history,
                                const InterventionPlan& plan,
                                const DgpParams& params, int n_rollouts,
                                const RngStream& rng) {
  require(n_rollouts >= 2, ErrorCode::InvalidArgument,
          "monte_carlo_capo: need at least 2 rollouts");
  const int tau = plan.horizon;
  const int w = history.width(), h = history.height();
  std::vector<Field> sum(tau, Field(w, h, 0.0));
  std::vector<Field> sum_sq(tau, Field(w, h, 0.0));
  for (int r = 0; r < n_rollouts; ++r) {
    RngStream s = rng.substream(rng_tag::kRollout, r);
    auto ys = counterfactual_rollout(history, plan, params, RolloutMode::Noisy, s, 0);
    for (int j = 0; j < tau; ++j) {
      for (std::size_t i = 0; i < ys[j].size(); ++i) {
        sum[j].v[i] += ys[j].v[i];
        sum_sq[j].v[i] += ys[j].v[i] * ys[j].v[i];
      }
    }
  }
  MonteCarloCapo out;
  out.mean.assign(tau, Field(w, h, 0.0));
  out.stderr_.assign(tau, Field(w, h, 0.0));
  const double n = n_rollouts;
  for (int j = 0; j < tau; ++j) {
    for (std::size_t i = 0; i < sum[j].size(); ++i) {
      const double m = sum[j].v[i] / n;
      double var = (sum_sq[j].v[i] - n * m * m) / (n - 1.0);
      if (var < 0.0) var = 0.0;  // cancellation guard
      out.mean[j].v[i] = m;
      out.stderr_[j].v[i] = std::sqrt(var / n);
    }
  }
  return out;
}

std::vector<Field> analytic_capo(const Trajectory& history,
                                 const InterventionPlan& plan,
                                 const DgpParams& params) {
  return counterfactual_rollout(history, plan, params, RolloutMode::Noiseless);
}

std::vector<TestCase> build_test_set(const DgpParams& params, int n_test,
                                     int l_H, int tau,
                                     const RngStream& plan_rng,
                                     const RngStream& history_rng,
                                     int params_T) {
  require(n_test >= 1, ErrorCode::InvalidArgument,
          "build_test_set: n_test must be >= 1");
  require(l_H >= params.lags, ErrorCode::InvalidArgument,
          "build_test_set: history length must cover the lag order");
  require(params_T >= l_H, ErrorCode::InvalidArgument,
          "build_test_set: simulation length must cover l_H");

  // One plan, drawn once and shared by every test case.
  InterventionPlan plan;
  plan.start = l_H;
  plan.horizon = tau;
  const Field half(params.grid_width, params.grid_height, 0.5);
  for (int j = 0; j < tau; ++j) {
    RngStream s = plan_rng.substream(rng_tag::kRollout, j);
    plan.a_plan.push_back(bernoulli_field(half, s));
  }

  std::vector<TestCase> cases;
  cases.reserve(n_test);
  for (int i = 0; i < n_test; ++i) {
    RngStream s = history_rng.substream(rng_tag::kRollout, i);
    Trajectory full = simulate_factual(params, params_T, s);
    TestCase tc;
    tc.history.x.assign(full.x.end() - l_H, full.x.end());
    tc.history.a.assign(full.a.end() - l_H, full.a.end());
    tc.history.y.assign(full.y.end() - l_H, full.y.end());
    tc.plan = plan;
    tc.per_step_capo = analytic_capo(tc.history, plan, params);
    tc.true_capo = tc.per_step_capo.back();
    cases.push_back(std::move(tc));
  }
  return cases;
}

std::vector<Field> stacked_test_case(const TestCase& tc) {
  std::vector<Field> out;
  out.reserve(tc.history.length() + tc.plan.horizon + 1);
  for (const auto& f : tc.history.y) out.push_back(f);
  for (const auto& f : tc.plan.a_plan) out.push_back(f);
  out.push_back(tc.true_capo);
  return out;
}

}  // namespace gst
