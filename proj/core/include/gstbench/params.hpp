#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gstbench/rng.hpp"
#include "gstbench/tensor.hpp"

namespace gst {

// Named learnable tensors. Every parameter carries a gradient slot and two
// Adam moment slots of identical shape; moments persist across updates.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
  };

  int add(const std::string& name, Tensor init) {
    require(by_name_.find(name) == by_name_.end(), ErrorCode::InvalidArgument,
            "parameter registered twice: " + name);
    Entry e;
    e.name = name;
    e.grad = Tensor(init.c, init.h, init.w, 0.0);
    e.m = e.grad;
    e.v = e.grad;
    e.value = std::move(init);
    entries_.push_back(std::move(e));
    const int id = static_cast<int>(entries_.size()) - 1;
    by_name_[name] = id;
    return id;
  }

  int find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? -1 : it->second;
  }

  Entry& entry(int id) { return entries_[static_cast<std::size_t>(id)]; }
  const Entry& entry(int id) const { return entries_[static_cast<std::size_t>(id)]; }
  int count() const { return static_cast<int>(entries_.size()); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  void zero_grads() {
    for (auto& e : entries_)
      std::fill(e.grad.v.begin(), e.grad.v.end(), 0.0);
  }

  // Standard Adam step with bias correction, applied to every entry.
  void adam_update(double lr, double beta_m = 0.9, double beta_v = 0.999,
                   double eps = 1e-8) {
    ++adam_t_;
    const double bc_m = 1.0 - std::pow(beta_m, static_cast<double>(adam_t_));
    const double bc_v = 1.0 - std::pow(beta_v, static_cast<double>(adam_t_));
    for (auto& e : entries_) {
      for (std::size_t i = 0; i < e.value.size(); ++i) {
        const double g = e.grad.v[i];
        e.m.v[i] = beta_m * e.m.v[i] + (1.0 - beta_m) * g;
        e.v.v[i] = beta_v * e.v.v[i] + (1.0 - beta_v) * g * g;
        const double m_hat = e.m.v[i] / bc_m;
        const double v_hat = e.v.v[i] / bc_v;
        e.value.v[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
      }
    }
  }

  std::int64_t adam_step_count() const { return adam_t_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> by_name_;
  std::int64_t adam_t_ = 0;
};

// Xavier-uniform initialization for a convolution weight of shape
// (out_ch, in_ch, k*k); biases are zero-initialized by the caller.
inline Tensor xavier_conv(int out_ch, int in_ch, int ksize, RngStream rng) {
  Tensor t(out_ch, in_ch, ksize * ksize);
  const double fan_in = static_cast<double>(in_ch) * ksize * ksize;
  const double fan_out = static_cast<double>(out_ch) * ksize * ksize;
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& x : t.v) x = a * (2.0 * rng.next_uniform() - 1.0);
  return t;
}

}  // namespace gst
