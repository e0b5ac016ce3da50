#include "gstbench/tape.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace gst {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMat>;
using MapRowC = Eigen::Map<const RowMat>;

// Patch matrix for 3x3 same-convolution: row q = (cin*9 + ki*3 + kj),
// column s = r*W + c, entry x(cin, r+ki-1, c+kj-1) with zero padding.
void im2col3(const Tensor& x, RowMat& P) {
  const int H = x.h, W = x.w;
  const std::size_t hw = x.plane();
  P.setZero(x.c * 9, static_cast<Eigen::Index>(hw));
  for (int cin = 0; cin < x.c; ++cin) {
    const double* plane = x.v.data() + static_cast<std::size_t>(cin) * hw;
    for (int ki = 0; ki < 3; ++ki) {
      const int dr = ki - 1;
      for (int kj = 0; kj < 3; ++kj) {
        const int dc = kj - 1;
        double* row = P.data() + static_cast<std::size_t>(cin * 9 + ki * 3 + kj) * hw;
        const int r0 = std::max(0, -dr), r1 = H - std::max(0, dr);
        const int c0 = std::max(0, -dc), c1 = W - std::max(0, dc);
        if (c1 <= c0) continue;
        for (int r = r0; r < r1; ++r) {
          std::memcpy(row + static_cast<std::size_t>(r) * W + c0,
                      plane + static_cast<std::size_t>(r + dr) * W + (c0 + dc),
                      static_cast<std::size_t>(c1 - c0) * sizeof(double));
        }
      }
    }
  }
}

// Transpose of im2col3: scatter-adds patch-gradient rows back onto dx.
void col2im3(const RowMat& dP, Tensor& dx) {
  const int H = dx.h, W = dx.w;
  const std::size_t hw = dx.plane();
  for (int cin = 0; cin < dx.c; ++cin) {
    double* plane = dx.v.data() + static_cast<std::size_t>(cin) * hw;
    for (int ki = 0; ki < 3; ++ki) {
      const int dr = ki - 1;
      for (int kj = 0; kj < 3; ++kj) {
        const int dc = kj - 1;
        const double* row = dP.data() + static_cast<std::size_t>(cin * 9 + ki * 3 + kj) * hw;
        const int r0 = std::max(0, -dr), r1 = H - std::max(0, dr);
        const int c0 = std::max(0, -dc), c1 = W - std::max(0, dc);
        for (int r = r0; r < r1; ++r) {
          double* dst = plane + static_cast<std::size_t>(r + dr) * W + (c0 + dc);
          const double* src = row + static_cast<std::size_t>(r) * W + c0;
          for (int c = 0; c < c1 - c0; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

}  // namespace

Tape::Tape(const ParamStore* params, bool record_grads)
    : params_(params), record_grads_(record_grads) {
  if (params_) param_grads_.resize(static_cast<std::size_t>(params_->count()));
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::at(Var v) {
  require(v.valid() && v.i < static_cast<int>(nodes_.size()),
          ErrorCode::InvalidArgument, "tape: invalid node handle");
  return nodes_[static_cast<std::size_t>(v.i)];
}
const Tape::Node& Tape::at(Var v) const {
  require(v.valid() && v.i < static_cast<int>(nodes_.size()),
          ErrorCode::InvalidArgument, "tape: invalid node handle");
  return nodes_[static_cast<std::size_t>(v.i)];
}

Tensor& Tape::grad_of(Var v) {
  Node& n = at(v);
  if (n.grad.size() == 0) n.grad = Tensor(n.val.c, n.val.h, n.val.w, 0.0);
  return n.grad;
}

Var Tape::input(Tensor value) {
  Node n;
  n.op = Op::Input;
  n.val = std::move(value);
  return push(std::move(n));
}

Var Tape::param(int pid) {
  require(params_ != nullptr && pid >= 0 && pid < params_->count(),
          ErrorCode::InvalidArgument, "tape: unknown parameter id");
  Node n;
  n.op = Op::Param;
  n.val = params_->entry(pid).value;
  n.pid = pid;
  n.needs_grad = record_grads_;
  return push(std::move(n));
}

Var Tape::conv2d(Var x, Var weight, Var bias, int ksize) {
  require(ksize == 1 || ksize == 3, ErrorCode::InvalidArgument,
          "conv2d: kernel size must be 1 or 3");
  const Tensor& xv = at(x).val;
  const Tensor& wv = at(weight).val;
  require(wv.h == xv.c && wv.w == ksize * ksize, ErrorCode::InvalidArgument,
          "conv2d: weight shape mismatch");
  const int cout = wv.c;
  const std::size_t hw = xv.plane();

  Node n;
  n.op = Op::Conv2d;
  n.a = x.i;
  n.b = weight.i;
  n.c = bias.valid() ? bias.i : -1;
  n.i0 = ksize;
  n.val = Tensor(cout, xv.h, xv.w, 0.0);

  MapRow out(n.val.v.data(), cout, static_cast<Eigen::Index>(hw));
  MapRowC wm(wv.v.data(), cout, wv.h * wv.w);
  if (ksize == 3) {
    RowMat P;
    im2col3(xv, P);
    out.noalias() = wm * P;
  } else {
    MapRowC xm(xv.v.data(), xv.c, static_cast<Eigen::Index>(hw));
    out.noalias() = wm * xm;
  }
  if (n.c >= 0) {
    const Tensor& bv = at(bias).val;
    require(bv.c == cout && bv.h == 1 && bv.w == 1, ErrorCode::InvalidArgument,
            "conv2d: bias shape mismatch");
    for (int ch = 0; ch < cout; ++ch)
      out.row(ch).array() += bv.v[static_cast<std::size_t>(ch)];
  }
  n.needs_grad = track(x) || track(weight) || (bias.valid() && track(bias));
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Tensor& av = at(a).val;
  const Tensor& bv = at(b).val;
  require(av.same_shape(bv), ErrorCode::InvalidArgument, "add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a.i;
  n.b = b.i;
  n.val = av;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] += bv.v[i];
  n.needs_grad = track(a) || track(b);
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  const Tensor& av = at(a).val;
  const Tensor& bv = at(b).val;
  require(av.same_shape(bv), ErrorCode::InvalidArgument, "sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.a = a.i;
  n.b = b.i;
  n.val = av;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] -= bv.v[i];
  n.needs_grad = track(a) || track(b);
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  const Tensor& av = at(a).val;
  const Tensor& bv = at(b).val;
  require(av.same_shape(bv), ErrorCode::InvalidArgument, "mul: shape mismatch");
  Node n;
  n.op = Op::Mul;
  n.a = a.i;
  n.b = b.i;
  n.val = av;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] *= bv.v[i];
  n.needs_grad = track(a) || track(b);
  return push(std::move(n));
}

Var Tape::mul_gate(Var gate, Var x) {
  const Tensor& gv = at(gate).val;
  const Tensor& xv = at(x).val;
  require(gv.c == 1 && gv.h == xv.h && gv.w == xv.w, ErrorCode::InvalidArgument,
          "mul_gate: gate must be a single matching-plane channel");
  Node n;
  n.op = Op::MulGate;
  n.a = gate.i;
  n.b = x.i;
  n.val = xv;
  const std::size_t hw = xv.plane();
  for (int ch = 0; ch < xv.c; ++ch)
    for (std::size_t i = 0; i < hw; ++i)
      n.val.v[static_cast<std::size_t>(ch) * hw + i] *= gv.v[i];
  n.needs_grad = track(gate) || track(x);
  return push(std::move(n));
}

Var Tape::sigmoid(Var x) {
  Node n;
  n.op = Op::Sigmoid;
  n.a = x.i;
  n.val = at(x).val;
  for (auto& v : n.val.v) {
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
  n.needs_grad = track(x);
  return push(std::move(n));
}

Var Tape::tanh_(Var x) {
  Node n;
  n.op = Op::Tanh;
  n.a = x.i;
  n.val = at(x).val;
  for (auto& v : n.val.v) v = std::tanh(v);
  n.needs_grad = track(x);
  return push(std::move(n));
}

Var Tape::relu(Var x) {
  Node n;
  n.op = Op::Relu;
  n.a = x.i;
  n.val = at(x).val;
  for (auto& v : n.val.v) {
    kink_margin_ = std::min(kink_margin_, std::abs(v));
    if (v < 0.0) v = 0.0;
  }
  n.needs_grad = track(x);
  return push(std::move(n));
}

Var Tape::concat_c(const std::vector<Var>& xs) {
  require(!xs.empty(), ErrorCode::InvalidArgument, "concat_c: no inputs");
  int ctot = 0;
  const Tensor& first = at(xs[0]).val;
  for (Var v : xs) {
    const Tensor& t = at(v).val;
    require(t.h == first.h && t.w == first.w, ErrorCode::InvalidArgument,
            "concat_c: plane shape mismatch");
    ctot += t.c;
  }
  Node n;
  n.op = Op::ConcatC;
  n.val = Tensor(ctot, first.h, first.w, 0.0);
  std::size_t off = 0;
  for (Var v : xs) {
    const Tensor& t = at(v).val;
    std::copy(t.v.begin(), t.v.end(), n.val.v.begin() + off);
    off += t.size();
    n.arg.push_back(v.i);
    n.needs_grad = n.needs_grad || track(v);
  }
  return push(std::move(n));
}

Var Tape::slice_c(Var x, int from, int count) {
  const Tensor& xv = at(x).val;
  require(from >= 0 && count >= 1 && from + count <= xv.c,
          ErrorCode::InvalidArgument, "slice_c: channel range out of bounds");
  Node n;
  n.op = Op::SliceC;
  n.a = x.i;
  n.i0 = from;
  n.i1 = count;
  n.val = Tensor(count, xv.h, xv.w, 0.0);
  const std::size_t off = static_cast<std::size_t>(from) * xv.plane();
  std::copy(xv.v.begin() + off, xv.v.begin() + off + n.val.size(), n.val.v.begin());
  n.needs_grad = track(x);
  return push(std::move(n));
}

Var Tape::maxpool2(Var x) {
  const Tensor& xv = at(x).val;
  require(xv.h % 2 == 0 && xv.w % 2 == 0, ErrorCode::InvalidConfiguration,
          "maxpool2: plane dimensions must be even");
  Node n;
  n.op = Op::MaxPool2;
  n.a = x.i;
  n.val = Tensor(xv.c, xv.h / 2, xv.w / 2, 0.0);
  n.arg.resize(n.val.size());
  std::size_t o = 0;
  for (int ch = 0; ch < xv.c; ++ch) {
    for (int r = 0; r < xv.h; r += 2) {
      for (int c = 0; c < xv.w; c += 2) {
        int best = 0;
        double bv = -1e300, second = -1e300;
        const int idx[4][2] = {{r, c}, {r, c + 1}, {r + 1, c}, {r + 1, c + 1}};
        for (int k = 0; k < 4; ++k) {
          const double cand = xv.at(ch, idx[k][0], idx[k][1]);
          if (cand > bv) {
            second = bv;
            bv = cand;
            best = k;
          } else if (cand > second) {
            second = cand;
          }
        }
        kink_margin_ = std::min(kink_margin_, bv - second);
        n.val.v[o] = bv;
        n.arg[o] = (ch * xv.h + idx[best][0]) * xv.w + idx[best][1];
        ++o;
      }
    }
  }
  n.needs_grad = track(x);
  return push(std::move(n));
}

Var Tape::upsample2(Var x) {
  const Tensor& xv = at(x).val;
  Node n;
  n.op = Op::Upsample2;
  n.a = x.i;
  n.val = Tensor(xv.c, xv.h * 2, xv.w * 2, 0.0);
  for (int ch = 0; ch < xv.c; ++ch)
    for (int r = 0; r < n.val.h; ++r)
      for (int c = 0; c < n.val.w; ++c)
        n.val.at(ch, r, c) = xv.at(ch, r / 2, c / 2);
  n.needs_grad = track(x);
  return push(std::move(n));
}

Var Tape::masked_wmse(Var pred, const Tensor& target, const Tensor* mask,
                      const Tensor* weights) {
  const Tensor& pv = at(pred).val;
  require(pv.same_shape(target), ErrorCode::InvalidArgument,
          "masked_wmse: prediction/target shape mismatch");
  Node n;
  n.op = Op::MaskedWMSE;
  n.a = pred.i;
  n.aux0 = target;
  n.aux1 = Tensor(pv.c, pv.h, pv.w, 1.0);
  if (mask) {
    require(mask->same_shape(pv), ErrorCode::InvalidArgument,
            "masked_wmse: mask shape mismatch");
    for (std::size_t i = 0; i < n.aux1.size(); ++i) n.aux1.v[i] *= mask->v[i];
  }
  if (weights) {
    require(weights->same_shape(pv), ErrorCode::InvalidArgument,
            "masked_wmse: weight shape mismatch");
    for (std::size_t i = 0; i < n.aux1.size(); ++i) {
      require(weights->v[i] >= 0.0, ErrorCode::InvalidArgument,
              "masked_wmse: weights must be >= 0");
      n.aux1.v[i] *= weights->v[i];
    }
  }
  double denom = 0.0, num = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = pv.v[i] - target.v[i];
    num += n.aux1.v[i] * d * d;
    denom += n.aux1.v[i];
  }
  require(denom > 0.0, ErrorCode::InvalidArgument,
          "masked_wmse: mask/weight sum must be positive");
  n.x0 = denom;
  n.val = Tensor(1, 1, 1, num / denom);
  n.needs_grad = track(pred);
  return push(std::move(n));
}

Var Tape::bce_logits(Var pred, const Tensor& labels, const Tensor* mask) {
  const Tensor& pv = at(pred).val;
  require(pv.same_shape(labels), ErrorCode::InvalidArgument,
          "bce_logits: prediction/label shape mismatch");
  Node n;
  n.op = Op::BceLogits;
  n.a = pred.i;
  n.aux0 = labels;
  n.aux1 = Tensor(pv.c, pv.h, pv.w, 1.0);
  if (mask) {
    require(mask->same_shape(pv), ErrorCode::InvalidArgument,
            "bce_logits: mask shape mismatch");
    for (std::size_t i = 0; i < n.aux1.size(); ++i) n.aux1.v[i] *= mask->v[i];
  }
  double denom = 0.0, num = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double z = pv.v[i], y = labels.v[i];
    // max(z,0) - z*y + log(1 + exp(-|z|)), stable for large |z|
    const double ell = std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    num += n.aux1.v[i] * ell;
    denom += n.aux1.v[i];
  }
  require(denom > 0.0, ErrorCode::InvalidArgument,
          "bce_logits: mask sum must be positive");
  n.x0 = denom;
  n.val = Tensor(1, 1, 1, num / denom);
  n.needs_grad = track(pred);
  return push(std::move(n));
}

Var Tape::sum_squares(Var x) {
  Node n;
  n.op = Op::SumSquares;
  n.a = x.i;
  double s = 0.0;
  for (double v : at(x).val.v) s += v * v;
  n.val = Tensor(1, 1, 1, s);
  n.needs_grad = track(x);
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const { return at(v).val; }

void Tape::backward(Var loss, double seed) {
  require(record_grads_, ErrorCode::InvalidState,
          "backward: tape was not recording gradients");
  require(!nodes_.empty(), ErrorCode::InvalidState,
          "backward: no forward pass recorded");
  Node& ln = at(loss);
  require(ln.val.size() == 1, ErrorCode::InvalidState,
          "backward: loss must be scalar");

  for (auto& n : nodes_)
    if (n.grad.size() != 0) std::fill(n.grad.v.begin(), n.grad.v.end(), 0.0);
  grad_of(loss).v[0] = seed;
  ran_backward_ = true;

  for (int id = loss.i; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::Param: {
        Tensor& pg = param_grads_[static_cast<std::size_t>(n.pid)];
        if (pg.size() == 0) {
          pg = g;
          touched_params_.push_back(n.pid);
        } else {
          for (std::size_t i = 0; i < pg.size(); ++i) pg.v[i] += g.v[i];
        }
        break;
      }
      case Op::Conv2d: {
        Node& xn = nodes_[static_cast<std::size_t>(n.a)];
        Node& wn = nodes_[static_cast<std::size_t>(n.b)];
        const int ksize = n.i0;
        const std::size_t hw = xn.val.plane();
        MapRowC gy(g.v.data(), n.val.c, static_cast<Eigen::Index>(hw));
        if (n.c >= 0 && nodes_[static_cast<std::size_t>(n.c)].needs_grad) {
          Tensor& bg = grad_of(Var{n.c});
          for (int ch = 0; ch < n.val.c; ++ch)
            bg.v[static_cast<std::size_t>(ch)] += gy.row(ch).sum();
        }
        if (ksize == 3) {
          RowMat P;
          if (wn.needs_grad) {
            im2col3(xn.val, P);
            MapRow gw(grad_of(Var{n.b}).v.data(), wn.val.c, wn.val.h * wn.val.w);
            gw.noalias() += gy * P.transpose();
          }
          if (xn.needs_grad) {
            MapRowC wm(wn.val.v.data(), wn.val.c, wn.val.h * wn.val.w);
            RowMat dP = wm.transpose() * gy;
            col2im3(dP, grad_of(Var{n.a}));
          }
        } else {
          MapRowC xm(xn.val.v.data(), xn.val.c, static_cast<Eigen::Index>(hw));
          if (wn.needs_grad) {
            MapRow gw(grad_of(Var{n.b}).v.data(), wn.val.c, wn.val.h * wn.val.w);
            gw.noalias() += gy * xm.transpose();
          }
          if (xn.needs_grad) {
            MapRowC wm(wn.val.v.data(), wn.val.c, wn.val.h * wn.val.w);
            MapRow gx(grad_of(Var{n.a}).v.data(), xn.val.c,
                      static_cast<Eigen::Index>(hw));
            gx.noalias() += wm.transpose() * gy;
          }
        }
        break;
      }
      case Op::Add: {
        if (nodes_[static_cast<std::size_t>(n.a)].needs_grad) {
          Tensor& ga = grad_of(Var{n.a});
          for (std::size_t i = 0; i < ga.size(); ++i) ga.v[i] += g.v[i];
        }
        if (nodes_[static_cast<std::size_t>(n.b)].needs_grad) {
          Tensor& gb = grad_of(Var{n.b});
          for (std::size_t i = 0; i < gb.size(); ++i) gb.v[i] += g.v[i];
        }
        break;
      }
      case Op::Sub: {
        if (nodes_[static_cast<std::size_t>(n.a)].needs_grad) {
          Tensor& ga = grad_of(Var{n.a});
          for (std::size_t i = 0; i < ga.size(); ++i) ga.v[i] += g.v[i];
        }
        if (nodes_[static_cast<std::size_t>(n.b)].needs_grad) {
          Tensor& gb = grad_of(Var{n.b});
          for (std::size_t i = 0; i < gb.size(); ++i) gb.v[i] -= g.v[i];
        }
        break;
      }
      case Op::Mul: {
        const Tensor& av = nodes_[static_cast<std::size_t>(n.a)].val;
        const Tensor& bv = nodes_[static_cast<std::size_t>(n.b)].val;
        if (nodes_[static_cast<std::size_t>(n.a)].needs_grad) {
          Tensor& ga = grad_of(Var{n.a});
          for (std::size_t i = 0; i < ga.size(); ++i) ga.v[i] += g.v[i] * bv.v[i];
        }
        if (nodes_[static_cast<std::size_t>(n.b)].needs_grad) {
          Tensor& gb = grad_of(Var{n.b});
          for (std::size_t i = 0; i < gb.size(); ++i) gb.v[i] += g.v[i] * av.v[i];
        }
        break;
      }
      case Op::MulGate: {
        const Tensor& gatev = nodes_[static_cast<std::size_t>(n.a)].val;
        const Tensor& xv = nodes_[static_cast<std::size_t>(n.b)].val;
        const std::size_t hw = xv.plane();
        if (nodes_[static_cast<std::size_t>(n.a)].needs_grad) {
          Tensor& gg = grad_of(Var{n.a});
          for (int ch = 0; ch < xv.c; ++ch)
            for (std::size_t i = 0; i < hw; ++i)
              gg.v[i] += g.v[static_cast<std::size_t>(ch) * hw + i] *
                         xv.v[static_cast<std::size_t>(ch) * hw + i];
        }
        if (nodes_[static_cast<std::size_t>(n.b)].needs_grad) {
          Tensor& gx = grad_of(Var{n.b});
          for (int ch = 0; ch < xv.c; ++ch)
            for (std::size_t i = 0; i < hw; ++i)
              gx.v[static_cast<std::size_t>(ch) * hw + i] +=
                  g.v[static_cast<std::size_t>(ch) * hw + i] * gatev.v[i];
        }
        break;
      }
      case Op::Sigmoid: {
        Tensor& ga = grad_of(Var{n.a});
        for (std::size_t i = 0; i < ga.size(); ++i) {
          const double s = n.val.v[i];
          ga.v[i] += g.v[i] * s * (1.0 - s);
        }
        break;
      }
      case Op::Tanh: {
        Tensor& ga = grad_of(Var{n.a});
        for (std::size_t i = 0; i < ga.size(); ++i) {
          const double t = n.val.v[i];
          ga.v[i] += g.v[i] * (1.0 - t * t);
        }
        break;
      }
      case Op::Relu: {
        Tensor& ga = grad_of(Var{n.a});
        const Tensor& xv = nodes_[static_cast<std::size_t>(n.a)].val;
        for (std::size_t i = 0; i < ga.size(); ++i)
          if (xv.v[i] > 0.0) ga.v[i] += g.v[i];
        break;
      }
      case Op::ConcatC: {
        std::size_t off = 0;
        for (int src : n.arg) {
          Node& sn = nodes_[static_cast<std::size_t>(src)];
          if (sn.needs_grad) {
            Tensor& gs = grad_of(Var{src});
            for (std::size_t i = 0; i < gs.size(); ++i) gs.v[i] += g.v[off + i];
          }
          off += sn.val.size();
        }
        break;
      }
      case Op::SliceC: {
        Tensor& ga = grad_of(Var{n.a});
        const std::size_t off =
            static_cast<std::size_t>(n.i0) * nodes_[static_cast<std::size_t>(n.a)].val.plane();
        for (std::size_t i = 0; i < n.val.size(); ++i) ga.v[off + i] += g.v[i];
        break;
      }
      case Op::MaxPool2: {
        Tensor& ga = grad_of(Var{n.a});
        for (std::size_t i = 0; i < n.val.size(); ++i)
          ga.v[static_cast<std::size_t>(n.arg[i])] += g.v[i];
        break;
      }
      case Op::Upsample2: {
        Tensor& ga = grad_of(Var{n.a});
        const Tensor& xv = nodes_[static_cast<std::size_t>(n.a)].val;
        for (int ch = 0; ch < xv.c; ++ch)
          for (int r = 0; r < n.val.h; ++r)
            for (int c = 0; c < n.val.w; ++c)
              ga.at(ch, r / 2, c / 2) += g.at(ch, r, c);
        break;
      }
      case Op::MaskedWMSE: {
        Tensor& ga = grad_of(Var{n.a});
        const Tensor& pv = nodes_[static_cast<std::size_t>(n.a)].val;
        const double s = 2.0 * g.v[0] / n.x0;
        for (std::size_t i = 0; i < ga.size(); ++i)
          ga.v[i] += s * n.aux1.v[i] * (pv.v[i] - n.aux0.v[i]);
        break;
      }
      case Op::BceLogits: {
        Tensor& ga = grad_of(Var{n.a});
        const Tensor& pv = nodes_[static_cast<std::size_t>(n.a)].val;
        const double s = g.v[0] / n.x0;
        for (std::size_t i = 0; i < ga.size(); ++i) {
          const double z = pv.v[i];
          double sig;
          if (z >= 0.0) {
            sig = 1.0 / (1.0 + std::exp(-z));
          } else {
            const double e = std::exp(z);
            sig = e / (1.0 + e);
          }
          ga.v[i] += s * n.aux1.v[i] * (sig - n.aux0.v[i]);
        }
        break;
      }
      case Op::SumSquares: {
        Tensor& ga = grad_of(Var{n.a});
        const Tensor& xv = nodes_[static_cast<std::size_t>(n.a)].val;
        for (std::size_t i = 0; i < ga.size(); ++i)
          ga.v[i] += 2.0 * g.v[0] * xv.v[i];
        break;
      }
    }
  }
}

const Tensor* Tape::param_grad(int pid) const {
  if (pid < 0 || pid >= static_cast<int>(param_grads_.size())) return nullptr;
  const Tensor& t = param_grads_[static_cast<std::size_t>(pid)];
  return t.size() == 0 ? nullptr : &t;
}

void Tape::merge_grads_into(ParamStore& store) const {
  for (int pid : touched_params_) {
    const Tensor& src = param_grads_[static_cast<std::size_t>(pid)];
    Tensor& dst = store.entry(pid).grad;
    for (std::size_t i = 0; i < dst.size(); ++i) dst.v[i] += src.v[i];
  }
}

}  // namespace gst
