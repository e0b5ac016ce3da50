#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gstbench/params.hpp"
#include "gstbench/tape.hpp"

namespace gst {

// Architecture hyperparameters. The reference preset matches the full-scale
// configuration; desk32() is sized for 32x32 grids and laptop-class CPUs.
struct NetConfig {
  int hidden_convlstm = 32;
  std::vector<int> channel_ladder = {16, 32, 64, 128, 256};
  int d_h = 16;            // embedding channels
  int ghead_hidden = 8;
  int ghead_layers = 1;    // hidden layers per head; output layer is linear
  int n_heads = 1;         // one head per horizon step
  int context_len = 10;    // history truncation
  int kernel_size = 3;     // 3, or 1 to disable neighbor aggregation
  bool use_attention = true;
  bool use_curriculum = true;
  int input_channels = 3;  // covariate, treatment, outcome per step
  int static_channels = 0; // appended after the recurrent stage

  void validate() const;
  int depth() const { return static_cast<int>(channel_ladder.size()); }
  int pool_divisor() const { return 1 << (depth() - 1); }

  static NetConfig reference(int n_heads);
  static NetConfig desk32(int n_heads);
};

// Parameter ids of one network inside a ParamStore. The backbone (recurrent
// stage + encoder-decoder + output projection) is shared by all heads.
struct NetParams {
  NetConfig cfg;
  int lstm_wx = -1, lstm_wh = -1, lstm_b = -1;
  struct EncLevel {
    int w = -1, b = -1;
  };
  std::vector<EncLevel> enc;  // one per ladder level; last is the bottleneck
  struct DecLevel {
    int up_w = -1, up_b = -1;
    int att_wx = -1, att_wg = -1, att_b = -1, att_psi = -1, att_psi_b = -1;
    int merge_w = -1, merge_b = -1;
  };
  std::vector<DecLevel> dec;  // deepest first
  int out_w = -1, out_b = -1;
  std::vector<std::vector<std::pair<int, int>>> heads;  // [head][layer] -> (w, b)
};

// Registers Xavier-initialized parameters for a network with `head_count`
// per-cell heads. Initialization draws from substreams of `rng`, so the
// layout is independent of registration order elsewhere in the store.
NetParams build_net_params(ParamStore& store, const NetConfig& cfg,
                           int head_count, RngStream rng);

std::size_t backbone_scalar_count(const ParamStore& store, const NetParams& np);
std::size_t head_scalar_count(const ParamStore& store, const NetParams& np);

// One recurrent cell update: gates from two convolutions, peephole-free.
// Returns (h', c').
std::pair<Var, Var> convlstm_step(Tape& t, Var x, Var h, Var c,
                                  const NetParams& np);

// Additive attention over a skip connection, gated by the decoder feature at
// the same resolution. Returns the gated skip tensor.
Var attention_gate(Tape& t, Var skip, Var gating, const NetParams::DecLevel& lv,
                   const NetParams& np);

// Runs the recurrent stage over the window slices (each input_channels x H x
// W), appends static channels, then the encoder-decoder. Returns the d_h x H
// x W embedding.
Var embed_history(Tape& t, const std::vector<Tensor>& window,
                  const Tensor* statics, const NetParams& np);

// Per-cell feed-forward readout of head k (1-based).
Var ghead_forward(Tape& t, Var embedding, int k, const NetParams& np);

}  // namespace gst
