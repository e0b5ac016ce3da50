#include "gstbench/nets.hpp"

#include <algorithm>

namespace gst {

void NetConfig::validate() const {
  require(hidden_convlstm >= 1, ErrorCode::InvalidConfiguration,
          "net: hidden_convlstm must be >= 1");
  require(d_h >= 1, ErrorCode::InvalidConfiguration, "net: d_h must be >= 1");
  require(n_heads >= 1, ErrorCode::InvalidConfiguration,
          "net: n_heads must be >= 1");
  require(context_len >= 1, ErrorCode::InvalidConfiguration,
          "net: context_len must be >= 1");
  require(kernel_size == 1 || kernel_size == 3, ErrorCode::InvalidConfiguration,
          "net: kernel_size must be 1 or 3");
  require(ghead_hidden >= 1 && ghead_layers >= 0, ErrorCode::InvalidConfiguration,
          "net: head shape invalid");
  require(!channel_ladder.empty(), ErrorCode::InvalidConfiguration,
          "net: channel ladder must be nonempty");
  for (std::size_t i = 0; i + 1 < channel_ladder.size(); ++i)
    require(channel_ladder[i] < channel_ladder[i + 1],
            ErrorCode::InvalidConfiguration,
            "net: channel ladder must be strictly increasing");
  for (int c : channel_ladder)
    require(c >= 1, ErrorCode::InvalidConfiguration,
            "net: channel ladder entries must be >= 1");
}

NetConfig NetConfig::reference(int n_heads) {
  NetConfig cfg;
  cfg.hidden_convlstm = 32;
  cfg.channel_ladder = {16, 32, 64, 128, 256};
  cfg.d_h = 16;
  cfg.ghead_hidden = 8;
  cfg.ghead_layers = 1;
  cfg.n_heads = n_heads;
  cfg.context_len = 10;
  return cfg;
}

NetConfig NetConfig::desk32(int n_heads) {
  NetConfig cfg;
  cfg.hidden_convlstm = 8;
  cfg.channel_ladder = {8, 16, 32};
  cfg.d_h = 8;
  cfg.ghead_hidden = 8;
  cfg.ghead_layers = 1;
  cfg.n_heads = n_heads;
  cfg.context_len = 8;
  return cfg;
}

namespace {
constexpr std::uint64_t kInitTag = 101;

int add_conv(ParamStore& store, const std::string& name, int out_ch, int in_ch,
             int ksize, RngStream& rng, int& idx) {
  return store.add(name, xavier_conv(out_ch, in_ch, ksize,
                                     rng.substream(kInitTag, idx++)));
}

int add_bias(ParamStore& store, const std::string& name, int ch) {
  return store.add(name, Tensor(ch, 1, 1, 0.0));
}
}  // namespace

NetParams build_net_params(ParamStore& store, const NetConfig& cfg,
                           int head_count, RngStream rng) {
  cfg.validate();
  require(head_count >= 1, ErrorCode::InvalidConfiguration,
          "net: head count must be >= 1");
  NetParams np;
  np.cfg = cfg;
  const int k = cfg.kernel_size;
  const int C = cfg.hidden_convlstm;
  int idx = 0;

  np.lstm_wx = add_conv(store, "lstm.wx", 4 * C, cfg.input_channels, k, rng, idx);
  np.lstm_wh = add_conv(store, "lstm.wh", 4 * C, C, k, rng, idx);
  np.lstm_b = add_bias(store, "lstm.b", 4 * C);

  const auto& ladder = cfg.channel_ladder;
  const int depth = cfg.depth();
  int in_ch = C + cfg.static_channels;
  for (int l = 0; l < depth; ++l) {
    NetParams::EncLevel lv;
    const std::string base = "enc" + std::to_string(l);
    lv.w = add_conv(store, base + ".w", ladder[l], in_ch, k, rng, idx);
    lv.b = add_bias(store, base + ".b", ladder[l]);
    np.enc.push_back(lv);
    in_ch = ladder[l];
  }
  for (int l = depth - 2; l >= 0; --l) {
    NetParams::DecLevel lv;
    const std::string base = "dec" + std::to_string(l);
    lv.up_w = add_conv(store, base + ".up.w", ladder[l], ladder[l + 1], k, rng, idx);
    lv.up_b = add_bias(store, base + ".up.b", ladder[l]);
    const int f_int = std::max(1, ladder[l] / 2);
    lv.att_wx = add_conv(store, base + ".att.wx", f_int, ladder[l], 1, rng, idx);
    lv.att_wg = add_conv(store, base + ".att.wg", f_int, ladder[l], 1, rng, idx);
    lv.att_b = add_bias(store, base + ".att.b", f_int);
    lv.att_psi = add_conv(store, base + ".att.psi", 1, f_int, 1, rng, idx);
    lv.att_psi_b = add_bias(store, base + ".att.psi_b", 1);
    lv.merge_w = add_conv(store, base + ".merge.w", ladder[l], 2 * ladder[l], k, rng, idx);
    lv.merge_b = add_bias(store, base + ".merge.b", ladder[l]);
    np.dec.push_back(lv);
  }
  np.out_w = add_conv(store, "out.w", cfg.d_h, ladder[0], 1, rng, idx);
  np.out_b = add_bias(store, "out.b", cfg.d_h);

  for (int hh = 0; hh < head_count; ++hh) {
    std::vector<std::pair<int, int>> layers;
    int hin = cfg.d_h;
    const std::string base = "head" + std::to_string(hh);
    for (int l = 0; l < cfg.ghead_layers; ++l) {
      const std::string lname = base + ".l" + std::to_string(l);
      int w = add_conv(store, lname + ".w", cfg.ghead_hidden, hin, 1, rng, idx);
      int b = add_bias(store, lname + ".b", cfg.ghead_hidden);
      layers.emplace_back(w, b);
      hin = cfg.ghead_hidden;
    }
    int w = add_conv(store, base + ".out.w", 1, hin, 1, rng, idx);
    int b = add_bias(store, base + ".out.b", 1);
    layers.emplace_back(w, b);
    np.heads.push_back(std::move(layers));
  }
  return np;
}

std::size_t backbone_scalar_count(const ParamStore& store, const NetParams& np) {
  std::size_t n = 0;
  auto count = [&](int id) {
    if (id >= 0) n += store.entry(id).value.size();
  };
  count(np.lstm_wx);
  count(np.lstm_wh);
  count(np.lstm_b);
  for (const auto& lv : np.enc) {
    count(lv.w);
    count(lv.b);
  }
  for (const auto& lv : np.dec) {
    count(lv.up_w);
    count(lv.up_b);
    count(lv.att_wx);
    count(lv.att_wg);
    count(lv.att_b);
    count(lv.att_psi);
    count(lv.att_psi_b);
    count(lv.merge_w);
    count(lv.merge_b);
  }
  count(np.out_w);
  count(np.out_b);
  return n;
}

std::size_t head_scalar_count(const ParamStore& store, const NetParams& np) {
  std::size_t n = 0;
  for (const auto& head : np.heads)
    for (auto [w, b] : head)
      n += store.entry(w).value.size() + store.entry(b).value.size();
  return n;
}

std::pair<Var, Var> convlstm_step(Tape& t, Var x, Var h, Var c,
                                  const NetParams& np) {
  const int C = np.cfg.hidden_convlstm;
  const int k = np.cfg.kernel_size;
  Var zx = t.conv2d(x, t.param(np.lstm_wx), t.param(np.lstm_b), k);
  Var zh = t.conv2d(h, t.param(np.lstm_wh), Var{}, k);
  Var z = t.add(zx, zh);
  Var gi = t.sigmoid(t.slice_c(z, 0, C));
  Var gf = t.sigmoid(t.slice_c(z, C, C));
  Var go = t.sigmoid(t.slice_c(z, 2 * C, C));
  Var gg = t.tanh_(t.slice_c(z, 3 * C, C));
  Var c_next = t.add(t.mul(gf, c), t.mul(gi, gg));
  Var h_next = t.mul(go, t.tanh_(c_next));
  return {h_next, c_next};
}

Var attention_gate(Tape& t, Var skip, Var gating, const NetParams::DecLevel& lv,
                   const NetParams& np) {
  (void)np;
  Var q = t.add(t.conv2d(gating, t.param(lv.att_wg), t.param(lv.att_b), 1),
                t.conv2d(skip, t.param(lv.att_wx), Var{}, 1));
  Var alpha = t.sigmoid(
      t.conv2d(t.relu(q), t.param(lv.att_psi), t.param(lv.att_psi_b), 1));
  return t.mul_gate(alpha, skip);
}

Var embed_history(Tape& t, const std::vector<Tensor>& window,
                  const Tensor* statics, const NetParams& np) {
  const NetConfig& cfg = np.cfg;
  require(!window.empty(), ErrorCode::InvalidArgument,
          "embed_history: empty window");
  const int H = window[0].h, W = window[0].w;
  for (const auto& s : window)
    require(s.c == cfg.input_channels && s.h == H && s.w == W,
            ErrorCode::InvalidArgument, "embed_history: slice shape mismatch");
  require(H % cfg.pool_divisor() == 0 && W % cfg.pool_divisor() == 0,
          ErrorCode::InvalidConfiguration,
          "embed_history: grid not divisible for the ladder depth");

  const int C = cfg.hidden_convlstm;
  Var h = t.input(Tensor(C, H, W, 0.0));
  Var c = t.input(Tensor(C, H, W, 0.0));
  for (const auto& slice : window) {
    auto [h2, c2] = convlstm_step(t, t.input(slice), h, c, np);
    h = h2;
    c = c2;
  }

  Var cur = h;
  if (cfg.static_channels > 0) {
    require(statics != nullptr && statics->c == cfg.static_channels &&
                statics->h == H && statics->w == W,
            ErrorCode::InvalidArgument, "embed_history: static channels missing");
    cur = t.concat_c({cur, t.input(*statics)});
  }

  const int depth = cfg.depth();
  const int k = cfg.kernel_size;
  std::vector<Var> skips;
  for (int l = 0; l < depth; ++l) {
    if (l > 0) cur = t.maxpool2(cur);
    cur = t.relu(t.conv2d(cur, t.param(np.enc[l].w), t.param(np.enc[l].b), k));
    if (l < depth - 1) skips.push_back(cur);
  }
  for (int d = 0; d < depth - 1; ++d) {
    const auto& lv = np.dec[static_cast<std::size_t>(d)];
    const int l = depth - 2 - d;  // ladder level of this stage
    Var up = t.upsample2(cur);
    Var g = t.relu(t.conv2d(up, t.param(lv.up_w), t.param(lv.up_b), k));
    Var s = skips[static_cast<std::size_t>(l)];
    if (cfg.use_attention) s = attention_gate(t, s, g, lv, np);
    Var merged = t.concat_c({g, s});
    cur = t.relu(t.conv2d(merged, t.param(lv.merge_w), t.param(lv.merge_b), k));
  }
  return t.conv2d(cur, t.param(np.out_w), t.param(np.out_b), 1);
}

Var ghead_forward(Tape& t, Var embedding, int k, const NetParams& np) {
  require(k >= 1 && k <= static_cast<int>(np.heads.size()),
          ErrorCode::InvalidArgument, "ghead_forward: head index out of range");
  const auto& layers = np.heads[static_cast<std::size_t>(k - 1)];
  Var cur = embedding;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    cur = t.relu(t.conv2d(cur, t.param(layers[l].first),
                          t.param(layers[l].second), 1));
  const auto& out = layers.back();
  return t.conv2d(cur, t.param(out.first), t.param(out.second), 1);
}

}  // namespace gst
