// Copyright (c) 2026 wwspot authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Two-branch keyword-spotting model: a depthwise-separable temporal
// convolutional backbone (causal left padding, dilation doubling per layer,
// ReLU after each pointwise projection) feeding two per-frame heads, a
// sigmoid keyword head and a log-softmax ASR head. Forward, reverse-mode
// gradients and the checkpoint format live here.

#ifndef WWS_MODEL_HPP_
#define WWS_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "wws/common.hpp"
#include "wws/features.hpp"
#include "wws/losses.hpp"
#include "wws/rng.hpp"

namespace wws {

struct ModelConfig {
  int n_mels = 80;
  int tcn_layers = 4;
  int hidden_dim = 64;
  int kernel_size = 8;
  int n_keywords = 10;
  int vocab_size = 32;

  void Validate() const {
    if (n_mels < 1 || tcn_layers < 1 || hidden_dim < 1 || kernel_size < 1 ||
        n_keywords < 1 || vocab_size < 2) {
      throw std::invalid_argument("model config: counts out of range");
    }
  }

  bool operator==(const ModelConfig&) const = default;
};

// One depthwise-separable block: a per-channel causal temporal convolution
// followed by a 1x1 channel-mixing projection.
struct ConvLayerParams {
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 0;
  int dilation = 1;
  std::vector<double> dw_weight;  // in_ch x kernel
  std::vector<double> dw_bias;    // in_ch
  std::vector<double> pw_weight;  // out_ch x in_ch
  std::vector<double> pw_bias;    // out_ch
};

struct ModelParams {
  ModelConfig config;
  std::vector<ConvLayerParams> layers;
  std::vector<double> wws_weight;  // n_keywords x hidden_dim
  std::vector<double> wws_bias;    // n_keywords
  std::vector<double> asr_weight;  // vocab_size x hidden_dim
  std::vector<double> asr_bias;    // vocab_size
};

// Visits every parameter tensor in declaration order. This order is the
// checkpoint layout, the init draw order and the Adam slot order.
template <typename Params, typename Fn>
void ForEachTensor(Params& params, Fn&& fn) {
  for (auto& layer : params.layers) {
    fn(layer.dw_weight);
    fn(layer.dw_bias);
    fn(layer.pw_weight);
    fn(layer.pw_bias);
  }
  fn(params.wws_weight);
  fn(params.wws_bias);
  fn(params.asr_weight);
  fn(params.asr_bias);
}

inline std::size_t ParamCount(const ModelParams& params) {
  std::size_t n = 0;
  ForEachTensor(const_cast<ModelParams&>(params),
                [&n](const std::vector<double>& t) { n += t.size(); });
  return n;
}

inline ModelParams ZeroParams(const ModelConfig& config) {
  config.Validate();
  ModelParams params;
  params.config = config;
  params.layers.resize(static_cast<std::size_t>(config.tcn_layers));
  int dilation = 1;
  for (int l = 0; l < config.tcn_layers; ++l) {
    auto& layer = params.layers[static_cast<std::size_t>(l)];
    layer.in_ch = l == 0 ? config.n_mels : config.hidden_dim;
    layer.out_ch = config.hidden_dim;
    layer.kernel = config.kernel_size;
    layer.dilation = dilation;
    dilation *= 2;
    layer.dw_weight.assign(static_cast<std::size_t>(layer.in_ch) * layer.kernel, 0.0);
    layer.dw_bias.assign(static_cast<std::size_t>(layer.in_ch), 0.0);
    layer.pw_weight.assign(static_cast<std::size_t>(layer.out_ch) * layer.in_ch, 0.0);
    layer.pw_bias.assign(static_cast<std::size_t>(layer.out_ch), 0.0);
  }
  params.wws_weight.assign(
      static_cast<std::size_t>(config.n_keywords) * config.hidden_dim, 0.0);
  params.wws_bias.assign(static_cast<std::size_t>(config.n_keywords), 0.0);
  params.asr_weight.assign(
      static_cast<std::size_t>(config.vocab_size) * config.hidden_dim, 0.0);
  params.asr_bias.assign(static_cast<std::size_t>(config.vocab_size), 0.0);
  return params;
}

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], seeded.
inline ModelParams InitParams(const ModelConfig& config, std::uint64_t seed) {
  ModelParams params = ZeroParams(config);
  Rng rng(seed);
  auto fill = [&rng](std::vector<double>& tensor, int fan_in) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& w : tensor) w = rng.Uniform(-bound, bound);
  };
  for (auto& layer : params.layers) {
    fill(layer.dw_weight, layer.kernel);
    fill(layer.dw_bias, layer.kernel);
    fill(layer.pw_weight, layer.in_ch);
    fill(layer.pw_bias, layer.in_ch);
  }
  fill(params.wws_weight, config.hidden_dim);
  fill(params.wws_bias, config.hidden_dim);
  fill(params.asr_weight, config.hidden_dim);
  fill(params.asr_bias, config.hidden_dim);
  return params;
}

// Per-frame model outputs. kws_prob entries are strictly inside (0,1);
// every asr_logprob row is log-softmax normalized.
struct PosteriorStream {
  int frames = 0;
  int n_keywords = 0;
  int vocab_size = 0;
  std::vector<double> kws_prob;     // frames x n_keywords
  std::vector<double> asr_logprob;  // frames x vocab_size
};

// Intermediate activations needed by Backward.
struct ForwardTrace {
  std::vector<std::vector<double>> layer_input;  // per layer, frames x in_ch
  std::vector<std::vector<double>> dw_out;       // per layer, frames x in_ch
  std::vector<std::vector<double>> pw_preact;    // per layer, frames x out_ch
  std::vector<double> trunk;                     // frames x hidden_dim
  int frames = 0;
};

inline PosteriorStream Forward(const ModelParams& params,
                               const FeatureMatrix& feats,
                               ForwardTrace* trace = nullptr) {
  const ModelConfig& cfg = params.config;
  if (feats.frames < 1) {
    throw std::invalid_argument("forward: need at least one frame");
  }
  if (feats.n_mels != cfg.n_mels) {
    throw std::invalid_argument("forward: feature dim mismatch");
  }
  const int frames = feats.frames;

  std::vector<double> x = feats.data;  // frames x in_ch of the first layer
  if (trace != nullptr) {
    trace->frames = frames;
    trace->layer_input.clear();
    trace->dw_out.clear();
    trace->pw_preact.clear();
  }

  for (const auto& layer : params.layers) {
    const int in_ch = layer.in_ch;
    const int out_ch = layer.out_ch;
    // Depthwise causal convolution; tap k reaches back (kernel-1-k)*dilation.
    std::vector<double> dw(static_cast<std::size_t>(frames) * in_ch);
    for (int t = 0; t < frames; ++t) {
      for (int c = 0; c < in_ch; ++c) {
        double acc = layer.dw_bias[static_cast<std::size_t>(c)];
        for (int k = 0; k < layer.kernel; ++k) {
          int src = t - (layer.kernel - 1 - k) * layer.dilation;
          if (src >= 0) {
            acc += layer.dw_weight[static_cast<std::size_t>(c) * layer.kernel + k] *
                   x[static_cast<std::size_t>(src) * in_ch + c];
          }
        }
        dw[static_cast<std::size_t>(t) * in_ch + c] = acc;
      }
    }
    // Pointwise projection + ReLU.
    std::vector<double> pre(static_cast<std::size_t>(frames) * out_ch);
    std::vector<double> y(static_cast<std::size_t>(frames) * out_ch);
    for (int t = 0; t < frames; ++t) {
      const double* dw_row = dw.data() + static_cast<std::size_t>(t) * in_ch;
      for (int o = 0; o < out_ch; ++o) {
        double acc = layer.pw_bias[static_cast<std::size_t>(o)];
        const double* w_row =
            layer.pw_weight.data() + static_cast<std::size_t>(o) * in_ch;
        for (int c = 0; c < in_ch; ++c) acc += w_row[c] * dw_row[c];
        pre[static_cast<std::size_t>(t) * out_ch + o] = acc;
        y[static_cast<std::size_t>(t) * out_ch + o] = acc > 0.0 ? acc : 0.0;
      }
    }
    if (trace != nullptr) {
      trace->layer_input.push_back(std::move(x));
      trace->dw_out.push_back(std::move(dw));
      trace->pw_preact.push_back(std::move(pre));
    }
    x = std::move(y);
  }

  PosteriorStream out;
  out.frames = frames;
  out.n_keywords = cfg.n_keywords;
  out.vocab_size = cfg.vocab_size;
  out.kws_prob.resize(static_cast<std::size_t>(frames) * cfg.n_keywords);
  out.asr_logprob.resize(static_cast<std::size_t>(frames) * cfg.vocab_size);

  const int H = cfg.hidden_dim;
  for (int t = 0; t < frames; ++t) {
    const double* h = x.data() + static_cast<std::size_t>(t) * H;
    for (int j = 0; j < cfg.n_keywords; ++j) {
      double z = params.wws_bias[static_cast<std::size_t>(j)];
      const double* w = params.wws_weight.data() + static_cast<std::size_t>(j) * H;
      for (int i = 0; i < H; ++i) z += w[i] * h[i];
      double p = 1.0 / (1.0 + std::exp(-z));
      // Keep probabilities strictly inside (0,1) even for saturated logits.
      p = std::min(std::max(p, 1e-15), 1.0 - 1e-15);
      out.kws_prob[static_cast<std::size_t>(t) * cfg.n_keywords + j] = p;
    }
    double* row = out.asr_logprob.data() + static_cast<std::size_t>(t) * cfg.vocab_size;
    double max_z = -std::numeric_limits<double>::infinity();
    for (int v = 0; v < cfg.vocab_size; ++v) {
      double z = params.asr_bias[static_cast<std::size_t>(v)];
      const double* w = params.asr_weight.data() + static_cast<std::size_t>(v) * H;
      for (int i = 0; i < H; ++i) z += w[i] * h[i];
      row[v] = z;
      if (z > max_z) max_z = z;
    }
    double sum = 0.0;
    for (int v = 0; v < cfg.vocab_size; ++v) sum += std::exp(row[v] - max_z);
    double log_denom = max_z + std::log(sum);
    for (int v = 0; v < cfg.vocab_size; ++v) row[v] -= log_denom;
  }

  if (trace != nullptr) trace->trunk = std::move(x);
  return out;
}

// Reverse-mode gradients for all parameters given head-logit gradients.
// dkws_logits is frames x n_keywords, dasr_logits frames x vocab_size.
inline ModelParams Backward(const ModelParams& params, const ForwardTrace& trace,
                            const std::vector<double>& dkws_logits,
                            const std::vector<double>& dasr_logits) {
  const ModelConfig& cfg = params.config;
  const int frames = trace.frames;
  const int H = cfg.hidden_dim;
  ModelParams grads = ZeroParams(cfg);

  // Heads.
  std::vector<double> dx(static_cast<std::size_t>(frames) * H, 0.0);
  for (int t = 0; t < frames; ++t) {
    const double* h = trace.trunk.data() + static_cast<std::size_t>(t) * H;
    double* dh = dx.data() + static_cast<std::size_t>(t) * H;
    for (int j = 0; j < cfg.n_keywords; ++j) {
      double g = dkws_logits[static_cast<std::size_t>(t) * cfg.n_keywords + j];
      if (g == 0.0) continue;
      grads.wws_bias[static_cast<std::size_t>(j)] += g;
      double* gw = grads.wws_weight.data() + static_cast<std::size_t>(j) * H;
      const double* w = params.wws_weight.data() + static_cast<std::size_t>(j) * H;
      for (int i = 0; i < H; ++i) {
        gw[i] += g * h[i];
        dh[i] += g * w[i];
      }
    }
    for (int v = 0; v < cfg.vocab_size; ++v) {
      double g = dasr_logits[static_cast<std::size_t>(t) * cfg.vocab_size + v];
      if (g == 0.0) continue;
      grads.asr_bias[static_cast<std::size_t>(v)] += g;
      double* gw = grads.asr_weight.data() + static_cast<std::size_t>(v) * H;
      const double* w = params.asr_weight.data() + static_cast<std::size_t>(v) * H;
      for (int i = 0; i < H; ++i) {
        gw[i] += g * h[i];
        dh[i] += g * w[i];
      }
    }
  }

  // Backbone, last layer first.
  for (int l = cfg.tcn_layers - 1; l >= 0; --l) {
    const auto& layer = params.layers[static_cast<std::size_t>(l)];
    auto& glayer = grads.layers[static_cast<std::size_t>(l)];
    const auto& pre = trace.pw_preact[static_cast<std::size_t>(l)];
    const auto& dw_out = trace.dw_out[static_cast<std::size_t>(l)];
    const auto& input = trace.layer_input[static_cast<std::size_t>(l)];
    const int in_ch = layer.in_ch;
    const int out_ch = layer.out_ch;

    // Through ReLU and the pointwise projection.
    std::vector<double> ddw(static_cast<std::size_t>(frames) * in_ch, 0.0);
    for (int t = 0; t < frames; ++t) {
      const double* dw_row = dw_out.data() + static_cast<std::size_t>(t) * in_ch;
      double* ddw_row = ddw.data() + static_cast<std::size_t>(t) * in_ch;
      for (int o = 0; o < out_ch; ++o) {
        std::size_t idx = static_cast<std::size_t>(t) * out_ch + o;
        if (pre[idx] <= 0.0) continue;
        double g = dx[idx];
        if (g == 0.0) continue;
        glayer.pw_bias[static_cast<std::size_t>(o)] += g;
        double* gw = glayer.pw_weight.data() + static_cast<std::size_t>(o) * in_ch;
        const double* w = layer.pw_weight.data() + static_cast<std::size_t>(o) * in_ch;
        for (int c = 0; c < in_ch; ++c) {
          gw[c] += g * dw_row[c];
          ddw_row[c] += g * w[c];
        }
      }
    }

    // Through the depthwise convolution.
    std::vector<double> dprev;
    if (l > 0) dprev.assign(static_cast<std::size_t>(frames) * in_ch, 0.0);
    for (int t = 0; t < frames; ++t) {
      for (int c = 0; c < in_ch; ++c) {
        double g = ddw[static_cast<std::size_t>(t) * in_ch + c];
        if (g == 0.0) continue;
        glayer.dw_bias[static_cast<std::size_t>(c)] += g;
        for (int k = 0; k < layer.kernel; ++k) {
          int src = t - (layer.kernel - 1 - k) * layer.dilation;
          if (src < 0) continue;
          glayer.dw_weight[static_cast<std::size_t>(c) * layer.kernel + k] +=
              g * input[static_cast<std::size_t>(src) * in_ch + c];
          if (l > 0) {
            dprev[static_cast<std::size_t>(src) * in_ch + c] +=
                g * layer.dw_weight[static_cast<std::size_t>(c) * layer.kernel + k];
          }
        }
      }
    }
    dx = std::move(dprev);
  }
  return grads;
}

// In-place params += alpha * other, tensor by tensor.
inline void AxpyParams(double alpha, const ModelParams& other, ModelParams* acc) {
  std::vector<std::vector<double>*> dst;
  ForEachTensor(*acc, [&dst](std::vector<double>& t) { dst.push_back(&t); });
  std::size_t i = 0;
  ForEachTensor(const_cast<ModelParams&>(other),
                [&dst, &i, alpha](std::vector<double>& t) {
                  std::vector<double>& d = *dst[i++];
                  for (std::size_t k = 0; k < t.size(); ++k) d[k] += alpha * t[k];
                });
}

// Forward + both losses + full reverse pass in one call. Gradients are
// written to *grads when non-null; CTC work is skipped entirely when its
// weight is zero (the one-branch configuration).
inline LossBundle ComputeLossAndGrads(const ModelParams& params,
                                      const FeatureMatrix& feats,
                                      int target_keyword,
                                      const std::vector<int>& target_tokens,
                                      const LossWeights& weights,
                                      ModelParams* grads,
                                      PosteriorStream* posteriors = nullptr) {
  ForwardTrace trace;
  PosteriorStream post = Forward(params, feats, grads ? &trace : nullptr);

  LossResult wws = MaxPoolingLoss(post.kws_prob, post.frames, post.n_keywords,
                                  target_keyword);
  LossResult ctc;
  if (weights.ctc != 0.0) {
    ctc = CtcLoss(post.asr_logprob, post.frames, post.vocab_size, target_tokens);
  } else {
    ctc.dlogits.assign(post.asr_logprob.size(), 0.0);
  }

  if (grads != nullptr) {
    std::vector<double> dkws(wws.dlogits.size());
    for (std::size_t i = 0; i < dkws.size(); ++i) {
      dkws[i] = weights.wws * wws.dlogits[i];
    }
    std::vector<double> dasr(ctc.dlogits.size());
    for (std::size_t i = 0; i < dasr.size(); ++i) {
      dasr[i] = weights.ctc * ctc.dlogits[i];
    }
    *grads = Backward(params, trace, dkws, dasr);
  }
  if (posteriors != nullptr) *posteriors = std::move(post);
  return CombinedLoss(ctc.loss, wws.loss, weights);
}

// ---------------------------------------------------------------------------
// Checkpoints: magic "WWCK", u32 version, six u32 config fields, then every
// tensor in ForEachTensor order as little-endian f32.

inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void WriteCheckpoint(const std::string& path, const ModelParams& params) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  auto put_u32 = [&f](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    f.write(reinterpret_cast<const char*>(b), 4);
  };
  f.write("WWCK", 4);
  put_u32(kCheckpointVersion);
  const ModelConfig& c = params.config;
  put_u32(static_cast<std::uint32_t>(c.n_mels));
  put_u32(static_cast<std::uint32_t>(c.tcn_layers));
  put_u32(static_cast<std::uint32_t>(c.hidden_dim));
  put_u32(static_cast<std::uint32_t>(c.kernel_size));
  put_u32(static_cast<std::uint32_t>(c.n_keywords));
  put_u32(static_cast<std::uint32_t>(c.vocab_size));
  ForEachTensor(const_cast<ModelParams&>(params),
                [&put_u32](std::vector<double>& tensor) {
                  for (double v : tensor) {
                    float x = static_cast<float>(v);
                    std::uint32_t bits;
                    std::memcpy(&bits, &x, 4);
                    put_u32(bits);
                  }
                });
  if (!f) throw std::runtime_error("checkpoint: short write: " + path);
}

inline ModelParams ReadCheckpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "WWCK", 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  auto get_u32 = [&f, &path]() {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw std::runtime_error("checkpoint: truncated " + path);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  };
  std::uint32_t version = get_u32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  }
  ModelConfig cfg;
  cfg.n_mels = static_cast<int>(get_u32());
  cfg.tcn_layers = static_cast<int>(get_u32());
  cfg.hidden_dim = static_cast<int>(get_u32());
  cfg.kernel_size = static_cast<int>(get_u32());
  cfg.n_keywords = static_cast<int>(get_u32());
  cfg.vocab_size = static_cast<int>(get_u32());
  ModelParams params = ZeroParams(cfg);
  ForEachTensor(params, [&get_u32](std::vector<double>& tensor) {
    for (double& v : tensor) {
      std::uint32_t bits = get_u32();
      float x;
      std::memcpy(&x, &bits, 4);
      v = static_cast<double>(x);
    }
  });
  return params;
}

}  // namespace wws

#endif  // WWS_MODEL_HPP_
