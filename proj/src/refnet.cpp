#include "scribsup/refnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <fstream>
#include <iterator>
#include <cblas.h>

#include "json.hpp"
#include <random>
#include <string>

namespace scribsup {

namespace {

using json = nlohmann::json;

std::array<int, 3> pool_factor(const NetConfig& cfg, int level) {
  return level < cfg.levels_2d ? std::array<int, 3>{2, 2, 1} : std::array<int, 3>{2, 2, 2};
}

std::array<int, 3> conv_kernel(const NetConfig& cfg, int level) {
  return level < cfg.levels_2d ? std::array<int, 3>{3, 3, 1} : std::array<int, 3>{3, 3, 3};
}

int filters(const NetConfig& cfg, int level) { return cfg.base_filters << level; }

void validate(const NetConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (cfg.in_channels != 1) fail("in_channels must be 1");
  if (cfg.num_classes < 2) fail("num_classes must be >= 2");
  if (cfg.base_filters < 1) fail("base_filters must be >= 1");
  if (cfg.levels_2d < 0) fail("levels_2d must be >= 0");
  if (cfg.depth < cfg.levels_2d + 1) fail("depth must be >= levels_2d + 1");
  if (cfg.depth > 12) fail("depth must be <= 12");
  if (cfg.dilations.empty()) fail("at least one DenseASPP dilation is required");
  for (int d : cfg.dilations) {
    if (d < 1) fail("dilations must be positive");
  }
  if (cfg.aspp_growth < 0) fail("aspp_growth must be >= 0");
  if (cfg.side_channels < 1) fail("side_channels must be >= 1");
  if (cfg.attention_reduction < 1) fail("attention_reduction must be >= 1");
  if (!(cfg.init_std > 0.0)) fail("init_std must be positive");
}

// ---------------------------------------------------------------- kernels

// Zero-padded "same" convolution as one GEMM per output z-slice:
// out[co, p] = bias[co] + sum_k W[co, k] * col[k, p], with col the unrolled
// receptive fields (im2col). 1x1x1 layers multiply the feature map directly.
void conv(const ConvLayer& L, const FeatureMap& in, FeatureMap& out) {
  const Shape& s = in.shape;
  out = FeatureMap(L.out, s, in.spacing);
  const std::size_t V = s.voxels();
  for (int co = 0; co < L.out; ++co) {
    std::fill(out.channel(co), out.channel(co) + V, L.bias[static_cast<std::size_t>(co)]);
  }

  const int kx = L.kernel[0], ky = L.kernel[1], kz = L.kernel[2];
  const int taps = kx * ky * kz;
  if (taps == 1) {
    cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, L.out, static_cast<int>(V), L.in, 1.0f, L.weight.data(), L.in,
                in.data.data(), static_cast<int>(V), 1.0f, out.data.data(), static_cast<int>(V));
    return;
  }

  const std::size_t P = s.slice_voxels();
  const int K = L.in * taps;
  std::vector<float> col(static_cast<std::size_t>(K) * P);
  for (int z = 0; z < s.nz; ++z) {
    std::size_t row = 0;
    for (int ci = 0; ci < L.in; ++ci) {
      const float* plane = in.channel(ci);
      for (int tz = 0; tz < kz; ++tz) {
        const int zz = z + (tz - kz / 2) * L.dilation[2];
        for (int ty = 0; ty < ky; ++ty) {
          const int oy = (ty - ky / 2) * L.dilation[1];
          for (int tx = 0; tx < kx; ++tx, ++row) {
            const int ox = (tx - kx / 2) * L.dilation[0];
            float* dst = col.data() + row * P;
            if (zz < 0 || zz >= s.nz) {
              std::fill(dst, dst + P, 0.0f);
              continue;
            }
            const float* src_slice = plane + static_cast<std::size_t>(zz) * P;
            const int x0 = std::max(0, -ox), x1 = std::min(s.nx, s.nx - ox);
            for (int y = 0; y < s.ny; ++y) {
              float* d = dst + static_cast<std::size_t>(y) * static_cast<std::size_t>(s.nx);
              const int yy = y + oy;
              if (yy < 0 || yy >= s.ny || x0 >= x1) {
                std::fill(d, d + s.nx, 0.0f);
                continue;
              }
              const float* src = src_slice + static_cast<std::size_t>(yy) * static_cast<std::size_t>(s.nx);
              std::fill(d, d + x0, 0.0f);
              std::copy(src + x0 + ox, src + x1 + ox, d + x0);
              std::fill(d + x1, d + s.nx, 0.0f);
            }
          }
        }
      }
    }
    cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, L.out, static_cast<int>(P), K, 1.0f, L.weight.data(), K,
                col.data(), static_cast<int>(P), 1.0f, out.data.data() + static_cast<std::size_t>(z) * P,
                static_cast<int>(V));
  }
}

// Per-channel normalisation to zero mean and unit variance over space.
void instance_norm(FeatureMap& f) {
  const std::size_t n = f.shape.voxels();
  for (int c = 0; c < f.channels; ++c) {
    float* p = f.channel(c);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += p[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (p[i] - mean) * (p[i] - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<float>((p[i] - mean) * inv);
  }
}

void relu(FeatureMap& f) {
  for (auto& v : f.data) v = std::max(v, 0.0f);
}

float sigmoid(float v) { return static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v)))); }

void sigmoid(FeatureMap& f) {
  for (auto& v : f.data) v = sigmoid(v);
}

FeatureMap max_pool(const FeatureMap& in, const std::array<int, 3>& f) {
  Shape os{in.shape.nx / f[0], in.shape.ny / f[1], in.shape.nz / f[2]};
  FeatureMap out(in.channels, os, {in.spacing.x * f[0], in.spacing.y * f[1], in.spacing.z * f[2]});
  for (int c = 0; c < in.channels; ++c) {
    const float* src = in.channel(c);
    float* dst = out.channel(c);
    for (int z = 0; z < os.nz; ++z) {
      for (int y = 0; y < os.ny; ++y) {
        for (int x = 0; x < os.nx; ++x) {
          float m = -std::numeric_limits<float>::infinity();
          for (int dz = 0; dz < f[2]; ++dz) {
            for (int dy = 0; dy < f[1]; ++dy) {
              for (int dx = 0; dx < f[0]; ++dx) {
                m = std::max(m, src[in.shape.index(x * f[0] + dx, y * f[1] + dy, z * f[2] + dz)]);
              }
            }
          }
          dst[os.index(x, y, z)] = m;
        }
      }
    }
  }
  return out;
}

// Half-pixel-centre linear resampling along one axis.
FeatureMap resample_axis(const FeatureMap& in, int axis, int target) {
  Shape os = in.shape;
  const int n = in.shape[axis];
  if (n == target) return in;
  Spacing sp = in.spacing;
  const double scale = static_cast<double>(n) / target;
  if (axis == 0) {
    os.nx = target;
    sp.x *= scale;
  } else if (axis == 1) {
    os.ny = target;
    sp.y *= scale;
  } else {
    os.nz = target;
    sp.z *= scale;
  }
  std::vector<int> i0(static_cast<std::size_t>(target)), i1(static_cast<std::size_t>(target));
  std::vector<float> w(static_cast<std::size_t>(target));
  for (int t = 0; t < target; ++t) {
    const double src = std::max(0.0, (t + 0.5) * scale - 0.5);
    const int lo = std::min(static_cast<int>(std::floor(src)), n - 1);
    i0[static_cast<std::size_t>(t)] = lo;
    i1[static_cast<std::size_t>(t)] = std::min(lo + 1, n - 1);
    w[static_cast<std::size_t>(t)] = static_cast<float>(src - lo);
  }
  FeatureMap out(in.channels, os, sp);
  const auto nx_in = static_cast<std::size_t>(in.shape.nx), nx_out = static_cast<std::size_t>(os.nx);
  for (int c = 0; c < in.channels; ++c) {
    const float* src = in.channel(c);
    float* dst = out.channel(c);
    for (int z = 0; z < os.nz; ++z) {
      for (int y = 0; y < os.ny; ++y) {
        float* drow = dst + (static_cast<std::size_t>(z) * static_cast<std::size_t>(os.ny) + static_cast<std::size_t>(y)) * nx_out;
        if (axis == 0) {
          const float* srow = src + (static_cast<std::size_t>(z) * static_cast<std::size_t>(in.shape.ny) + static_cast<std::size_t>(y)) * nx_in;
          for (std::size_t t = 0; t < nx_out; ++t) {
            const float a = srow[i0[t]], b = srow[i1[t]];
            drow[t] = a + w[t] * (b - a);
          }
          continue;
        }
        // Axis 1 or 2: blend two whole source rows.
        const auto t = static_cast<std::size_t>(axis == 1 ? y : z);
        auto row_of = [&](int idx) {
          const int yy = axis == 1 ? idx : y, zz = axis == 2 ? idx : z;
          return src + (static_cast<std::size_t>(zz) * static_cast<std::size_t>(in.shape.ny) + static_cast<std::size_t>(yy)) * nx_in;
        };
        const float* ra = row_of(i0[t]);
        const float* rb = row_of(i1[t]);
        const float wt = w[t];
        for (std::size_t x = 0; x < nx_out; ++x) drow[x] = ra[x] + wt * (rb[x] - ra[x]);
      }
    }
  }
  return out;
}

FeatureMap upsample(const FeatureMap& in, const Shape& target) {
  return resample_axis(resample_axis(resample_axis(in, 0, target.nx), 1, target.ny), 2, target.nz);
}

FeatureMap concat(const FeatureMap& a, const FeatureMap& b) {
  FeatureMap out(a.channels + b.channels, a.shape, a.spacing);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return out;
}

ChannelVolume to_channel_volume(const FeatureMap& f) {
  return ChannelVolume(f.shape, f.spacing, f.channels, std::vector<double>(f.data.begin(), f.data.end()));
}

ChannelVolume softmax(const FeatureMap& logits) {
  ChannelVolume out(logits.shape, logits.spacing, logits.channels);
  const std::size_t n = logits.shape.voxels();
  std::vector<double> e(static_cast<std::size_t>(logits.channels));
  for (std::size_t i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < logits.channels; ++c) m = std::max(m, static_cast<double>(logits.channel(c)[i]));
    double sum = 0.0;
    for (int c = 0; c < logits.channels; ++c) {
      e[static_cast<std::size_t>(c)] = std::exp(static_cast<double>(logits.channel(c)[i]) - m);
      sum += e[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < logits.channels; ++c) out.at(c, i) = e[static_cast<std::size_t>(c)] / sum;
  }
  return out;
}

}  // namespace

std::array<int, 3> patch_divisors(const NetConfig& cfg) {
  std::array<int, 3> d{1, 1, 1};
  for (int l = 0; l + 1 < cfg.depth; ++l) {
    const auto f = pool_factor(cfg, l);
    for (int a = 0; a < 3; ++a) d[static_cast<std::size_t>(a)] *= f[static_cast<std::size_t>(a)];
  }
  return d;
}

const ConvLayer& Network::layer(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorCode::InvalidArgument, "no layer named " + name);
  return layers_[it->second];
}

std::size_t Network::count_params() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.param_count();
  return n;
}

Network build(const NetConfig& cfg) {
  validate(cfg);
  Network net;
  net.config_ = cfg;

  auto add = [&](const std::string& name, int in, int out, std::array<int, 3> kernel, std::array<int, 3> dilation) {
    ConvLayer L{name, in, out, kernel, dilation, {}, {}};
    net.index_[name] = net.layers_.size();
    net.layers_.push_back(std::move(L));
  };
  const std::array<int, 3> k1{1, 1, 1}, d1{1, 1, 1};

  // Encoder.
  for (int l = 0; l < cfg.depth; ++l) {
    const int in = l == 0 ? cfg.in_channels : filters(cfg, l - 1);
    add("enc" + std::to_string(l) + ".conv1", in, filters(cfg, l), conv_kernel(cfg, l), d1);
    add("enc" + std::to_string(l) + ".conv2", filters(cfg, l), filters(cfg, l), conv_kernel(cfg, l), d1);
  }
  // DenseASPP: every branch sees the bottleneck plus all earlier branches.
  const int bottom = filters(cfg, cfg.depth - 1);
  int aspp_channels = bottom;
  for (std::size_t i = 0; i < cfg.dilations.size(); ++i) {
    const int d = cfg.dilations[i];
    add("aspp.branch" + std::to_string(i), aspp_channels, cfg.growth(), {3, 3, 3}, {d, d, d});
    aspp_channels += cfg.growth();
  }
  // Decoder with attention gates.
  int below = aspp_channels;
  for (int l = cfg.depth - 2; l >= 0; --l) {
    const std::string p = "dec" + std::to_string(l);
    const int skip = filters(cfg, l);
    add(p + ".att1", skip + below, skip, k1, d1);
    add(p + ".att2", skip, 1, k1, d1);
    add(p + ".conv1", skip + below, skip, conv_kernel(cfg, l), d1);
    add(p + ".conv2", skip, skip, conv_kernel(cfg, l), d1);
    below = skip;
  }
  // Initial mask head on the DenseASPP output.
  add("init.conv1", aspp_channels, bottom, {3, 3, 3}, d1);
  add("init.conv2", bottom, bottom, {3, 3, 3}, d1);
  add("init.logits", bottom, cfg.num_classes, k1, d1);
  // Static boundary head: one side output per decoder level.
  for (int l = cfg.depth - 2; l >= 0; --l) {
    add("side" + std::to_string(l), filters(cfg, l), cfg.side_channels, k1, d1);
  }
  const int fused = cfg.side_channels * (cfg.depth - 1);
  add("sbpm.att_down", fused, std::max(1, fused / cfg.attention_reduction), k1, d1);
  add("sbpm.att_up", std::max(1, fused / cfg.attention_reduction), fused, k1, d1);
  add("sbpm.out", fused, 1, k1, d1);
  // Final mask: boundary features fused with the initial logits.
  const int merged = fused + cfg.num_classes;
  add("final.att_down", merged, std::max(1, merged / cfg.attention_reduction), k1, d1);
  add("final.att_up", std::max(1, merged / cfg.attention_reduction), merged, k1, d1);
  add("final.logits", merged, cfg.num_classes, k1, d1);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, cfg.init_std);
  for (auto& L : net.layers_) {
    L.weight.resize(static_cast<std::size_t>(L.out) * static_cast<std::size_t>(L.in) *
                    static_cast<std::size_t>(L.kernel[0] * L.kernel[1] * L.kernel[2]));
    for (auto& w : L.weight) w = static_cast<float>(normal(rng));
    L.bias.assign(static_cast<std::size_t>(L.out), 0.0f);
  }
  return net;
}

void Network::level_geometry(const Shape& shape, const Spacing& spacing, std::vector<Shape>& shapes,
                             std::vector<Spacing>& spacings) const {
  shapes.assign(1, shape);
  spacings.assign(1, spacing);
  for (int l = 0; l + 1 < config_.depth; ++l) {
    const auto f = pool_factor(config_, l);
    const Shape& s = shapes.back();
    if (s.nx % f[0] != 0 || s.ny % f[1] != 0 || s.nz % f[2] != 0) {
      const auto d = patch_divisors(config_);
      throw Error(ErrorCode::BadPatchShape, "patch (" + std::to_string(shape.nx) + "," + std::to_string(shape.ny) + "," +
                                                std::to_string(shape.nz) + ") must be divisible by (" +
                                                std::to_string(d[0]) + "," + std::to_string(d[1]) + "," +
                                                std::to_string(d[2]) + ")");
    }
    shapes.push_back({s.nx / f[0], s.ny / f[1], s.nz / f[2]});
    const Spacing& p = spacings.back();
    spacings.push_back({p.x * f[0], p.y * f[1], p.z * f[2]});
  }
}

NetworkOutputs Network::forward(const Volume& patch) const {
  require_finite(patch);
  NetworkOutputs out;
  level_geometry(patch.shape(), patch.spacing(), out.level_shapes, out.level_spacings);
  const NetConfig& cfg = config_;

  auto block = [&](const std::string& a, const std::string& b, const FeatureMap& x) {
    FeatureMap h, y;
    conv(layer(a), x, h);
    instance_norm(h);
    relu(h);
    conv(layer(b), h, y);
    instance_norm(y);
    relu(y);
    return y;
  };
  // Residual channel attention: x + x * sigmoid(W2 relu(W1 gap(x))).
  auto channel_attention = [&](const std::string& down, const std::string& up, const FeatureMap& x) {
    const std::size_t n = x.shape.voxels();
    FeatureMap pooled(x.channels, {1, 1, 1}, x.spacing);
    for (int c = 0; c < x.channels; ++c) {
      double sum = 0.0;
      const float* p = x.channel(c);
      for (std::size_t i = 0; i < n; ++i) sum += p[i];
      pooled.data[static_cast<std::size_t>(c)] = static_cast<float>(sum / static_cast<double>(n));
    }
    FeatureMap h, g;
    conv(layer(down), pooled, h);
    relu(h);
    conv(layer(up), h, g);
    sigmoid(g);
    FeatureMap y = x;
    for (int c = 0; c < x.channels; ++c) {
      const float gate = g.data[static_cast<std::size_t>(c)];
      float* p = y.channel(c);
      for (std::size_t i = 0; i < n; ++i) p[i] += p[i] * gate;
    }
    return y;
  };

  FeatureMap input(1, patch.shape(), patch.spacing());
  std::copy(patch.data().begin(), patch.data().end(), input.data.begin());

  // Encoder.
  std::vector<FeatureMap> skips;
  FeatureMap x = input;
  for (int l = 0; l < cfg.depth; ++l) {
    if (l > 0) x = max_pool(x, pool_factor(cfg, l - 1));
    x = block("enc" + std::to_string(l) + ".conv1", "enc" + std::to_string(l) + ".conv2", x);
    skips.push_back(x);
  }

  // DenseASPP.
  FeatureMap aspp = skips.back();
  for (std::size_t i = 0; i < cfg.dilations.size(); ++i) {
    FeatureMap branch;
    conv(layer("aspp.branch" + std::to_string(i)), aspp, branch);
    instance_norm(branch);
    relu(branch);
    aspp = concat(aspp, branch);
  }

  // Decoder.
  std::vector<FeatureMap> decoded;  // deepest first
  FeatureMap below = aspp;
  for (int l = cfg.depth - 2; l >= 0; --l) {
    const std::string p = "dec" + std::to_string(l);
    const FeatureMap& skip = skips[static_cast<std::size_t>(l)];
    FeatureMap up = upsample(below, skip.shape);
    up.spacing = skip.spacing;

    FeatureMap gate_in = concat(skip, up), h, alpha;
    conv(layer(p + ".att1"), gate_in, h);
    relu(h);
    conv(layer(p + ".att2"), h, alpha);
    sigmoid(alpha);
    out.attention_maps.push_back(to_channel_volume(alpha));

    FeatureMap gated = skip;
    const std::size_t n = skip.shape.voxels();
    for (int c = 0; c < gated.channels; ++c) {
      float* g = gated.channel(c);
      for (std::size_t i = 0; i < n; ++i) g[i] *= alpha.data[i];
    }
    below = block(p + ".conv1", p + ".conv2", concat(gated, up));
    decoded.push_back(below);
  }

  const Shape& full = patch.shape();

  // Initial mask from the bottleneck.
  FeatureMap init_logits;
  {
    FeatureMap h = block("init.conv1", "init.conv2", aspp), logits;
    conv(layer("init.logits"), h, logits);
    init_logits = upsample(logits, full);
    init_logits.spacing = patch.spacing();
  }
  out.mask_init = softmax(init_logits);

  // Static boundary prediction.
  FeatureMap fused;
  for (std::size_t k = 0; k < decoded.size(); ++k) {
    const int l = cfg.depth - 2 - static_cast<int>(k);
    FeatureMap side;
    conv(layer("side" + std::to_string(l)), decoded[k], side);
    FeatureMap up = upsample(side, full);
    up.spacing = patch.spacing();
    fused = fused.channels == 0 ? std::move(up) : concat(fused, up);
  }
  fused = channel_attention("sbpm.att_down", "sbpm.att_up", fused);
  {
    FeatureMap b;
    conv(layer("sbpm.out"), fused, b);
    sigmoid(b);
    out.boundary = to_channel_volume(b);
  }

  // Final mask.
  {
    FeatureMap merged = channel_attention("final.att_down", "final.att_up", concat(fused, init_logits)), logits;
    conv(layer("final.logits"), merged, logits);
    out.mask_final = softmax(logits);
  }
  return out;
}

void Network::export_weights(const std::filesystem::path& blob, const std::filesystem::path& manifest) const {
  json entries = json::array();
  std::ofstream bin(blob, std::ios::binary | std::ios::trunc);
  if (!bin) throw Error(ErrorCode::IoFailure, "cannot open " + blob.string());
  std::size_t offset = 0;
  auto emit = [&](const std::string& name, const std::vector<int>& shape, const std::vector<float>& values) {
    entries.push_back({{"name", name}, {"shape", shape}, {"offset", offset}, {"count", values.size()}});
    bin.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
    offset += values.size() * sizeof(float);
  };
  for (const auto& L : layers_) {
    emit(L.name + ".weight", {L.out, L.in, L.kernel[2], L.kernel[1], L.kernel[0]}, L.weight);
    emit(L.name + ".bias", {L.out}, L.bias);
  }
  if (!bin) throw Error(ErrorCode::IoFailure, "write failed for " + blob.string());
  std::ofstream man(manifest, std::ios::trunc);
  if (!man) throw Error(ErrorCode::IoFailure, "cannot open " + manifest.string());
  man << json{{"dtype", "float32"}, {"byte_order", "little"}, {"tensors", entries}}.dump(2) << "\n";
}

void Network::import_weights(const std::filesystem::path& blob, const std::filesystem::path& manifest) {
  std::ifstream man(manifest);
  if (!man) throw Error(ErrorCode::IoFailure, "cannot open " + manifest.string());
  json doc;
  try {
    doc = json::parse(man);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("weight manifest: ") + e.what());
  }
  std::ifstream bin(blob, std::ios::binary);
  if (!bin) throw Error(ErrorCode::IoFailure, "cannot open " + blob.string());
  const std::vector<char> bytes{std::istreambuf_iterator<char>(bin), std::istreambuf_iterator<char>()};

  std::vector<ConvLayer> next = layers_;
  std::unordered_map<std::string, std::vector<float>*> targets;
  for (auto& L : next) {
    targets[L.name + ".weight"] = &L.weight;
    targets[L.name + ".bias"] = &L.bias;
  }
  std::size_t loaded = 0;
  for (const auto& e : doc.at("tensors")) {
    const auto name = e.at("name").get<std::string>();
    const auto it = targets.find(name);
    if (it == targets.end()) throw Error(ErrorCode::InvalidConfig, "unexpected tensor " + name);
    const auto count = e.at("count").get<std::size_t>();
    const auto offset = e.at("offset").get<std::size_t>();
    if (count != it->second->size()) throw Error(ErrorCode::InvalidConfig, "size mismatch for " + name);
    if (offset + count * sizeof(float) > bytes.size()) throw Error(ErrorCode::TruncatedData, "blob too short for " + name);
    std::memcpy(it->second->data(), bytes.data() + offset, count * sizeof(float));
    ++loaded;
  }
  if (loaded != targets.size()) throw Error(ErrorCode::InvalidConfig, "manifest does not cover every tensor");
  layers_ = std::move(next);
}

}  // namespace scribsup
