#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "scribsup/volume.hpp"

namespace scribsup {

/// Hyper-parameters of the reference 2.5D attention UNet. Filter counts,
/// dilation rates and block widths are free choices; the defaults are the
/// ones documented in the README.
struct NetConfig {
  int in_channels = 1;
  int num_classes = 2;
  int base_filters = 8;
  int depth = 5;
  /// Levels using in-plane 3x3x1 convolutions and (2,2,1) resampling.
  int levels_2d = 2;
  std::uint64_t seed = 0;
  std::vector<int> dilations{3, 6, 12, 18};
  /// Channels added by each DenseASPP branch; 0 means base_filters.
  int aspp_growth = 0;
  /// Channels of each boundary side output before fusion.
  int side_channels = 4;
  /// Channel reduction inside residual channel attention blocks.
  int attention_reduction = 4;
  /// Standard deviation of the Gaussian weight initialisation (variance 0.01).
  double init_std = 0.1;

  int growth() const { return aspp_growth > 0 ? aspp_growth : base_filters; }
};

/// Convolution with zero "same" padding; weights laid out [out][in][kz][ky][kx].
struct ConvLayer {
  std::string name;
  int in = 0;
  int out = 0;
  std::array<int, 3> kernel{1, 1, 1};    // x, y, z
  std::array<int, 3> dilation{1, 1, 1};  // x, y, z
  std::vector<float> weight;
  std::vector<float> bias;

  std::size_t param_count() const { return weight.size() + bias.size(); }
};

/// Channel-major float feature map.
struct FeatureMap {
  int channels = 0;
  Shape shape;
  Spacing spacing;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(int c, Shape s, Spacing sp, float fill = 0.0f)
      : channels(c), shape(s), spacing(sp), data(static_cast<std::size_t>(c) * s.voxels(), fill) {}

  float* channel(int c) { return data.data() + static_cast<std::size_t>(c) * shape.voxels(); }
  const float* channel(int c) const { return data.data() + static_cast<std::size_t>(c) * shape.voxels(); }
};

struct NetworkOutputs {
  ChannelVolume boundary;    // b, one channel
  ChannelVolume mask_init;   // M^init, num_classes channels
  ChannelVolume mask_final;  // M^final, num_classes channels
  /// One gate per decoder level, deepest first, at that level's resolution.
  std::vector<ChannelVolume> attention_maps;
  /// Grid and voxel size of every encoder level (level 0 = input).
  std::vector<Shape> level_shapes;
  std::vector<Spacing> level_spacings;
};

class Network {
 public:
  const NetConfig& config() const { return config_; }
  const std::vector<ConvLayer>& layers() const { return layers_; }
  const ConvLayer& layer(const std::string& name) const;

  std::size_t count_params() const;

  /// Pure forward pass. Throws BadPatchShape unless every resampling step
  /// divides the grid evenly.
  NetworkOutputs forward(const Volume& patch) const;

  /// Encoder grid shapes and spacings for a patch, validating divisibility.
  void level_geometry(const Shape& shape, const Spacing& spacing, std::vector<Shape>& shapes,
                      std::vector<Spacing>& spacings) const;

  /// Flat little-endian float32 blob plus a JSON manifest of
  /// {name, shape, offset (bytes), count} entries.
  void export_weights(const std::filesystem::path& blob, const std::filesystem::path& manifest) const;
  /// Loads weights written by export_weights into a network of the same
  /// configuration.
  void import_weights(const std::filesystem::path& blob, const std::filesystem::path& manifest);

 private:
  friend Network build(const NetConfig& config);

  NetConfig config_;
  std::vector<ConvLayer> layers_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Creates the layer graph with N(0, init_std^2) weights drawn from a
/// seeded generator and zero biases. Throws InvalidConfig.
Network build(const NetConfig& config);

/// Required divisor of each axis of an input patch.
std::array<int, 3> patch_divisors(const NetConfig& config);

}  // namespace scribsup
