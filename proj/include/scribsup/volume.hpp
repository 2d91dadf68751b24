#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>
#include <algorithm>
#include <vector>

#include "scribsup/error.hpp"

namespace scribsup {

/// Grid extents in voxels. Memory order is x fastest, then y, then z:
/// index = x + nx * (y + ny * z). Every operator in the library assumes it.
struct Shape {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t voxels() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  std::size_t slice_voxels() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(nx) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(z));
  }
  std::array<int, 3> coords(std::size_t idx) const {
    const auto x = static_cast<int>(idx % static_cast<std::size_t>(nx));
    const auto rest = idx / static_cast<std::size_t>(nx);
    return {x, static_cast<int>(rest % static_cast<std::size_t>(ny)), static_cast<int>(rest / static_cast<std::size_t>(ny))};
  }
  bool contains(int x, int y, int z) const { return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz; }
  int operator[](int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  bool valid() const { return nx > 0 && ny > 0 && nz > 0; }

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Physical voxel size in millimetres.
struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  double voxel_volume() const { return x * y * z; }
  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  bool valid() const;

  friend bool operator==(const Spacing&, const Spacing&) = default;
};

/// Dense scalar grid with geometry. Value type; copies are deep.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(Shape shape, Spacing spacing, T fill = T{})
      : shape_(shape), spacing_(spacing), data_(checked_size(shape, spacing), fill) {}
  Grid(Shape shape, Spacing spacing, std::vector<T> data)
      : shape_(shape), spacing_(spacing), data_(std::move(data)) {
    if (data_.size() != checked_size(shape, spacing)) {
      throw Error(ErrorCode::ShapeMismatch, "data length does not match shape");
    }
  }

  const Shape& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& operator()(int x, int y, int z) { return data_[shape_.index(x, y, z)]; }
  const T& operator()(int x, int y, int z) const { return data_[shape_.index(x, y, z)]; }

  bool same_geometry(const Shape& other) const { return shape_ == other; }

  friend bool operator==(const Grid&, const Grid&) = default;

 protected:
  static std::size_t checked_size(const Shape& shape, const Spacing& spacing) {
    if (!shape.valid()) throw Error(ErrorCode::InvalidArgument, "shape dimensions must be positive");
    if (!spacing.valid()) throw Error(ErrorCode::InvalidArgument, "spacing must be finite and positive");
    return shape.voxels();
  }

  Shape shape_;
  Spacing spacing_;
  std::vector<T> data_;
};

/// Intensity volume (the image v).
using Volume = Grid<float>;

/// {0,1} mask, e.g. the confidence mask or the stacked edge volume.
using BinaryVolume = Grid<std::uint8_t>;

/// Class-ID volume; class 0 is background.
class LabelVolume : public Grid<std::uint16_t> {
 public:
  LabelVolume() = default;
  LabelVolume(Shape shape, Spacing spacing, int num_classes, std::uint16_t fill = 0);
  LabelVolume(Shape shape, Spacing spacing, int num_classes, std::vector<std::uint16_t> data);

  int num_classes() const { return num_classes_; }

  /// Builds a label volume and infers N as max(value)+1 (at least 2).
  static LabelVolume infer(Shape shape, Spacing spacing, std::vector<std::uint16_t> data);

  friend bool operator==(const LabelVolume&, const LabelVolume&) = default;

 private:
  int num_classes_ = 2;
};

/// Throws ShapeMismatch unless both shapes agree.
void require_same_shape(const Shape& a, const Shape& b, const char* what);

/// Throws InvalidArgument if any voxel is NaN or infinite.
void require_finite(const Volume& vol);

/// Min-max normalisation to [0,1]; a constant volume maps to all zeros.
std::vector<double> normalized_intensities(const Volume& vol);

/// Where the source origin lands inside the target grid. Negative offsets crop.
struct Offset {
  int x = 0;
  int y = 0;
  int z = 0;
};

/// Offset that centres a source of `from` inside `to`, rounded toward zero.
Offset center_offset(const Shape& from, const Shape& to);

/// Copies the overlap of `src` into a zero-filled grid of `target` shape.
/// Output voxel (x,y,z) takes source voxel (x,y,z) - offset when that lies
/// inside the source. Spacing is carried over unchanged.
template <typename GridT>
GridT crop_or_pad(const GridT& src, const Shape& target, const Offset& offset) {
  GridT out = [&] {
    if constexpr (std::is_same_v<GridT, LabelVolume>) {
      return LabelVolume(target, src.spacing(), src.num_classes());
    } else {
      return GridT(target, src.spacing());
    }
  }();
  const Shape& s = src.shape();
  const int x0 = std::max(0, offset.x), x1 = std::min(target.nx, s.nx + offset.x);
  const int y0 = std::max(0, offset.y), y1 = std::min(target.ny, s.ny + offset.y);
  const int z0 = std::max(0, offset.z), z1 = std::min(target.nz, s.nz + offset.z);
  for (int z = z0; z < z1; ++z) {
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        out(x, y, z) = src(x - offset.x, y - offset.y, z - offset.z);
      }
    }
  }
  return out;
}

template <typename GridT>
GridT crop_or_pad(const GridT& src, const Shape& target) {
  return crop_or_pad(src, target, center_offset(src.shape(), target));
}

/// Channel-major multi-channel grid of doubles: value(c, i) = data[c * V + i].
/// Holds class probability maps (M^init, M^final), the boundary map b and
/// loss gradients.
class ChannelVolume {
 public:
  ChannelVolume() = default;
  ChannelVolume(Shape shape, Spacing spacing, int channels, double fill = 0.0);
  ChannelVolume(Shape shape, Spacing spacing, int channels, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  int channels() const { return channels_; }
  std::size_t voxels() const { return shape_.voxels(); }

  double& at(int c, std::size_t i) { return data_[static_cast<std::size_t>(c) * voxels() + i]; }
  double at(int c, std::size_t i) const { return data_[static_cast<std::size_t>(c) * voxels() + i]; }

  std::span<double> channel(int c) { return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * voxels(), voxels()); }
  std::span<const double> channel(int c) const {
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * voxels(), voxels());
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const ChannelVolume&, const ChannelVolume&) = default;

 private:
  Shape shape_;
  Spacing spacing_;
  int channels_ = 0;
  std::vector<double> data_;
};

using ProbVolume = ChannelVolume;

/// True when every entry is in [0,1] and each voxel's channels sum to 1 within `tol`.
bool is_probability(const ChannelVolume& p, double tol = 1e-5);

/// Per-voxel argmax over channels (lowest channel wins ties).
LabelVolume argmax(const ChannelVolume& p);

}  // namespace scribsup
