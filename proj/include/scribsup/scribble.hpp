#pragma once

#include <cstdint>
#include <vector>

#include "scribsup/volume.hpp"

namespace scribsup {

/// Voxel value marking "not annotated" in scribble label files.
inline constexpr std::uint16_t kUnannotated = 255;

struct ScribbleEntry {
  std::size_t index = 0;
  std::uint16_t label = 0;

  friend bool operator==(const ScribbleEntry&, const ScribbleEntry&) = default;
};

/// Sparse class annotations on a host grid.
class ScribbleSet {
 public:
  ScribbleSet() = default;
  ScribbleSet(Shape shape, Spacing spacing, int num_classes);

  const Shape& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  int num_classes() const { return num_classes_; }
  const std::vector<ScribbleEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Adds an annotation. Re-adding the same voxel with the same class is a
  /// no-op; a conflicting class throws InvalidArgument.
  void add(std::size_t index, std::uint16_t label);
  void add(int x, int y, int z, std::uint16_t label) { add(shape_.index(x, y, z), label); }

  /// Union of two sets on the same grid.
  void merge(const ScribbleSet& other);

  /// Dense form: annotated voxels carry their class, others kUnannotated.
  LabelVolume to_label_volume() const;
  /// Inverse of to_label_volume. num_classes <= 0 infers N from the labels.
  static ScribbleSet from_label_volume(const Grid<std::uint16_t>& dense, int num_classes = 0);

 private:
  Shape shape_;
  Spacing spacing_;
  int num_classes_ = 2;
  std::vector<ScribbleEntry> entries_;
  std::vector<std::uint16_t> dense_;  // kUnannotated where empty
};

/// Per axial slice and foreground class: close the class mask with a 3x3
/// element, then peel it down to a connectivity-preserving one-pixel
/// skeleton. Throws EmptyForeground when the mask has no class >= 1.
ScribbleSet simulate_foreground_scribbles(const LabelVolume& gt);

/// Per axial slice holding foreground: the outer contour of the foreground
/// dilated by `margin_vox` (8-connected, i.e. Chebyshev ball), restricted to
/// gt background and clipped at the slice border. Emitted as class 0.
ScribbleSet simulate_background_scribble(const LabelVolume& gt, int margin_vox = 10);

/// Foreground and background scribbles together.
ScribbleSet simulate_scribbles(const LabelVolume& gt, int margin_vox = 10);

namespace morph2d {

/// Row-major nx*ny binary image.
struct Image {
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> px;

  std::uint8_t at(int x, int y) const { return (x < 0 || y < 0 || x >= nx || y >= ny) ? 0 : px[static_cast<std::size_t>(y) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(x)]; }
  std::uint8_t& ref(int x, int y) { return px[static_cast<std::size_t>(y) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(x)]; }
};

/// 3x3 closing; pixels outside the image count as background for the
/// dilation and foreground for the erosion.
Image close3x3(const Image& in);

/// Thins to a skeleton that keeps 8-connectivity of the foreground,
/// 4-connectivity of the background and all end points.
Image thin(const Image& in);

/// True when the image contains a 2x2 block of foreground pixels.
bool has_solid_2x2(const Image& img);

}  // namespace morph2d

}  // namespace scribsup
