#pragma once

#include <memory>

#include "scribsup/scribble.hpp"
#include "scribsup/supervoxel.hpp"
#include "scribsup/volume.hpp"

namespace scribsup {

/// Dense supervision derived from scribbles.
struct PseudoLabels {
  LabelVolume mask;        // M^pseudo
  BinaryVolume confident;  // M^voxel
};

/// Paints every supervoxel touched by exactly one scribble class with that
/// class and marks it confident. Untouched or multiply-labelled supervoxels
/// get mask 0 and confident 0.
PseudoLabels propagate(const ScribbleSet& scribbles, const SupervoxelMap& sv);

/// Source of the static (pre-computed) boundary volume B.
class EdgeDetector {
 public:
  virtual ~EdgeDetector() = default;
  virtual BinaryVolume detect(const Volume& vol) const = 0;
};

/// Per axial slice: central-difference gradient magnitude (replicated
/// border), per-slice min-max normalisation, non-maximum suppression along
/// the gradient direction quantised to 0/45/90/135 degrees, threshold.
class GradientEdgeDetector final : public EdgeDetector {
 public:
  explicit GradientEdgeDetector(double threshold = 0.2);
  BinaryVolume detect(const Volume& vol) const override;

 private:
  double threshold_;
};

/// Edges computed elsewhere (e.g. a learned detector), binarised at
/// `threshold` when given as a soft map.
class PrecomputedEdges final : public EdgeDetector {
 public:
  PrecomputedEdges(Volume edges, double threshold = 0.5);
  BinaryVolume detect(const Volume& vol) const override;

 private:
  Volume edges_;
  double threshold_;
};

/// Stacked per-slice edges with the default gradient detector.
BinaryVolume static_boundary(const Volume& vol, double edge_threshold = 0.2);

}  // namespace scribsup
