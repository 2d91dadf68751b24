#pragma once

#include <cstdint>
#include <vector>

#include "scribsup/volume.hpp"

namespace scribsup {

/// Partition of a volume into supervoxels with IDs 0..count-1.
struct SupervoxelMap {
  Shape shape;
  Spacing spacing;
  std::vector<std::int32_t> ids;
  int count = 0;

  std::int32_t operator[](std::size_t i) const { return ids[i]; }

  /// Checks the partition invariant (every ID < count, every ID used).
  bool is_partition() const;
};

struct SlicParams {
  int k = 1;
  double compactness = 10.0;
  int iterations = 10;
  /// Stop early once no centre moves more than this many mm; 0 runs all iterations.
  double convergence_mm = 0.0;
};

/// One cluster centre: position in voxel-index units (may be fractional)
/// plus normalised intensity.
struct SlicCenter {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
};

/// Raw clustering state after the final assignment round, before
/// connectivity enforcement.
struct SlicClustering {
  std::vector<std::int32_t> labels;
  std::vector<SlicCenter> centers;
  double step_mm = 0.0;
  std::vector<double> intensities;  // min-max normalised input
};

/// Physical grid step S = (physical volume / k)^(1/3) in mm.
double slic_step_mm(const Shape& shape, const Spacing& spacing, int k);

/// Assignment distance D between a voxel and a centre, with spatial offsets
/// measured in mm.
double slic_distance(const SlicCenter& center, int x, int y, int z, double intensity, const Spacing& spacing,
                     double step_mm, double compactness);

/// Seeding plus Lloyd rounds plus one last assignment, no connectivity step.
SlicClustering slic3d_cluster(const Volume& vol, const SlicParams& params);

/// Anisotropy-aware 3D SLIC. Throws KTooLarge when k exceeds the voxel count.
SupervoxelMap slic3d(const Volume& vol, const SlicParams& params);

/// Splits every ID into its 6-connected components, merges components
/// smaller than `min_voxels` into the largest adjacent one and renumbers IDs
/// by first occurrence in memory order.
SupervoxelMap enforce_connectivity(const SupervoxelMap& map, double min_voxels = 0.0);

/// 6-connected component labelling of an ID grid; returns per-voxel
/// component index numbered by first occurrence.
std::vector<std::int32_t> label_components(const Shape& shape, const std::vector<std::int32_t>& ids, int* count);

/// Converts to a label grid for NIfTI output; requires count < 32768.
LabelVolume to_label_volume(const SupervoxelMap& map);
SupervoxelMap from_label_volume(const LabelVolume& labels);

}  // namespace scribsup
