#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scribsup/volume.hpp"

namespace scribsup {

/// 2|P∩G| / (|P|+|G|) for class c; 1 when both are empty.
double dice(const LabelVolume& pred, const LabelVolume& gt, int c);

/// TP / (TP + FP) for class c; nullopt when the prediction has no voxel of c.
std::optional<double> precision(const LabelVolume& pred, const LabelVolume& gt, int c);

/// Voxels of the mask with at least one 6-neighbour outside the mask or
/// lying on the image border.
std::vector<std::size_t> boundary_voxels(const Shape& shape, std::span<const std::uint8_t> mask);

/// Pooled nearest-boundary distances (mm) from each boundary of P to the
/// other and back. Empty when either region is empty.
std::vector<double> surface_distances(const LabelVolume& pred, const LabelVolume& gt, int c, const Spacing& spacing);

/// Percentile with linear interpolation between order statistics,
/// position q * (n - 1). Requires a non-empty sample.
double percentile(std::vector<double> values, double q);

/// 95th percentile of the pooled surface distances, in mm. nullopt when
/// either region is empty.
std::optional<double> hd95(const LabelVolume& pred, const LabelVolume& gt, int c, const Spacing& spacing);
std::optional<double> hd95(const LabelVolume& pred, const LabelVolume& gt, int c);

struct ClassMetrics {
  int label = 0;
  double dice = 0.0;
  std::optional<double> hd95_mm;
  std::optional<double> precision;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  std::optional<double> mean_dice;
  std::optional<double> mean_hd95_mm;
  std::optional<double> mean_precision;
  /// (class, metric name) for every undefined entry left out of the means.
  std::vector<std::pair<int, std::string>> undefined;
};

/// Metrics for every foreground class 1..N-1, N the larger class count.
MetricsReport evaluate(const LabelVolume& pred, const LabelVolume& gt);

}  // namespace scribsup
