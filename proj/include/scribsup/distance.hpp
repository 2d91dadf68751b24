#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scribsup/volume.hpp"

namespace scribsup {

/// Exact squared Euclidean distance (mm^2) from every voxel to the nearest
/// voxel with features[i] != 0, honouring anisotropic spacing. Separable
/// lower-envelope-of-parabolas passes, one per axis. Voxels get +inf when
/// there are no features at all.
std::vector<double> squared_edt(const Shape& shape, const Spacing& spacing, std::span<const std::uint8_t> features);

}  // namespace scribsup
