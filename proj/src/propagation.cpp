#include "scribsup/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace scribsup {

PseudoLabels propagate(const ScribbleSet& scribbles, const SupervoxelMap& sv) {
  require_same_shape(scribbles.shape(), sv.shape, "propagate");
  if (sv.ids.size() != sv.shape.voxels()) throw Error(ErrorCode::ShapeMismatch, "supervoxel id grid size");

  // Per supervoxel: -1 untouched, class ID when unique, -2 when conflicting.
  constexpr int kUntouched = -1;
  constexpr int kConflict = -2;
  std::vector<int> state(static_cast<std::size_t>(sv.count), kUntouched);
  for (const auto& e : scribbles.entries()) {
    int& s = state[static_cast<std::size_t>(sv.ids[e.index])];
    if (s == kUntouched) {
      s = e.label;
    } else if (s != e.label) {
      s = kConflict;
    }
  }

  PseudoLabels out{LabelVolume(sv.shape, sv.spacing, scribbles.num_classes()), BinaryVolume(sv.shape, sv.spacing)};
  for (std::size_t i = 0; i < sv.ids.size(); ++i) {
    const int s = state[static_cast<std::size_t>(sv.ids[i])];
    if (s >= 0) {
      out.mask[i] = static_cast<std::uint16_t>(s);
      out.confident[i] = 1;
    }
  }
  return out;
}

GradientEdgeDetector::GradientEdgeDetector(double threshold) : threshold_(threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::InvalidArgument, "edge threshold must be in (0,1)");
}

BinaryVolume GradientEdgeDetector::detect(const Volume& vol) const {
  const Shape& s = vol.shape();
  BinaryVolume out(s, vol.spacing());
  const std::size_t n = s.slice_voxels();
  std::vector<double> mag(n), gx(n), gy(n);

  for (int z = 0; z < s.nz; ++z) {
    auto I = [&](int x, int y) {
      return static_cast<double>(vol(std::clamp(x, 0, s.nx - 1), std::clamp(y, 0, s.ny - 1), z));
    };
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int y = 0; y < s.ny; ++y) {
      for (int x = 0; x < s.nx; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(s.nx) + static_cast<std::size_t>(x);
        gx[i] = 0.5 * (I(x + 1, y) - I(x - 1, y));
        gy[i] = 0.5 * (I(x, y + 1) - I(x, y - 1));
        mag[i] = std::hypot(gx[i], gy[i]);
        lo = std::min(lo, mag[i]);
        hi = std::max(hi, mag[i]);
      }
    }
    if (!(hi > lo)) continue;
    for (auto& m : mag) m = (m - lo) / (hi - lo);

    auto M = [&](int x, int y) {
      if (x < 0 || y < 0 || x >= s.nx || y >= s.ny) return 0.0;
      return mag[static_cast<std::size_t>(y) * static_cast<std::size_t>(s.nx) + static_cast<std::size_t>(x)];
    };
    for (int y = 0; y < s.ny; ++y) {
      for (int x = 0; x < s.nx; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(s.nx) + static_cast<std::size_t>(x);
        const double m = mag[i];
        if (m < threshold_ || m <= 0.0) continue;
        // Direction of the gradient folded into [0, 180) and binned.
        double angle = std::atan2(gy[i], gx[i]) * 180.0 / std::numbers::pi;
        if (angle < 0.0) angle += 180.0;
        int dx, dy;
        if (angle < 22.5 || angle >= 157.5) {
          dx = 1, dy = 0;
        } else if (angle < 67.5) {
          dx = 1, dy = 1;
        } else if (angle < 112.5) {
          dx = 0, dy = 1;
        } else {
          dx = -1, dy = 1;
        }
        // Strict on the negative side, non-strict on the positive side.
        if (m > M(x - dx, y - dy) && m >= M(x + dx, y + dy)) out(x, y, z) = 1;
      }
    }
  }
  return out;
}

PrecomputedEdges::PrecomputedEdges(Volume edges, double threshold) : edges_(std::move(edges)), threshold_(threshold) {}

BinaryVolume PrecomputedEdges::detect(const Volume& vol) const {
  require_same_shape(vol.shape(), edges_.shape(), "precomputed edges");
  BinaryVolume out(vol.shape(), vol.spacing());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = edges_[i] >= threshold_ ? 1 : 0;
  return out;
}

BinaryVolume static_boundary(const Volume& vol, double edge_threshold) {
  return GradientEdgeDetector(edge_threshold).detect(vol);
}

}  // namespace scribsup
