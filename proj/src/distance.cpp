#include "scribsup/distance.hpp"

#include <limits>

namespace scribsup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One 1D pass: out[p] = min_q (h^2 (p-q)^2 + f[q]).
void envelope_1d(const std::vector<double>& f, double h2, std::vector<double>& out, std::vector<int>& v,
                 std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[static_cast<std::size_t>(q)] == kInf) continue;
    const double fq = f[static_cast<std::size_t>(q)] + h2 * q * q;
    while (k >= 0) {
      const int p = v[static_cast<std::size_t>(k)];
      const double s = (fq - (f[static_cast<std::size_t>(p)] + h2 * p * p)) / (2.0 * h2 * (q - p));
      if (s <= z[static_cast<std::size_t>(k)]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] =
        k == 0 ? -kInf
               : (fq - (f[static_cast<std::size_t>(v[static_cast<std::size_t>(k - 1)])] +
                        h2 * v[static_cast<std::size_t>(k - 1)] * v[static_cast<std::size_t>(k - 1)])) /
                     (2.0 * h2 * (q - v[static_cast<std::size_t>(k - 1)]));
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  int j = 0;
  for (int p = 0; p < n; ++p) {
    while (j < k && z[static_cast<std::size_t>(j + 1)] < p) ++j;
    const int q = v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(p)] = h2 * (p - q) * (p - q) + f[static_cast<std::size_t>(q)];
  }
}

}  // namespace

std::vector<double> squared_edt(const Shape& shape, const Spacing& spacing, std::span<const std::uint8_t> features) {
  if (features.size() != shape.voxels()) throw Error(ErrorCode::ShapeMismatch, "feature mask size");
  std::vector<double> dist(features.size());
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = features[i] ? 0.0 : kInf;

  const std::size_t stride[3] = {1, static_cast<std::size_t>(shape.nx), shape.slice_voxels()};
  for (int axis = 0; axis < 3; ++axis) {
    const int len = shape[axis];
    const double h2 = spacing[axis] * spacing[axis];
    std::vector<double> line(static_cast<std::size_t>(len)), out(static_cast<std::size_t>(len));
    std::vector<int> v(static_cast<std::size_t>(len));
    std::vector<double> z(static_cast<std::size_t>(len) + 1);
    for (std::size_t start = 0; start < dist.size(); ++start) {
      // Visit each line once, from the voxel whose coordinate on `axis` is 0.
      if ((start / stride[axis]) % static_cast<std::size_t>(len) != 0) continue;
      for (int i = 0; i < len; ++i) line[static_cast<std::size_t>(i)] = dist[start + static_cast<std::size_t>(i) * stride[axis]];
      envelope_1d(line, h2, out, v, z);
      for (int i = 0; i < len; ++i) dist[start + static_cast<std::size_t>(i) * stride[axis]] = out[static_cast<std::size_t>(i)];
    }
  }
  return dist;
}

}  // namespace scribsup
