#include "scribsup/supervoxel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace scribsup {

bool SupervoxelMap::is_partition() const {
  if (ids.size() != shape.voxels() || count < 1) return false;
  std::vector<char> seen(static_cast<std::size_t>(count), 0);
  for (auto id : ids) {
    if (id < 0 || id >= count) return false;
    seen[static_cast<std::size_t>(id)] = 1;
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

double slic_step_mm(const Shape& shape, const Spacing& spacing, int k) {
  const double physical = static_cast<double>(shape.voxels()) * spacing.voxel_volume();
  return std::cbrt(physical / static_cast<double>(k));
}

double slic_distance(const SlicCenter& center, int x, int y, int z, double intensity, const Spacing& spacing,
                     double step_mm, double compactness) {
  const double dx = (x - center.x) * spacing.x;
  const double dy = (y - center.y) * spacing.y;
  const double dz = (z - center.z) * spacing.z;
  const double d_int = intensity - center.intensity;
  const double d_sp2 = dx * dx + dy * dy + dz * dz;
  const double ratio = compactness / step_mm;
  return std::sqrt(d_int * d_int + d_sp2 * ratio * ratio);
}

namespace {

// Squared central-difference gradient of the normalised intensities, using
// one-sided neighbours at the border.
double gradient_energy(const Shape& s, const std::vector<double>& I, int x, int y, int z) {
  auto at = [&](int xx, int yy, int zz) {
    xx = std::clamp(xx, 0, s.nx - 1);
    yy = std::clamp(yy, 0, s.ny - 1);
    zz = std::clamp(zz, 0, s.nz - 1);
    return I[s.index(xx, yy, zz)];
  };
  const double gx = at(x + 1, y, z) - at(x - 1, y, z);
  const double gy = at(x, y + 1, z) - at(x, y - 1, z);
  const double gz = at(x, y, z + 1) - at(x, y, z - 1);
  return gx * gx + gy * gy + gz * gz;
}

std::vector<SlicCenter> seed_centers(const Shape& s, const Spacing& sp, const std::vector<double>& I, double step) {
  int n[3];
  double stride[3];
  for (int a = 0; a < 3; ++a) {
    const double extent = s[a] * sp[a];
    n[a] = std::clamp(static_cast<int>(std::lround(extent / step)), 1, s[a]);
    stride[a] = static_cast<double>(s[a]) / n[a];
  }

  std::vector<SlicCenter> centers;
  centers.reserve(static_cast<std::size_t>(n[0]) * n[1] * n[2]);
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        SlicCenter c{(i + 0.5) * stride[0] - 0.5, (j + 0.5) * stride[1] - 0.5, (k + 0.5) * stride[2] - 0.5, 0.0};
        const int cx = std::clamp(static_cast<int>(std::lround(c.x)), 0, s.nx - 1);
        const int cy = std::clamp(static_cast<int>(std::lround(c.y)), 0, s.ny - 1);
        const int cz = std::clamp(static_cast<int>(std::lround(c.z)), 0, s.nz - 1);

        // Move to the lowest-gradient voxel of the 3x3x3 neighbourhood that
        // stays inside this seed's grid cell, on strict improvement only.
        auto in_cell = [&](int v, int cell, int a) {
          const double t = (v + 0.5) / stride[a];
          return t >= cell && t < cell + 1;
        };
        double best = gradient_energy(s, I, cx, cy, cz);
        int bx = cx, by = cy, bz = cz;
        for (int dz = -1; dz <= 1; ++dz) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int x = cx + dx, y = cy + dy, z = cz + dz;
              if (!s.contains(x, y, z) || !in_cell(x, i, 0) || !in_cell(y, j, 1) || !in_cell(z, k, 2)) continue;
              const double g = gradient_energy(s, I, x, y, z);
              if (g < best) {
                best = g;
                bx = x;
                by = y;
                bz = z;
              }
            }
          }
        }
        if (bx != cx || by != cy || bz != cz) {
          c.x = bx;
          c.y = by;
          c.z = bz;
        }
        c.intensity = I[s.index(bx, by, bz)];
        centers.push_back(c);
      }
    }
  }
  return centers;
}

// Assigns every voxel to the nearest centre among those whose +-S window
// covers it. Voxels outside every window fall back to the globally nearest
// centre.
void assign(const Shape& s, const Spacing& sp, const std::vector<double>& I, const std::vector<SlicCenter>& centers,
            double step, double compactness, std::vector<std::int32_t>& labels, std::vector<double>& best) {
  labels.assign(s.voxels(), -1);
  best.assign(s.voxels(), std::numeric_limits<double>::infinity());
  for (std::size_t ci = 0; ci < centers.size(); ++ci) {
    const SlicCenter& c = centers[ci];
    int lo[3], hi[3];
    const double pos[3] = {c.x, c.y, c.z};
    for (int a = 0; a < 3; ++a) {
      const double reach = step / sp[a];
      lo[a] = std::max(0, static_cast<int>(std::ceil(pos[a] - reach)));
      hi[a] = std::min(s[a] - 1, static_cast<int>(std::floor(pos[a] + reach)));
    }
    for (int z = lo[2]; z <= hi[2]; ++z) {
      for (int y = lo[1]; y <= hi[1]; ++y) {
        for (int x = lo[0]; x <= hi[0]; ++x) {
          const std::size_t idx = s.index(x, y, z);
          const double d = slic_distance(c, x, y, z, I[idx], sp, step, compactness);
          if (d < best[idx]) {
            best[idx] = d;
            labels[idx] = static_cast<std::int32_t>(ci);
          }
        }
      }
    }
  }
  for (std::size_t idx = 0; idx < labels.size(); ++idx) {
    if (labels[idx] >= 0) continue;
    const auto [x, y, z] = s.coords(idx);
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
      const double d = slic_distance(centers[ci], x, y, z, I[idx], sp, step, compactness);
      if (d < best[idx]) {
        best[idx] = d;
        labels[idx] = static_cast<std::int32_t>(ci);
      }
    }
  }
}

// Moves each centre to the mean position/intensity of its members; empty
// clusters keep their previous centre. Returns the largest shift in mm.
double update(const Shape& s, const Spacing& sp, const std::vector<double>& I, const std::vector<std::int32_t>& labels,
              std::vector<SlicCenter>& centers) {
  struct Acc {
    double x = 0, y = 0, z = 0, v = 0;
    std::size_t n = 0;
  };
  std::vector<Acc> acc(centers.size());
  for (std::size_t idx = 0; idx < labels.size(); ++idx) {
    const auto [x, y, z] = s.coords(idx);
    Acc& a = acc[static_cast<std::size_t>(labels[idx])];
    a.x += x;
    a.y += y;
    a.z += z;
    a.v += I[idx];
    ++a.n;
  }
  double max_shift = 0.0;
  for (std::size_t ci = 0; ci < centers.size(); ++ci) {
    const Acc& a = acc[ci];
    if (a.n == 0) continue;
    const double n = static_cast<double>(a.n);
    SlicCenter next{a.x / n, a.y / n, a.z / n, a.v / n};
    const double dx = (next.x - centers[ci].x) * sp.x;
    const double dy = (next.y - centers[ci].y) * sp.y;
    const double dz = (next.z - centers[ci].z) * sp.z;
    max_shift = std::max(max_shift, std::sqrt(dx * dx + dy * dy + dz * dz));
    centers[ci] = next;
  }
  return max_shift;
}

}  // namespace

SlicClustering slic3d_cluster(const Volume& vol, const SlicParams& params) {
  const Shape& s = vol.shape();
  if (params.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (static_cast<std::size_t>(params.k) > s.voxels()) {
    throw Error(ErrorCode::KTooLarge,
                "k=" + std::to_string(params.k) + " exceeds voxel count " + std::to_string(s.voxels()));
  }
  if (!(params.compactness > 0.0)) throw Error(ErrorCode::InvalidArgument, "compactness must be positive");
  if (params.iterations < 0) throw Error(ErrorCode::InvalidArgument, "iterations must be non-negative");
  if (!(params.convergence_mm >= 0.0)) throw Error(ErrorCode::InvalidArgument, "convergence threshold must be >= 0");
  require_finite(vol);

  SlicClustering out;
  out.intensities = normalized_intensities(vol);
  out.step_mm = slic_step_mm(s, vol.spacing(), params.k);
  out.centers = seed_centers(s, vol.spacing(), out.intensities, out.step_mm);

  std::vector<double> best;
  for (int it = 0; it < params.iterations; ++it) {
    assign(s, vol.spacing(), out.intensities, out.centers, out.step_mm, params.compactness, out.labels, best);
    const double shift = update(s, vol.spacing(), out.intensities, out.labels, out.centers);
    if (params.convergence_mm > 0.0 && shift < params.convergence_mm) break;
  }
  assign(s, vol.spacing(), out.intensities, out.centers, out.step_mm, params.compactness, out.labels, best);
  return out;
}

SupervoxelMap slic3d(const Volume& vol, const SlicParams& params) {
  SlicClustering clustering = slic3d_cluster(vol, params);
  SupervoxelMap raw{vol.shape(), vol.spacing(), std::move(clustering.labels),
                    static_cast<int>(clustering.centers.size())};
  const double step = clustering.step_mm;
  const double min_voxels = step * step * step / 4.0 / vol.spacing().voxel_volume();
  return enforce_connectivity(raw, min_voxels);
}

std::vector<std::int32_t> label_components(const Shape& s, const std::vector<std::int32_t>& ids, int* count) {
  std::vector<std::int32_t> comp(ids.size(), -1);
  std::vector<std::size_t> stack;
  std::int32_t next = 0;
  for (std::size_t seed = 0; seed < ids.size(); ++seed) {
    if (comp[seed] >= 0) continue;
    comp[seed] = next;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const auto [x, y, z] = s.coords(idx);
      const int nb[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z}, {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
      for (const auto& p : nb) {
        if (!s.contains(p[0], p[1], p[2])) continue;
        const std::size_t j = s.index(p[0], p[1], p[2]);
        if (comp[j] < 0 && ids[j] == ids[seed]) {
          comp[j] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
  }
  if (count != nullptr) *count = next;
  return comp;
}

SupervoxelMap enforce_connectivity(const SupervoxelMap& map, double min_voxels) {
  const Shape& s = map.shape;
  int ncomp = 0;
  const std::vector<std::int32_t> comp = label_components(s, map.ids, &ncomp);

  std::vector<std::size_t> size(static_cast<std::size_t>(ncomp), 0);
  for (auto c : comp) ++size[static_cast<std::size_t>(c)];

  // Component adjacency (6-neighbourhood), deduplicated and sorted.
  std::vector<std::vector<std::int32_t>> adj(static_cast<std::size_t>(ncomp));
  for (std::size_t idx = 0; idx < comp.size(); ++idx) {
    const auto [x, y, z] = s.coords(idx);
    const int fwd[3][3] = {{x + 1, y, z}, {x, y + 1, z}, {x, y, z + 1}};
    for (const auto& p : fwd) {
      if (!s.contains(p[0], p[1], p[2])) continue;
      const auto a = comp[idx], b = comp[s.index(p[0], p[1], p[2])];
      if (a == b) continue;
      adj[static_cast<std::size_t>(a)].push_back(b);
      adj[static_cast<std::size_t>(b)].push_back(a);
    }
  }
  for (auto& v : adj) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  // Union-find over components; merging only ever joins adjacent groups, so
  // every group stays 6-connected.
  std::vector<std::int32_t> parent(static_cast<std::size_t>(ncomp));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::size_t> group_size = size;
  auto find = [&](std::int32_t a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };

  std::vector<std::int32_t> orphans;
  for (std::int32_t c = 0; c < ncomp; ++c) {
    if (static_cast<double>(size[static_cast<std::size_t>(c)]) < min_voxels && !adj[static_cast<std::size_t>(c)].empty()) {
      orphans.push_back(c);
    }
  }
  std::stable_sort(orphans.begin(), orphans.end(), [&](std::int32_t a, std::int32_t b) {
    return size[static_cast<std::size_t>(a)] < size[static_cast<std::size_t>(b)];
  });
  for (const auto c : orphans) {
    const std::int32_t root = find(c);
    if (static_cast<double>(group_size[static_cast<std::size_t>(root)]) >= min_voxels) continue;
    std::int32_t host = -1;
    for (const auto n : adj[static_cast<std::size_t>(c)]) {
      const std::int32_t r = find(n);
      if (r == root) continue;
      if (host < 0 || group_size[static_cast<std::size_t>(r)] > group_size[static_cast<std::size_t>(host)] ||
          (group_size[static_cast<std::size_t>(r)] == group_size[static_cast<std::size_t>(host)] && r < host)) {
        host = r;
      }
    }
    if (host < 0) continue;
    parent[static_cast<std::size_t>(root)] = host;
    group_size[static_cast<std::size_t>(host)] += group_size[static_cast<std::size_t>(root)];
  }

  SupervoxelMap out{s, map.spacing, std::vector<std::int32_t>(comp.size(), -1), 0};
  std::vector<std::int32_t> renumber(static_cast<std::size_t>(ncomp), -1);
  for (std::size_t idx = 0; idx < comp.size(); ++idx) {
    const auto r = static_cast<std::size_t>(find(comp[idx]));
    if (renumber[r] < 0) renumber[r] = out.count++;
    out.ids[idx] = renumber[r];
  }
  return out;
}

LabelVolume to_label_volume(const SupervoxelMap& map) {
  if (map.count >= 32768) {
    throw Error(ErrorCode::InvalidArgument,
                "supervoxel count " + std::to_string(map.count) + " does not fit an int16 NIfTI");
  }
  std::vector<std::uint16_t> data(map.ids.begin(), map.ids.end());
  return LabelVolume(map.shape, map.spacing, std::max(2, map.count), std::move(data));
}

SupervoxelMap from_label_volume(const LabelVolume& labels) {
  std::map<std::uint16_t, std::int32_t> dense;
  for (auto v : labels.data()) dense.emplace(v, 0);
  std::int32_t next = 0;
  for (auto& [value, id] : dense) id = next++;
  SupervoxelMap out{labels.shape(), labels.spacing(), std::vector<std::int32_t>(labels.size()), next};
  for (std::size_t i = 0; i < labels.size(); ++i) out.ids[i] = dense[labels[i]];
  return out;
}

}  // namespace scribsup
