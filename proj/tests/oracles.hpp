#pragma once

// Independent reference computations used by the unit and acceptance
// suites. Nothing here calls into the code path it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "scribsup/losses.hpp"
#include "scribsup/metrics.hpp"
#include "scribsup/propagation.hpp"
#include "scribsup/scribble.hpp"
#include "scribsup/supervoxel.hpp"
#include "scribsup/volume.hpp"

namespace oracle {

using namespace scribsup;

// ------------------------------------------------------------ random data

inline ChannelVolume random_probs(std::mt19937_64& rng, Shape s, Spacing sp, int channels, double floor = 0.05) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ChannelVolume p(s, sp, channels);
  for (std::size_t i = 0; i < s.voxels(); ++i) {
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) {
      p.at(c, i) = floor + u(rng);
      sum += p.at(c, i);
    }
    for (int c = 0; c < channels; ++c) p.at(c, i) /= sum;
  }
  return p;
}

inline Volume random_volume(std::mt19937_64& rng, Shape s, Spacing sp) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Volume v(s, sp);
  for (auto& x : v.data()) x = u(rng);
  return v;
}

// ------------------------------------------------------ finite differences

/// Central difference of f at coordinate i of x.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                 std::size_t i, double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

/// |a - n| / max(|a|, |n|, floor). The floor keeps exact zeros comparable.
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// ---------------------------------------------------------- loss oracles

/// Two-sided boundary cross-entropy, straight from its definition.
inline double boundary_ce_value(const std::vector<double>& b, const BinaryVolume& B) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double p = std::clamp(b[i], 1e-7, 1.0 - 1e-7);
    s += B[i] ? std::log(p) : std::log(1.0 - p);
  }
  return -s / static_cast<double>(b.size());
}

/// Partial CE from a per-voxel loop; `flat` is channel-major.
inline double partial_ce_value(const std::vector<double>& flat, std::size_t voxels, const PseudoLabels& pl) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < voxels; ++i) {
    if (!pl.confident[i]) continue;
    s += std::log(std::max(flat[pl.mask[i] * voxels + i], 1e-7));
    ++n;
  }
  return -s / static_cast<double>(n);
}

/// Brute-force partial CE gradient: -1/(|C| p) at (mask(x), x) for confident x.
inline std::vector<double> partial_ce_grad(const std::vector<double>& flat, std::size_t voxels, const PseudoLabels& pl) {
  std::vector<double> g(flat.size(), 0.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < voxels; ++i) n += pl.confident[i] != 0;
  for (std::size_t i = 0; i < voxels; ++i) {
    if (!pl.confident[i]) continue;
    g[pl.mask[i] * voxels + i] = -1.0 / (static_cast<double>(n) * flat[pl.mask[i] * voxels + i]);
  }
  return g;
}

struct FrozenMeans {
  std::vector<double> c1, c2;  // per channel; index 0 unused
};

inline std::vector<double> minmax(const Volume& v) {
  double lo = 1e300, hi = -1e300;
  for (float x : v.data()) {
    lo = std::min<double>(lo, x);
    hi = std::max<double>(hi, x);
  }
  std::vector<double> out(v.size(), 0.0);
  if (hi > lo) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / (hi - lo);
  }
  return out;
}

inline FrozenMeans region_means(const std::vector<double>& flat, const Shape& s, int channels, const Volume& v) {
  const auto img = minmax(v);
  const std::size_t n = s.voxels();
  FrozenMeans m{std::vector<double>(static_cast<std::size_t>(channels)), std::vector<double>(static_cast<std::size_t>(channels))};
  for (int c = 1; c < channels; ++c) {
    double a = 0, b = 0, ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = flat[static_cast<std::size_t>(c) * n + i];
      a += u * img[i];
      ma += u;
      b += (1 - u) * img[i];
      mb += 1 - u;
    }
    m.c1[static_cast<std::size_t>(c)] = a / std::max(ma, 1e-8);
    m.c2[static_cast<std::size_t>(c)] = b / std::max(mb, 1e-8);
  }
  return m;
}

/// Active boundary loss with the region means held at `means`, evaluated
/// voxel by voxel with explicit neighbour lookups.
inline double ab_value_frozen(const std::vector<double>& flat, const Shape& s, const Spacing& sp, int channels,
                              const Volume& v, const FrozenMeans& means, const AbParams& prm) {
  const auto img = minmax(v);
  const std::size_t n = s.voxels();
  const double omega = sp.x * sp.y * sp.z;
  double total = 0.0;
  for (int c = 1; c < channels; ++c) {
    auto u = [&](int x, int y, int z) { return flat[static_cast<std::size_t>(c) * n + s.index(x, y, z)]; };
    double surface = 0, vin = 0, vout = 0;
    for (int z = 0; z < s.nz; ++z) {
      for (int y = 0; y < s.ny; ++y) {
        for (int x = 0; x < s.nx; ++x) {
          const double dx = x + 1 < s.nx ? (u(x + 1, y, z) - u(x, y, z)) / sp.x : 0.0;
          const double dy = y + 1 < s.ny ? (u(x, y + 1, z) - u(x, y, z)) / sp.y : 0.0;
          const double dz = z + 1 < s.nz ? (u(x, y, z + 1) - u(x, y, z)) / sp.z : 0.0;
          surface += std::sqrt(dx * dx + dy * dy + dz * dz + prm.epsilon) * omega;
          const double iv = img[s.index(x, y, z)];
          const double c1 = means.c1[static_cast<std::size_t>(c)], c2 = means.c2[static_cast<std::size_t>(c)];
          vin += (c1 - iv) * (c1 - iv) * u(x, y, z) * omega;
          vout += (c2 - iv) * (c2 - iv) * (1 - u(x, y, z)) * omega;
        }
      }
    }
    total += surface + prm.lambda1 * vin + prm.lambda2 * vout;
  }
  return total;
}

// ---------------------------------------------------- propagation oracle

/// Enumerates the class set of every supervoxel and paints accordingly.
inline PseudoLabels propagate_brute(const ScribbleSet& s, const SupervoxelMap& sv) {
  std::map<int, std::set<int>> classes;
  for (const auto& e : s.entries()) classes[sv.ids[e.index]].insert(e.label);
  PseudoLabels out{LabelVolume(sv.shape, sv.spacing, s.num_classes()), BinaryVolume(sv.shape, sv.spacing)};
  for (std::size_t i = 0; i < sv.ids.size(); ++i) {
    const auto it = classes.find(sv.ids[i]);
    if (it != classes.end() && it->second.size() == 1) {
      out.mask[i] = static_cast<std::uint16_t>(*it->second.begin());
      out.confident[i] = 1;
    }
  }
  return out;
}

// ----------------------------------------------------- connectivity oracle

/// True when every ID's voxels form one 6-connected set (BFS per ID).
inline bool ids_six_connected(const Shape& s, const std::vector<std::int32_t>& ids) {
  std::map<std::int32_t, std::size_t> total, first;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ++total[ids[i]];
    first.emplace(ids[i], i);
  }
  for (const auto& [id, start] : first) {
    std::vector<char> seen(ids.size(), 0);
    std::vector<std::size_t> queue{start};
    seen[start] = 1;
    std::size_t reached = 0;
    while (!queue.empty()) {
      const std::size_t i = queue.back();
      queue.pop_back();
      ++reached;
      const int x = static_cast<int>(i % static_cast<std::size_t>(s.nx));
      const int y = static_cast<int>((i / static_cast<std::size_t>(s.nx)) % static_cast<std::size_t>(s.ny));
      const int z = static_cast<int>(i / s.slice_voxels());
      const int nb[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z}, {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
      for (const auto& p : nb) {
        if (p[0] < 0 || p[1] < 0 || p[2] < 0 || p[0] >= s.nx || p[1] >= s.ny || p[2] >= s.nz) continue;
        const std::size_t j = static_cast<std::size_t>(p[0]) + static_cast<std::size_t>(s.nx) * (static_cast<std::size_t>(p[1]) + static_cast<std::size_t>(s.ny) * static_cast<std::size_t>(p[2]));
        if (!seen[j] && ids[j] == id) {
          seen[j] = 1;
          queue.push_back(j);
        }
      }
    }
    if (reached != total[id]) return false;
  }
  return true;
}

// -------------------------------------------------------- metric oracles

inline std::vector<std::array<int, 3>> boundary_points(const LabelVolume& v, int c) {
  const Shape& s = v.shape();
  std::vector<std::array<int, 3>> pts;
  for (int z = 0; z < s.nz; ++z) {
    for (int y = 0; y < s.ny; ++y) {
      for (int x = 0; x < s.nx; ++x) {
        if (v(x, y, z) != c) continue;
        bool edge = x == 0 || y == 0 || z == 0 || x == s.nx - 1 || y == s.ny - 1 || z == s.nz - 1;
        if (!edge) {
          edge = v(x - 1, y, z) != c || v(x + 1, y, z) != c || v(x, y - 1, z) != c || v(x, y + 1, z) != c ||
                 v(x, y, z - 1) != c || v(x, y, z + 1) != c;
        }
        if (edge) pts.push_back({x, y, z});
      }
    }
  }
  return pts;
}

/// Pooled all-pairs nearest boundary distances.
inline std::vector<double> pooled_distances_brute(const LabelVolume& p, const LabelVolume& g, int c, const Spacing& sp) {
  const auto a = boundary_points(p, c), b = boundary_points(g, c);
  std::vector<double> out;
  if (a.empty() || b.empty()) return out;
  auto nearest = [&](const std::array<int, 3>& q, const std::vector<std::array<int, 3>>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : set) {
      const double dx = (q[0] - r[0]) * sp.x, dy = (q[1] - r[1]) * sp.y, dz = (q[2] - r[2]) * sp.z;
      best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    return best;
  };
  for (const auto& q : a) out.push_back(nearest(q, b));
  for (const auto& q : b) out.push_back(nearest(q, a));
  return out;
}

inline double percentile95_brute(std::vector<double> d) {
  std::sort(d.begin(), d.end());
  const double pos = 0.95 * static_cast<double>(d.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, d.size() - 1);
  return d[lo] + (pos - static_cast<double>(lo)) * (d[hi] - d[lo]);
}

/// Random blob label volume: union of a few random boxes/balls of class 1..n-1.
inline LabelVolume random_blobs(std::mt19937_64& rng, Shape s, Spacing sp, int num_classes, int blobs) {
  LabelVolume v(s, sp, num_classes);
  std::uniform_int_distribution<int> cls(1, num_classes - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int b = 0; b < blobs; ++b) {
    const double cx = u(rng) * s.nx, cy = u(rng) * s.ny, cz = u(rng) * s.nz;
    const double r = 1.0 + u(rng) * 3.0;
    const auto c = static_cast<std::uint16_t>(cls(rng));
    for (int z = 0; z < s.nz; ++z) {
      for (int y = 0; y < s.ny; ++y) {
        for (int x = 0; x < s.nx; ++x) {
          if (std::hypot(x - cx, y - cy, z - cz) <= r) v(x, y, z) = c;
        }
      }
    }
  }
  return v;
}

// ----------------------------------------------------- scribble oracles

/// In-plane Chebyshev distance from (x,y) to the nearest foreground pixel of slice z.
inline int chebyshev_to_foreground(const LabelVolume& gt, int x, int y, int z) {
  int best = std::numeric_limits<int>::max();
  for (int yy = 0; yy < gt.shape().ny; ++yy) {
    for (int xx = 0; xx < gt.shape().nx; ++xx) {
      if (gt(xx, yy, z) != 0) best = std::min(best, std::max(std::abs(xx - x), std::abs(yy - y)));
    }
  }
  return best;
}

/// Background ring from a brute-force in-plane distance transform: gt
/// background pixels within `margin` of the foreground that have an in-image
/// 4-neighbour farther than `margin`.
inline std::set<std::size_t> background_ring_brute(const LabelVolume& gt, int margin) {
  const Shape& s = gt.shape();
  std::set<std::size_t> out;
  for (int z = 0; z < s.nz; ++z) {
    std::vector<int> d(s.slice_voxels());
    bool any = false;
    for (int y = 0; y < s.ny; ++y)
      for (int x = 0; x < s.nx; ++x) {
        d[static_cast<std::size_t>(y * s.nx + x)] = chebyshev_to_foreground(gt, x, y, z);
        any |= gt(x, y, z) != 0;
      }
    if (!any) continue;
    for (int y = 0; y < s.ny; ++y)
      for (int x = 0; x < s.nx; ++x) {
        if (gt(x, y, z) != 0 || d[static_cast<std::size_t>(y * s.nx + x)] > margin) continue;
        const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
        for (const auto& q : nb) {
          if (q[0] < 0 || q[1] < 0 || q[0] >= s.nx || q[1] >= s.ny) continue;
          if (d[static_cast<std::size_t>(q[1] * s.nx + q[0])] > margin) {
            out.insert(s.index(x, y, z));
            break;
          }
        }
      }
  }
  return out;
}

// ------------------------------------------------------ random partitions

/// Voronoi cells around random sites, IDs made dense.
inline SupervoxelMap random_voronoi_map(std::mt19937_64& rng, Shape s, int cells) {
  std::uniform_int_distribution<int> ux(0, s.nx - 1), uy(0, s.ny - 1), uz(0, s.nz - 1);
  std::vector<std::array<int, 3>> sites(static_cast<std::size_t>(cells));
  for (auto& p : sites) p = {ux(rng), uy(rng), uz(rng)};
  std::vector<std::int32_t> raw(s.voxels());
  for (std::size_t i = 0; i < s.voxels(); ++i) {
    const auto p = s.coords(i);
    int best = 0, bd = 1 << 30;
    for (int c = 0; c < cells; ++c) {
      const auto& q = sites[static_cast<std::size_t>(c)];
      const int d = (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + (p[2] - q[2]) * (p[2] - q[2]);
      if (d < bd) bd = d, best = c;
    }
    raw[i] = best;
  }
  std::map<std::int32_t, std::int32_t> dense;
  for (auto id : raw) dense.emplace(id, 0);
  std::int32_t next = 0;
  for (auto& [id, v] : dense) v = next++;
  SupervoxelMap m{s, {1, 1, 1}, raw, next};
  for (auto& id : m.ids) id = dense[id];
  return m;
}

}  // namespace oracle
