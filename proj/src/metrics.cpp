#include "scribsup/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "scribsup/distance.hpp"

namespace scribsup {

namespace {

std::vector<std::uint8_t> class_mask(const LabelVolume& v, int c) {
  std::vector<std::uint8_t> m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = v[i] == c ? 1 : 0;
  return m;
}

struct Counts {
  std::size_t pred = 0, gt = 0, both = 0;
};

Counts count(const LabelVolume& pred, const LabelVolume& gt, int c) {
  require_same_shape(pred.shape(), gt.shape(), "metrics");
  Counts k;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == c, g = gt[i] == c;
    k.pred += p;
    k.gt += g;
    k.both += p && g;
  }
  return k;
}

}  // namespace

double dice(const LabelVolume& pred, const LabelVolume& gt, int c) {
  const Counts k = count(pred, gt, c);
  if (k.pred + k.gt == 0) return 1.0;
  return 2.0 * static_cast<double>(k.both) / static_cast<double>(k.pred + k.gt);
}

std::optional<double> precision(const LabelVolume& pred, const LabelVolume& gt, int c) {
  const Counts k = count(pred, gt, c);
  if (k.pred == 0) return std::nullopt;
  return static_cast<double>(k.both) / static_cast<double>(k.pred);
}

std::vector<std::size_t> boundary_voxels(const Shape& s, std::span<const std::uint8_t> mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const auto [x, y, z] = s.coords(i);
    const int nb[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z}, {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
    bool edge = false;
    for (const auto& p : nb) {
      if (!s.contains(p[0], p[1], p[2]) || !mask[s.index(p[0], p[1], p[2])]) {
        edge = true;
        break;
      }
    }
    if (edge) out.push_back(i);
  }
  return out;
}

std::vector<double> surface_distances(const LabelVolume& pred, const LabelVolume& gt, int c, const Spacing& spacing) {
  require_same_shape(pred.shape(), gt.shape(), "surface distances");
  const Shape& s = pred.shape();
  const auto pm = class_mask(pred, c), gm = class_mask(gt, c);
  const auto pb = boundary_voxels(s, pm), gb = boundary_voxels(s, gm);
  if (pb.empty() || gb.empty()) return {};

  auto border_mask = [&](const std::vector<std::size_t>& b) {
    std::vector<std::uint8_t> m(s.voxels(), 0);
    for (auto i : b) m[i] = 1;
    return m;
  };
  const auto to_gt = squared_edt(s, spacing, border_mask(gb));
  const auto to_pred = squared_edt(s, spacing, border_mask(pb));

  std::vector<double> pooled;
  pooled.reserve(pb.size() + gb.size());
  for (auto i : pb) pooled.push_back(std::sqrt(to_gt[i]));
  for (auto i : gb) pooled.push_back(std::sqrt(to_pred[i]));
  return pooled;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::optional<double> hd95(const LabelVolume& pred, const LabelVolume& gt, int c, const Spacing& spacing) {
  const auto d = surface_distances(pred, gt, c, spacing);
  if (d.empty()) return std::nullopt;
  return percentile(d, 0.95);
}

std::optional<double> hd95(const LabelVolume& pred, const LabelVolume& gt, int c) {
  return hd95(pred, gt, c, gt.spacing());
}

MetricsReport evaluate(const LabelVolume& pred, const LabelVolume& gt) {
  require_same_shape(pred.shape(), gt.shape(), "evaluate");
  const int n = std::max(pred.num_classes(), gt.num_classes());
  MetricsReport r;
  double sd = 0, sh = 0, sp = 0;
  int nd = 0, nh = 0, np = 0;
  for (int c = 1; c < n; ++c) {
    ClassMetrics m{c, dice(pred, gt, c), hd95(pred, gt, c), precision(pred, gt, c)};
    sd += m.dice;
    ++nd;
    if (m.hd95_mm) {
      sh += *m.hd95_mm;
      ++nh;
    } else {
      r.undefined.emplace_back(c, "hd95_mm");
    }
    if (m.precision) {
      sp += *m.precision;
      ++np;
    } else {
      r.undefined.emplace_back(c, "precision");
    }
    r.per_class.push_back(m);
  }
  if (nd > 0) r.mean_dice = sd / nd;
  if (nh > 0) r.mean_hd95_mm = sh / nh;
  if (np > 0) r.mean_precision = sp / np;
  return r;
}

}  // namespace scribsup
