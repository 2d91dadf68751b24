#include "scribsup/scribble.hpp"

#include <algorithm>
#include <string>

namespace scribsup {

ScribbleSet::ScribbleSet(Shape shape, Spacing spacing, int num_classes)
    : shape_(shape), spacing_(spacing), num_classes_(num_classes), dense_(shape.voxels(), kUnannotated) {
  if (!shape.valid()) throw Error(ErrorCode::InvalidArgument, "scribble grid shape must be positive");
  if (num_classes < 2 || num_classes > kUnannotated) {
    throw Error(ErrorCode::InvalidArgument, "scribble class count must be in [2, 255]");
  }
}

void ScribbleSet::add(std::size_t index, std::uint16_t label) {
  if (index >= dense_.size()) throw Error(ErrorCode::InvalidArgument, "scribble index out of bounds");
  if (label >= num_classes_) {
    throw Error(ErrorCode::InvalidArgument, "scribble class " + std::to_string(label) + " out of range");
  }
  if (dense_[index] == label) return;
  if (dense_[index] != kUnannotated) {
    throw Error(ErrorCode::InvalidArgument, "voxel " + std::to_string(index) + " annotated with conflicting classes");
  }
  dense_[index] = label;
  entries_.push_back({index, label});
}

void ScribbleSet::merge(const ScribbleSet& other) {
  require_same_shape(shape_, other.shape_, "scribble merge");
  num_classes_ = std::max(num_classes_, other.num_classes_);
  for (const auto& e : other.entries_) add(e.index, e.label);
}

LabelVolume ScribbleSet::to_label_volume() const {
  return LabelVolume(shape_, spacing_, kUnannotated + 1, dense_);
}

ScribbleSet ScribbleSet::from_label_volume(const Grid<std::uint16_t>& dense, int num_classes) {
  if (num_classes <= 0) {
    int max_label = 0;
    for (auto v : dense.data()) {
      if (v != kUnannotated) max_label = std::max<int>(max_label, v);
    }
    num_classes = std::max(2, max_label + 1);
  }
  ScribbleSet out(dense.shape(), dense.spacing(), num_classes);
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != kUnannotated) out.add(i, dense[i]);
  }
  return out;
}

namespace morph2d {

namespace {

Image dilate3x3(const Image& in) {
  Image out{in.nx, in.ny, std::vector<std::uint8_t>(in.px.size(), 0)};
  for (int y = 0; y < in.ny; ++y) {
    for (int x = 0; x < in.nx; ++x) {
      std::uint8_t v = 0;
      for (int dy = -1; dy <= 1 && !v; ++dy) {
        for (int dx = -1; dx <= 1 && !v; ++dx) v = in.at(x + dx, y + dy);
      }
      out.ref(x, y) = v;
    }
  }
  return out;
}

Image erode3x3_border_foreground(const Image& in) {
  Image out{in.nx, in.ny, std::vector<std::uint8_t>(in.px.size(), 0)};
  for (int y = 0; y < in.ny; ++y) {
    for (int x = 0; x < in.nx; ++x) {
      std::uint8_t v = 1;
      for (int dy = -1; dy <= 1 && v; ++dy) {
        for (int dx = -1; dx <= 1 && v; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= in.nx || yy >= in.ny) continue;
          v = in.at(xx, yy);
        }
      }
      out.ref(x, y) = v;
    }
  }
  return out;
}

// Neighbours in the order E, NE, N, NW, W, SW, S, SE (y grows downward).
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

int neighbour_count(const Image& img, int x, int y) {
  int n = 0;
  for (int k = 0; k < 8; ++k) n += img.at(x + kDx[k], y + kDy[k]);
  return n;
}

// Yokoi connectivity number for 8-connected foreground. A pixel is simple
// (deletable without changing topology) exactly when this equals 1.
int connectivity_number(const Image& img, int x, int y) {
  int c[9];
  for (int k = 0; k < 8; ++k) c[k] = 1 - img.at(x + kDx[k], y + kDy[k]);
  c[8] = c[0];
  int sum = 0;
  for (int k = 0; k < 8; k += 2) sum += c[k] - c[k] * c[k + 1] * c[(k + 2) % 8];
  return sum;
}

bool deletable(const Image& img, int x, int y) {
  return neighbour_count(img, x, y) >= 2 && connectivity_number(img, x, y) == 1;
}

}  // namespace

Image close3x3(const Image& in) { return erode3x3_border_foreground(dilate3x3(in)); }

Image thin(const Image& in) {
  Image img = in;
  // Border directions N, S, E, W: a pixel is a candidate when its neighbour
  // on that side is background.
  constexpr int kSide[4][2] = {{0, -1}, {0, 1}, {1, 0}, {-1, 0}};
  bool changed = true;
  std::vector<std::pair<int, int>> candidates;
  while (changed) {
    changed = false;
    for (const auto& side : kSide) {
      candidates.clear();
      for (int y = 0; y < img.ny; ++y) {
        for (int x = 0; x < img.nx; ++x) {
          if (img.at(x, y) && !img.at(x + side[0], y + side[1])) candidates.emplace_back(x, y);
        }
      }
      for (const auto& [x, y] : candidates) {
        if (deletable(img, x, y)) {
          img.ref(x, y) = 0;
          changed = true;
        }
      }
    }
  }

  // Topology-preserving peeling can leave a 2x2 block when each of its
  // pixels anchors a separate branch. Break such blocks, preferring a pixel
  // whose removal keeps connectivity.
  bool found = true;
  while (found) {
    found = false;
    for (int y = 0; y + 1 < img.ny && !found; ++y) {
      for (int x = 0; x + 1 < img.nx && !found; ++x) {
        if (!(img.at(x, y) && img.at(x + 1, y) && img.at(x, y + 1) && img.at(x + 1, y + 1))) continue;
        found = true;
        const std::pair<int, int> block[4] = {{x, y}, {x + 1, y}, {x, y + 1}, {x + 1, y + 1}};
        auto victim = block[0];
        for (const auto& p : block) {
          if (deletable(img, p.first, p.second)) {
            victim = p;
            break;
          }
        }
        img.ref(victim.first, victim.second) = 0;
      }
    }
  }
  return img;
}

bool has_solid_2x2(const Image& img) {
  for (int y = 0; y + 1 < img.ny; ++y) {
    for (int x = 0; x + 1 < img.nx; ++x) {
      if (img.at(x, y) && img.at(x + 1, y) && img.at(x, y + 1) && img.at(x + 1, y + 1)) return true;
    }
  }
  return false;
}

}  // namespace morph2d

namespace {

bool has_foreground(const LabelVolume& gt) {
  return std::any_of(gt.data().begin(), gt.data().end(), [](std::uint16_t v) { return v != 0; });
}

morph2d::Image slice_mask(const LabelVolume& gt, int z, auto&& predicate) {
  const Shape& s = gt.shape();
  morph2d::Image img{s.nx, s.ny, std::vector<std::uint8_t>(s.slice_voxels(), 0)};
  for (int y = 0; y < s.ny; ++y) {
    for (int x = 0; x < s.nx; ++x) img.ref(x, y) = predicate(gt(x, y, z)) ? 1 : 0;
  }
  return img;
}

}  // namespace

ScribbleSet simulate_foreground_scribbles(const LabelVolume& gt) {
  if (!has_foreground(gt)) throw Error(ErrorCode::EmptyForeground, "ground truth has no foreground class");
  const Shape& s = gt.shape();
  ScribbleSet out(s, gt.spacing(), gt.num_classes());
  for (int c = 1; c < gt.num_classes(); ++c) {
    const auto label = static_cast<std::uint16_t>(c);
    for (int z = 0; z < s.nz; ++z) {
      const morph2d::Image mask = slice_mask(gt, z, [label](std::uint16_t v) { return v == label; });
      if (std::none_of(mask.px.begin(), mask.px.end(), [](std::uint8_t v) { return v != 0; })) continue;
      const morph2d::Image skeleton = morph2d::thin(morph2d::close3x3(mask));
      for (int y = 0; y < s.ny; ++y) {
        for (int x = 0; x < s.nx; ++x) {
          // Closing may reach outside the class; keep only pixels of the class.
          if (skeleton.at(x, y) && mask.at(x, y)) out.add(x, y, z, label);
        }
      }
    }
  }
  return out;
}

ScribbleSet simulate_background_scribble(const LabelVolume& gt, int margin_vox) {
  if (margin_vox < 1) throw Error(ErrorCode::InvalidArgument, "margin must be at least one voxel");
  if (!has_foreground(gt)) throw Error(ErrorCode::EmptyForeground, "ground truth has no foreground class");
  const Shape& s = gt.shape();
  ScribbleSet out(s, gt.spacing(), gt.num_classes());
  for (int z = 0; z < s.nz; ++z) {
    const morph2d::Image fg = slice_mask(gt, z, [](std::uint16_t v) { return v != 0; });
    if (std::none_of(fg.px.begin(), fg.px.end(), [](std::uint8_t v) { return v != 0; })) continue;

    // Chebyshev dilation as two separable 1D max filters.
    morph2d::Image rows{s.nx, s.ny, std::vector<std::uint8_t>(fg.px.size(), 0)};
    for (int y = 0; y < s.ny; ++y) {
      for (int x = 0; x < s.nx; ++x) {
        std::uint8_t v = 0;
        for (int d = -margin_vox; d <= margin_vox && !v; ++d) v = fg.at(x + d, y);
        rows.ref(x, y) = v;
      }
    }
    morph2d::Image grown{s.nx, s.ny, std::vector<std::uint8_t>(fg.px.size(), 0)};
    for (int y = 0; y < s.ny; ++y) {
      for (int x = 0; x < s.nx; ++x) {
        std::uint8_t v = 0;
        for (int d = -margin_vox; d <= margin_vox && !v; ++d) v = rows.at(x, y + d);
        grown.ref(x, y) = v;
      }
    }

    for (int y = 0; y < s.ny; ++y) {
      for (int x = 0; x < s.nx; ++x) {
        if (!grown.at(x, y) || gt(x, y, z) != 0) continue;
        const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
        bool outer = false;
        for (const auto& p : nb) {
          if (p[0] < 0 || p[1] < 0 || p[0] >= s.nx || p[1] >= s.ny) continue;  // clipped at the border
          if (!grown.at(p[0], p[1])) outer = true;
        }
        if (outer) out.add(x, y, z, 0);
      }
    }
  }
  return out;
}

ScribbleSet simulate_scribbles(const LabelVolume& gt, int margin_vox) {
  ScribbleSet out = simulate_foreground_scribbles(gt);
  out.merge(simulate_background_scribble(gt, margin_vox));
  return out;
}

}  // namespace scribsup
