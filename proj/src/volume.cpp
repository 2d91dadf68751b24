#include "scribsup/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scribsup {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::EmptyForeground: return "EmptyForeground";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoConfidentVoxels: return "NoConfidentVoxels";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::BadPatchShape: return "BadPatchShape";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool Spacing::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && x > 0 && y > 0 && z > 0;
}

namespace {

void check_labels(std::span<const std::uint16_t> data, int num_classes) {
  if (num_classes < 2) throw Error(ErrorCode::InvalidArgument, "a label volume needs at least 2 classes");
  for (auto v : data) {
    if (v >= num_classes) {
      throw Error(ErrorCode::InvalidArgument,
                  "label " + std::to_string(v) + " out of range for " + std::to_string(num_classes) + " classes");
    }
  }
}

}  // namespace

LabelVolume::LabelVolume(Shape shape, Spacing spacing, int num_classes, std::uint16_t fill)
    : Grid<std::uint16_t>(shape, spacing, fill), num_classes_(num_classes) {
  check_labels(data(), num_classes_);
}

LabelVolume::LabelVolume(Shape shape, Spacing spacing, int num_classes, std::vector<std::uint16_t> data)
    : Grid<std::uint16_t>(shape, spacing, std::move(data)), num_classes_(num_classes) {
  check_labels(this->data(), num_classes_);
}

LabelVolume LabelVolume::infer(Shape shape, Spacing spacing, std::vector<std::uint16_t> data) {
  int max_label = 0;
  for (auto v : data) max_label = std::max<int>(max_label, v);
  return LabelVolume(shape, spacing, std::max(2, max_label + 1), std::move(data));
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + ": (" + std::to_string(a.nx) + "," + std::to_string(a.ny) + "," +
                    std::to_string(a.nz) + ") vs (" + std::to_string(b.nx) + "," + std::to_string(b.ny) + "," +
                    std::to_string(b.nz) + ")");
  }
}

void require_finite(const Volume& vol) {
  for (float v : vol.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "volume contains non-finite intensities");
  }
}

std::vector<double> normalized_intensities(const Volume& vol) {
  std::vector<double> out(vol.size(), 0.0);
  if (vol.size() == 0) return out;
  const auto [lo_it, hi_it] = std::minmax_element(vol.data().begin(), vol.data().end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (static_cast<double>(vol[i]) - lo) / range;
  return out;
}

Offset center_offset(const Shape& from, const Shape& to) {
  return {(to.nx - from.nx) / 2, (to.ny - from.ny) / 2, (to.nz - from.nz) / 2};
}

ChannelVolume::ChannelVolume(Shape shape, Spacing spacing, int channels, double fill)
    : shape_(shape), spacing_(spacing), channels_(channels) {
  if (!shape.valid() || !spacing.valid() || channels < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid channel volume geometry");
  }
  data_.assign(shape.voxels() * static_cast<std::size_t>(channels), fill);
}

ChannelVolume::ChannelVolume(Shape shape, Spacing spacing, int channels, std::vector<double> data)
    : shape_(shape), spacing_(spacing), channels_(channels), data_(std::move(data)) {
  if (!shape.valid() || !spacing.valid() || channels < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid channel volume geometry");
  }
  if (data_.size() != shape.voxels() * static_cast<std::size_t>(channels)) {
    throw Error(ErrorCode::ShapeMismatch, "channel data length does not match shape");
  }
}

bool is_probability(const ChannelVolume& p, double tol) {
  for (std::size_t i = 0; i < p.voxels(); ++i) {
    double sum = 0.0;
    for (int c = 0; c < p.channels(); ++c) {
      const double v = p.at(c, i);
      if (!(v >= 0.0 && v <= 1.0)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

LabelVolume argmax(const ChannelVolume& p) {
  LabelVolume out(p.shape(), p.spacing(), std::max(2, p.channels()));
  for (std::size_t i = 0; i < p.voxels(); ++i) {
    int best = 0;
    for (int c = 1; c < p.channels(); ++c) {
      if (p.at(c, i) > p.at(best, i)) best = c;
    }
    out[i] = static_cast<std::uint16_t>(best);
  }
  return out;
}

}  // namespace scribsup
