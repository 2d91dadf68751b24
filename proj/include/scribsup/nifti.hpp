#pragma once

// Minimal NIfTI-1 (.nii, single file, uncompressed, little-endian) support.
// Orientation (qform/sform) is ignored; geometry is the grid shape plus
// pixdim[1..3] as voxel spacing.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "scribsup/volume.hpp"

namespace scribsup {

enum class NiftiDatatype : std::int16_t {
  UInt8 = 2,
  Int16 = 4,
  Float32 = 16,
};

inline constexpr int kNiftiHeaderSize = 348;
inline constexpr int kNiftiVoxOffset = 352;
/// intent_code for vector-valued voxels (used for multi-channel volumes).
inline constexpr std::int16_t kNiftiIntentVector = 1007;
/// Raw image as stored on disk. Values are widened to float, which is exact
/// for all three supported datatypes.
struct NiftiImage {
  Shape shape;
  Spacing spacing;
  NiftiDatatype datatype = NiftiDatatype::Float32;
  int channels = 1;  // > 1 only for vector images
  std::vector<float> values;
};

/// Reads a 3D image (dim[0] == 3).
NiftiImage read_nifti(const std::filesystem::path& path);

/// Reads either a 3D image (one channel) or a 5D vector image with
/// dim[4] == 1 and dim[5] == channels.
NiftiImage read_nifti_any(const std::filesystem::path& path);

/// Writes a 352-byte header (348 + empty extension block) followed by the
/// raw little-endian voxels. Values must be representable in the datatype.
void write_nifti(const NiftiImage& image, const std::filesystem::path& path);

/// Serialises to the exact bytes write_nifti would emit.
std::vector<std::uint8_t> encode_nifti(const NiftiImage& image);
NiftiImage decode_nifti(std::span<const std::uint8_t> bytes, bool allow_vector = false);

Volume to_volume(const NiftiImage& image);
/// num_classes <= 0 infers N from the data.
LabelVolume to_labels(const NiftiImage& image, int num_classes = 0);
/// Any nonzero voxel becomes 1.
BinaryVolume to_binary(const NiftiImage& image);
ChannelVolume to_channels(const NiftiImage& image);

NiftiImage to_nifti(const Volume& vol, NiftiDatatype type = NiftiDatatype::Float32);
NiftiImage to_nifti(const LabelVolume& vol, NiftiDatatype type = NiftiDatatype::Int16);
NiftiImage to_nifti(const BinaryVolume& vol, NiftiDatatype type = NiftiDatatype::UInt8);
/// Float32 vector image; a single channel is written as a plain 3D image.
NiftiImage to_nifti(const ChannelVolume& vol);

inline Volume read_volume(const std::filesystem::path& p) { return to_volume(read_nifti(p)); }
inline LabelVolume read_labels(const std::filesystem::path& p, int num_classes = 0) {
  return to_labels(read_nifti(p), num_classes);
}
inline BinaryVolume read_binary(const std::filesystem::path& p) { return to_binary(read_nifti(p)); }
inline ChannelVolume read_channels(const std::filesystem::path& p) { return to_channels(read_nifti_any(p)); }

template <typename VolumeT>
void write_volume(const VolumeT& vol, const std::filesystem::path& p) {
  write_nifti(to_nifti(vol), p);
}

}  // namespace scribsup
