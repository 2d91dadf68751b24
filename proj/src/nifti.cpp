#include "scribsup/nifti.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace scribsup {

static_assert(std::endian::native == std::endian::little, "NIfTI I/O assumes a little-endian host");

namespace {

// Byte offsets inside the 348-byte header.
constexpr std::size_t kOffSizeofHdr = 0;
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffIntentCode = 68;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffDescrip = 148;
constexpr std::size_t kOffMagic = 344;

template <typename T>
T load(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void store(std::vector<std::uint8_t>& bytes, std::size_t offset, T v) {
  std::memcpy(bytes.data() + offset, &v, sizeof(T));
}

int bytes_per_voxel(NiftiDatatype t) {
  switch (t) {
    case NiftiDatatype::UInt8: return 1;
    case NiftiDatatype::Int16: return 2;
    case NiftiDatatype::Float32: return 4;
  }
  return 0;
}

bool supported(std::int16_t code) {
  return code == static_cast<std::int16_t>(NiftiDatatype::UInt8) ||
         code == static_cast<std::int16_t>(NiftiDatatype::Int16) ||
         code == static_cast<std::int16_t>(NiftiDatatype::Float32);
}

void check_representable(const NiftiImage& image) {
  if (image.datatype == NiftiDatatype::Float32) return;
  const double lo = image.datatype == NiftiDatatype::UInt8 ? 0.0 : std::numeric_limits<std::int16_t>::min();
  const double hi = image.datatype == NiftiDatatype::UInt8 ? 255.0 : std::numeric_limits<std::int16_t>::max();
  for (float v : image.values) {
    if (!(v >= lo && v <= hi) || std::nearbyint(v) != v) {
      throw Error(ErrorCode::InvalidArgument, "value " + std::to_string(v) + " not representable in target datatype");
    }
  }
}

}  // namespace

std::vector<std::uint8_t> encode_nifti(const NiftiImage& image) {
  if (!image.shape.valid() || !image.spacing.valid() || image.channels < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid image geometry");
  }
  const std::size_t count = image.shape.voxels() * static_cast<std::size_t>(image.channels);
  if (image.values.size() != count) throw Error(ErrorCode::ShapeMismatch, "value count does not match geometry");
  if (image.shape.nx > 32767 || image.shape.ny > 32767 || image.shape.nz > 32767 || image.channels > 32767) {
    throw Error(ErrorCode::InvalidArgument, "dimension exceeds the int16 range of dim[]");
  }
  check_representable(image);

  const int bpv = bytes_per_voxel(image.datatype);
  std::vector<std::uint8_t> bytes(kNiftiVoxOffset + count * static_cast<std::size_t>(bpv), 0);

  store<std::int32_t>(bytes, kOffSizeofHdr, kNiftiHeaderSize);
  std::int16_t dim[8] = {3, static_cast<std::int16_t>(image.shape.nx), static_cast<std::int16_t>(image.shape.ny),
                         static_cast<std::int16_t>(image.shape.nz), 1, 1, 1, 1};
  if (image.channels > 1) {
    dim[0] = 5;
    dim[5] = static_cast<std::int16_t>(image.channels);
    store<std::int16_t>(bytes, kOffIntentCode, kNiftiIntentVector);
  }
  for (int i = 0; i < 8; ++i) store<std::int16_t>(bytes, kOffDim + 2 * static_cast<std::size_t>(i), dim[i]);
  store<std::int16_t>(bytes, kOffDatatype, static_cast<std::int16_t>(image.datatype));
  store<std::int16_t>(bytes, kOffBitpix, static_cast<std::int16_t>(8 * bpv));
  const float pixdim[8] = {1.0f, static_cast<float>(image.spacing.x), static_cast<float>(image.spacing.y),
                           static_cast<float>(image.spacing.z), 0.0f, 0.0f, 0.0f, 0.0f};
  for (int i = 0; i < 8; ++i) store<float>(bytes, kOffPixdim + 4 * static_cast<std::size_t>(i), pixdim[i]);
  store<float>(bytes, kOffVoxOffset, static_cast<float>(kNiftiVoxOffset));
  store<float>(bytes, kOffSclSlope, 0.0f);
  bytes[kOffXyztUnits] = 2;  // millimetres
  const char descrip[] = "scribsup";
  std::memcpy(bytes.data() + kOffDescrip, descrip, sizeof(descrip) - 1);
  std::memcpy(bytes.data() + kOffMagic, "n+1\0", 4);

  std::uint8_t* out = bytes.data() + kNiftiVoxOffset;
  switch (image.datatype) {
    case NiftiDatatype::UInt8:
      for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<std::uint8_t>(image.values[i]);
      break;
    case NiftiDatatype::Int16:
      for (std::size_t i = 0; i < count; ++i) {
        const auto v = static_cast<std::int16_t>(image.values[i]);
        std::memcpy(out + 2 * i, &v, 2);
      }
      break;
    case NiftiDatatype::Float32:
      std::memcpy(out, image.values.data(), 4 * count);
      break;
  }
  return bytes;
}

NiftiImage decode_nifti(std::span<const std::uint8_t> bytes, bool allow_vector) {
  if (bytes.size() < static_cast<std::size_t>(kNiftiHeaderSize)) {
    throw Error(ErrorCode::MalformedHeader, "file shorter than a NIfTI-1 header");
  }
  if (load<std::int32_t>(bytes, kOffSizeofHdr) != kNiftiHeaderSize) {
    throw Error(ErrorCode::MalformedHeader, "sizeof_hdr is not 348 (big-endian or not NIfTI-1)");
  }
  if (std::memcmp(bytes.data() + kOffMagic, "n+1\0", 4) != 0) {
    throw Error(ErrorCode::MalformedHeader, "magic is not \"n+1\"");
  }

  std::int16_t dim[8];
  for (int i = 0; i < 8; ++i) dim[i] = load<std::int16_t>(bytes, kOffDim + 2 * static_cast<std::size_t>(i));
  NiftiImage image;
  if (dim[0] == 3) {
    image.channels = 1;
  } else if (allow_vector && dim[0] == 5 && dim[4] == 1 && dim[5] >= 1) {
    image.channels = dim[5];
  } else {
    throw Error(ErrorCode::MalformedHeader, "unsupported dimensionality dim[0]=" + std::to_string(dim[0]));
  }
  if (dim[1] < 1 || dim[2] < 1 || dim[3] < 1) throw Error(ErrorCode::MalformedHeader, "non-positive dimension");
  image.shape = {dim[1], dim[2], dim[3]};

  const auto code = load<std::int16_t>(bytes, kOffDatatype);
  if (!supported(code)) throw Error(ErrorCode::UnsupportedDatatype, "datatype code " + std::to_string(code));
  image.datatype = static_cast<NiftiDatatype>(code);
  const int bpv = bytes_per_voxel(image.datatype);
  if (load<std::int16_t>(bytes, kOffBitpix) != 8 * bpv) {
    throw Error(ErrorCode::MalformedHeader, "bitpix does not match datatype");
  }

  image.spacing = {load<float>(bytes, kOffPixdim + 4), load<float>(bytes, kOffPixdim + 8),
                   load<float>(bytes, kOffPixdim + 12)};
  if (!image.spacing.valid()) throw Error(ErrorCode::MalformedHeader, "pixdim[1..3] must be finite and positive");

  const float vox_offset = load<float>(bytes, kOffVoxOffset);
  if (!(vox_offset >= kNiftiVoxOffset) || std::floor(vox_offset) != vox_offset) {
    throw Error(ErrorCode::MalformedHeader, "vox_offset must be an integer >= 352");
  }
  const auto offset = static_cast<std::size_t>(vox_offset);
  const std::size_t count = image.shape.voxels() * static_cast<std::size_t>(image.channels);
  if (bytes.size() < offset + count * static_cast<std::size_t>(bpv)) {
    throw Error(ErrorCode::TruncatedData, "expected " + std::to_string(count * static_cast<std::size_t>(bpv)) +
                                              " data bytes, found " +
                                              std::to_string(bytes.size() > offset ? bytes.size() - offset : 0));
  }

  image.values.resize(count);
  const std::uint8_t* in = bytes.data() + offset;
  switch (image.datatype) {
    case NiftiDatatype::UInt8:
      for (std::size_t i = 0; i < count; ++i) image.values[i] = in[i];
      break;
    case NiftiDatatype::Int16:
      for (std::size_t i = 0; i < count; ++i) {
        std::int16_t v;
        std::memcpy(&v, in + 2 * i, 2);
        image.values[i] = v;
      }
      break;
    case NiftiDatatype::Float32:
      std::memcpy(image.values.data(), in, 4 * count);
      break;
  }
  return image;
}

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

NiftiImage read_nifti(const std::filesystem::path& path) { return decode_nifti(slurp(path), false); }

NiftiImage read_nifti_any(const std::filesystem::path& path) { return decode_nifti(slurp(path), true); }

void write_nifti(const NiftiImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_nifti(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Volume to_volume(const NiftiImage& image) {
  if (image.channels != 1) throw Error(ErrorCode::ShapeMismatch, "expected a single-channel image");
  Volume vol(image.shape, image.spacing, image.values);
  require_finite(vol);
  return vol;
}

LabelVolume to_labels(const NiftiImage& image, int num_classes) {
  if (image.channels != 1) throw Error(ErrorCode::ShapeMismatch, "expected a single-channel image");
  std::vector<std::uint16_t> data(image.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float v = image.values[i];
    if (!(v >= 0.0f && v <= 65535.0f) || std::nearbyint(v) != v) {
      throw Error(ErrorCode::InvalidArgument, "label volume holds a non-integral or negative value");
    }
    data[i] = static_cast<std::uint16_t>(v);
  }
  if (num_classes <= 0) return LabelVolume::infer(image.shape, image.spacing, std::move(data));
  return LabelVolume(image.shape, image.spacing, num_classes, std::move(data));
}

BinaryVolume to_binary(const NiftiImage& image) {
  if (image.channels != 1) throw Error(ErrorCode::ShapeMismatch, "expected a single-channel image");
  std::vector<std::uint8_t> data(image.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = image.values[i] != 0.0f ? 1 : 0;
  return BinaryVolume(image.shape, image.spacing, std::move(data));
}

ChannelVolume to_channels(const NiftiImage& image) {
  std::vector<double> data(image.values.begin(), image.values.end());
  return ChannelVolume(image.shape, image.spacing, image.channels, std::move(data));
}

NiftiImage to_nifti(const Volume& vol, NiftiDatatype type) {
  return {vol.shape(), vol.spacing(), type, 1, vol.values()};
}

NiftiImage to_nifti(const LabelVolume& vol, NiftiDatatype type) {
  return {vol.shape(), vol.spacing(), type, 1, std::vector<float>(vol.data().begin(), vol.data().end())};
}

NiftiImage to_nifti(const BinaryVolume& vol, NiftiDatatype type) {
  return {vol.shape(), vol.spacing(), type, 1, std::vector<float>(vol.data().begin(), vol.data().end())};
}

NiftiImage to_nifti(const ChannelVolume& vol) {
  std::vector<float> values(vol.data().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(vol.data()[i]);
  return {vol.shape(), vol.spacing(), NiftiDatatype::Float32, vol.channels(), std::move(values)};
}

}  // namespace scribsup
