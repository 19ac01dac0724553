#pragma once

// VGR1 grid container:
//   "VGR1" | u32 ndim | u32 dims[ndim] (X, Y[, Z]) | u8 dtype | u8 flags | payload
// dtype: 1 = f32, 2 = u8, 3 = u32. flags bit 0 marks a channel stack (the
// last dim counts channels). All integers little-endian; payload x-fastest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <type_traits>

#include "vgc/binary.hpp"
#include "vgc/grid.hpp"

namespace vgc {

enum class DType : std::uint8_t { F32 = 1, U8 = 2, U32 = 3 };

inline constexpr std::uint8_t kFlagChannelStack = 0x01;

template <class T>
constexpr DType dtype_of() {
  if constexpr (std::is_same_v<T, float>) return DType::F32;
  else if constexpr (std::is_same_v<T, std::uint8_t>) return DType::U8;
  else if constexpr (std::is_same_v<T, std::uint32_t>) return DType::U32;
  else static_assert(sizeof(T) == 0, "unsupported VGR1 element type");
}

inline std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::F32: return 4;
    case DType::U8: return 1;
    case DType::U32: return 4;
  }
  return 0;
}

struct GridHeader {
  std::uint32_t ndim = 3;
  Dims dims;
  DType dtype = DType::F32;
  std::uint8_t flags = 0;
};

// Upper bound on element count accepted from a file header.
inline constexpr std::uint64_t kMaxGridElements = std::uint64_t{1} << 32;

template <class T>
std::vector<char> encode_grid(const Grid<T>& g, std::uint8_t flags = 0) {
  detail::ByteWriter w;
  w.bytes("VGR1");
  const bool two_d = g.dims().z == 1 && !(flags & kFlagChannelStack);
  w.u32(two_d ? 2 : 3);
  w.u32(g.dims().x);
  w.u32(g.dims().y);
  if (!two_d) w.u32(g.dims().z);
  w.u8(static_cast<std::uint8_t>(dtype_of<T>()));
  w.u8(flags);
  for (T v : g.values()) {
    if constexpr (std::is_same_v<T, float>) w.f32(v);
    else if constexpr (std::is_same_v<T, std::uint8_t>) w.u8(v);
    else w.u32(v);
  }
  return w.buffer();
}

inline GridHeader read_grid_header(detail::ByteReader& r) {
  GridHeader h;
  if (r.bytes(4, "magic") != "VGR1") r.fail("bad magic (expected VGR1)", 0);
  const std::size_t ndim_at = r.offset();
  h.ndim = r.u32("ndim");
  if (h.ndim != 2 && h.ndim != 3) {
    r.fail("unsupported ndim " + std::to_string(h.ndim), ndim_at);
  }
  const std::size_t dims_at = r.offset();
  std::uint32_t d[3] = {1, 1, 1};
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < h.ndim; ++i) {
    d[i] = r.u32("dims");
    count *= d[i];
    if (d[i] == 0 || count > kMaxGridElements) {
      r.fail("dim overflow or zero extent", dims_at + 4 * i);
    }
  }
  h.dims = {d[0], d[1], d[2]};
  const std::size_t dtype_at = r.offset();
  const auto dt = r.u8("dtype");
  if (dt < 1 || dt > 3) r.fail("unknown dtype " + std::to_string(dt), dtype_at);
  h.dtype = static_cast<DType>(dt);
  h.flags = r.u8("flags");
  return h;
}

template <class T>
Grid<T> decode_grid(detail::ByteReader& r, std::uint8_t* flags_out = nullptr) {
  const GridHeader h = read_grid_header(r);
  if (h.dtype != dtype_of<T>()) {
    r.fail("dtype " + std::to_string(int(h.dtype)) + " does not match requested " +
               std::to_string(int(dtype_of<T>())),
           r.offset() - 2);
  }
  const std::size_t n = h.dims.count();
  r.require(n * dtype_size(h.dtype), "payload");
  std::vector<T> data(n);
  for (auto& v : data) {
    if constexpr (std::is_same_v<T, float>) v = r.f32("payload");
    else if constexpr (std::is_same_v<T, std::uint8_t>) v = r.u8("payload");
    else v = r.u32("payload");
  }
  if (!r.at_end()) r.fail("trailing bytes after payload", r.offset());
  if (flags_out) *flags_out = h.flags;
  return Grid<T>(h.dims, std::move(data));
}

template <class T>
void write_grid(const Grid<T>& g, const std::filesystem::path& path,
                std::uint8_t flags = 0) {
  detail::ByteWriter w;
  const auto bytes = encode_grid(g, flags);
  w.bytes(std::string_view(bytes.data(), bytes.size()));
  w.save(path);
}

template <class T>
Grid<T> read_grid(const std::filesystem::path& path,
                  std::uint8_t* flags_out = nullptr) {
  auto r = detail::ByteReader::from_file(path);
  return decode_grid<T>(r, flags_out);
}

/// Header of a VGR1 file without loading the payload type.
inline GridHeader peek_grid_header(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  return read_grid_header(r);
}

inline void write_volume(const Volume& v, const std::filesystem::path& path) {
  write_grid(v, path);
}
inline Volume read_volume(const std::filesystem::path& path) {
  return read_grid<float>(path);
}
inline void write_labels(const LabelMap& l, const std::filesystem::path& path) {
  write_grid(l, path);
}
inline LabelMap read_labels(const std::filesystem::path& path) {
  return read_grid<std::uint32_t>(path);
}

}  // namespace vgc
