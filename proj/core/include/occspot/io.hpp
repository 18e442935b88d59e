#ifndef OCCSPOT_IO_HPP
#define OCCSPOT_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "occspot/cloud.hpp"

namespace occspot {

using Bytes = std::vector<std::uint8_t>;

// Binary formats are little-endian regardless of host byte order.
//
//   frame  "SPTC" u32 version=1, u32 N, u32 d, N x (f32 x, f32 y, f32 z, d x f32)
//   labels "SPTL" u32 version=1, u32 N, N x u8
//   boxes  one JSON object per line: cx,cy,cz,l,w,h,yaw,vx,vy,class_id,is_dynamic

inline constexpr std::uint32_t kFormatVersion = 1;

/// Speed above which a box without an explicit is_dynamic flag counts as moving.
inline constexpr double kDynamicSpeedThreshold = 0.2;

Bytes encode_frame(const PointCloud& cloud);
PointCloud decode_frame(std::span<const std::uint8_t> bytes);

Bytes encode_labels(const PointLabels& labels);
PointLabels decode_labels(std::span<const std::uint8_t> bytes);

std::string encode_boxes(std::span<const BoxLabel> boxes);
/// Lines missing is_dynamic fall back to speed > kDynamicSpeedThreshold.
std::vector<BoxLabel> decode_boxes(std::string_view text);

Bytes read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

PointCloud read_frame(const std::filesystem::path& path);
void write_frame(const std::filesystem::path& path, const PointCloud& cloud);
PointLabels read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const PointLabels& labels);
std::vector<BoxLabel> read_boxes(const std::filesystem::path& path);
void write_boxes(const std::filesystem::path& path, std::span<const BoxLabel> boxes);

namespace detail {

class ByteWriter {
 public:
  explicit ByteWriter(Bytes& out) : out_(out) {}
  void magic(std::string_view m) { out_.insert(out_.end(), m.begin(), m.end()); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void f32(float v);
  void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

 private:
  Bytes& out_;
};

/// Bounds-checked reader; throws DataError on truncation or bad magic.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> in, std::string_view what) : in_(in), what_(what) {}
  void expect_magic(std::string_view m);
  std::uint8_t u8();
  std::uint32_t u32();
  float f32();
  std::span<const std::uint8_t> raw(std::size_t n);
  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  void expect_end() const;

 private:
  void need(std::size_t n) const;
  std::span<const std::uint8_t> in_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace detail

}  // namespace occspot

#endif  // OCCSPOT_IO_HPP
