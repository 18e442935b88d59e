#include "occspot/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "occspot/error.hpp"

namespace occspot {

namespace detail {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteReader::need(std::size_t n) const {
  if (remaining() < n) {
    throw DataError(what_ + ": truncated (need " + std::to_string(n) + " bytes at offset " +
                    std::to_string(pos_) + ")");
  }
}

void ByteReader::expect_magic(std::string_view m) {
  need(m.size());
  if (std::memcmp(in_.data() + pos_, m.data(), m.size()) != 0) {
    throw DataError(what_ + ": bad magic, expected \"" + std::string(m) + "\"");
  }
  pos_ += m.size();
}

std::uint8_t ByteReader::u8() {
  need(1);
  return in_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
  need(n);
  auto s = in_.subspan(pos_, n);
  pos_ += n;
  return s;
}

void ByteReader::expect_end() const {
  if (remaining() != 0) {
    throw DataError(what_ + ": " + std::to_string(remaining()) + " trailing bytes");
  }
}

}  // namespace detail

namespace {

void expect_version(detail::ByteReader& r, std::string_view what) {
  const auto version = r.u32();
  if (version != kFormatVersion) {
    throw DataError(std::string(what) + ": unsupported version " + std::to_string(version));
  }
}

}  // namespace

Bytes encode_frame(const PointCloud& cloud) {
  Bytes out;
  out.reserve(16 + cloud.size() * 4 * (3 + cloud.feature_dim()));
  detail::ByteWriter w(out);
  w.magic("SPTC");
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(cloud.size()));
  w.u32(static_cast<std::uint32_t>(cloud.feature_dim()));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.xyz(i);
    w.f32(static_cast<float>(p.x()));
    w.f32(static_cast<float>(p.y()));
    w.f32(static_cast<float>(p.z()));
    for (double f : cloud.features(i)) w.f32(static_cast<float>(f));
  }
  return out;
}

PointCloud decode_frame(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "frame");
  r.expect_magic("SPTC");
  expect_version(r, "frame");
  const std::uint32_t n = r.u32();
  const std::uint32_t d = r.u32();
  if (r.remaining() != static_cast<std::size_t>(n) * 4 * (3 + d)) {
    throw DataError("frame: payload size does not match N=" + std::to_string(n) +
                    ", d=" + std::to_string(d));
  }
  PointCloud cloud(d);
  cloud.reserve(n);
  std::vector<double> feature(d);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double x = r.f32();
    const double y = r.f32();
    const double z = r.f32();
    for (auto& f : feature) f = r.f32();
    try {
      cloud.push_back(Vec3(x, y, z), feature);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("frame: point ") + std::to_string(i) + ": " + e.what());
    }
  }
  r.expect_end();
  return cloud;
}

Bytes encode_labels(const PointLabels& labels) {
  Bytes out;
  out.reserve(12 + labels.size());
  detail::ByteWriter w(out);
  w.magic("SPTL");
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(labels.size()));
  w.raw(labels.values);
  return out;
}

PointLabels decode_labels(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "labels");
  r.expect_magic("SPTL");
  expect_version(r, "labels");
  const std::uint32_t n = r.u32();
  const auto payload = r.raw(n);
  r.expect_end();
  return {{payload.begin(), payload.end()}};
}

std::string encode_boxes(std::span<const BoxLabel> boxes) {
  std::string out;
  for (const auto& b : boxes) {
    // ordered_json keeps the documented key order stable across writes.
    nlohmann::ordered_json j;
    j["cx"] = b.center.x();
    j["cy"] = b.center.y();
    j["cz"] = b.center.z();
    j["l"] = b.size.x();
    j["w"] = b.size.y();
    j["h"] = b.size.z();
    j["yaw"] = b.yaw;
    j["vx"] = b.vx;
    j["vy"] = b.vy;
    j["class_id"] = b.class_id;
    j["is_dynamic"] = b.is_dynamic;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<BoxLabel> decode_boxes(std::string_view text) {
  std::vector<BoxLabel> boxes;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      BoxLabel b;
      b.center = {j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("cz").get<double>()};
      b.size = {j.at("l").get<double>(), j.at("w").get<double>(), j.at("h").get<double>()};
      b.yaw = j.at("yaw").get<double>();
      b.vx = j.at("vx").get<double>();
      b.vy = j.at("vy").get<double>();
      b.class_id = j.at("class_id").get<int>();
      if (j.contains("is_dynamic")) {
        b.is_dynamic = j.at("is_dynamic").get<bool>();
      } else {
        b.is_dynamic = b.speed() > kDynamicSpeedThreshold;
      }
      boxes.push_back(b);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("boxes: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return boxes;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw DataError("short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

PointCloud read_frame(const std::filesystem::path& path) { return decode_frame(read_file(path)); }

void write_frame(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file_atomic(path, encode_frame(cloud));
}

PointLabels read_labels(const std::filesystem::path& path) { return decode_labels(read_file(path)); }

void write_labels(const std::filesystem::path& path, const PointLabels& labels) {
  write_file_atomic(path, encode_labels(labels));
}

std::vector<BoxLabel> read_boxes(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_boxes(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void write_boxes(const std::filesystem::path& path, std::span<const BoxLabel> boxes) {
  write_file_atomic(path, encode_boxes(boxes));
}

}  // namespace occspot
