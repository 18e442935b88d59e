#include "occspot/checkpoint.hpp"

#include <string>

#include "occspot/error.hpp"

namespace occspot {

using nlohmann::ordered_json;

ordered_json shape_to_json(const ModelShape& s) {
  return ordered_json{{"point_features", s.point_features},
                      {"embed", s.embed},
                      {"enc1", s.enc1},
                      {"enc2", s.enc2},
                      {"dec1", s.dec1},
                      {"dec2", s.dec2},
                      {"dec3", s.dec3},
                      {"n_out", s.n_out}};
}

ModelShape shape_from_json(const ordered_json& j) {
  ModelShape s;
  s.point_features = j.at("point_features").get<int>();
  s.embed = j.at("embed").get<int>();
  s.enc1 = j.at("enc1").get<int>();
  s.enc2 = j.at("enc2").get<int>();
  s.dec1 = j.at("dec1").get<int>();
  s.dec2 = j.at("dec2").get<int>();
  s.dec3 = j.at("dec3").get<int>();
  s.n_out = j.at("n_out").get<int>();
  return s;
}

Bytes encode_checkpoint(const Checkpoint& ckpt) {
  ckpt.params.validate();
  const ParamLayout layout(ckpt.params.shape);
  ordered_json blocks = ordered_json::array();
  for (int b = 0; b < static_cast<int>(Block::kCount); ++b) {
    blocks.push_back({{"name", kBlockNames[static_cast<std::size_t>(b)]},
                      {"size", layout.size(static_cast<Block>(b))}});
  }
  const ordered_json header{{"shape", shape_to_json(ckpt.params.shape)},
                            {"lambda", ckpt.params.lambda},
                            {"n_params", layout.total()},
                            {"blocks", blocks},
                            {"meta", ckpt.meta}};
  const std::string text = header.dump();
  Bytes out;
  out.reserve(12 + text.size() + 4 * layout.total());
  detail::ByteWriter w(out);
  w.magic("SPCK");
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  for (double v : ckpt.params.values) w.f32(static_cast<float>(v));
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  r.expect_magic("SPCK");
  const auto version = r.u32();
  if (version != kFormatVersion) throw DataError("checkpoint: unsupported version " + std::to_string(version));
  const auto len = r.u32();
  const auto text = r.raw(len);
  ordered_json header;
  try {
    header = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: malformed header: ") + e.what());
  }
  Checkpoint ckpt;
  try {
    ckpt.params.shape = shape_from_json(header.at("shape"));
    ckpt.params.lambda = header.at("lambda").get<double>();
    if (header.contains("meta")) ckpt.meta = header.at("meta");
    const auto n = header.at("n_params").get<std::size_t>();
    const ParamLayout layout(ckpt.params.shape);
    if (n != layout.total()) {
      throw DataError("checkpoint: header declares " + std::to_string(n) + " parameters, shape needs " +
                      std::to_string(layout.total()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: bad header field: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  const std::size_t n = ParamLayout(ckpt.params.shape).total();
  ckpt.params.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) ckpt.params.values[i] = r.f32();
  r.expect_end();
  try {
    ckpt.params.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  return ckpt;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

}  // namespace occspot
