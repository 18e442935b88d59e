#ifndef OCCSPOT_CHECKPOINT_HPP
#define OCCSPOT_CHECKPOINT_HPP

#include <filesystem>
#include <span>

#include <nlohmann/json.hpp>

#include "occspot/io.hpp"
#include "occspot/model.hpp"

namespace occspot {

struct Checkpoint {
  ModelParams params;
  /// Free-form hyperparameters and seed, stored in the header.
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

// "SPCK", u32 version, u32 header length, JSON header, f32 parameter blob.
// Parameters are stored in single precision.
Bytes encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
Checkpoint read_checkpoint(const std::filesystem::path& path);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

nlohmann::ordered_json shape_to_json(const ModelShape& shape);
ModelShape shape_from_json(const nlohmann::ordered_json& j);

}  // namespace occspot

#endif  // OCCSPOT_CHECKPOINT_HPP
