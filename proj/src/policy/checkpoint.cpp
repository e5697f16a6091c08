#include "policy/checkpoint.hpp"

#include <cstdio>
#include <string_view>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "perception/providers.hpp"

namespace sw {
namespace {
constexpr std::string_view kMagic = "SWCK";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const PolicyModel& model) {
  ByteWriter w;
  w.raw(kMagic);
  w.u32(kVersion);
  w.str(config_to_json(model.config()));
  const ParamStore& store = model.params();
  w.u32(static_cast<std::uint32_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Tensor& t = store.tensor(i);
    FeatureFile block{t.rows(), 1, t.cols(), {}};
    block.frames.push_back(FeatureGrid{t.rows(), 1, t.cols(), t.storage()});
    const std::vector<std::uint8_t> bytes = encode_feature_file(block);
    w.str(store.name(i));
    w.u64(bytes.size());
    for (std::uint8_t b : bytes) w.u8(b);
  }
  return w.take();
}

PolicyModel decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(kMagic);
  const std::size_t version_at = r.offset();
  if (r.u32() != kVersion) throw FormatError("unsupported SWCK version", version_at);
  const std::size_t config_at = r.offset();
  ModelConfig config;
  try {
    config = config_from_json(r.str());
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("bad model config: ") + e.what(), config_at);
  }
  PolicyModel model(config);
  ParamStore& store = model.params();
  const std::size_t count_at = r.offset();
  const std::uint32_t count = r.u32();
  if (count != store.size()) {
    throw FormatError("checkpoint has " + std::to_string(count) + " tensors, config implies " +
                          std::to_string(store.size()),
                      count_at);
  }
  std::vector<bool> seen(store.size(), false);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t entry_at = r.offset();
    const std::string name = r.str();
    const std::uint64_t len = r.u64();
    if (len > r.remaining()) throw FormatError("tensor \"" + name + "\" runs past the end of the file", r.offset());
    const std::size_t block_at = r.offset();
    const std::string raw = r.raw(static_cast<std::size_t>(len));
    FeatureFile block;
    try {
      block = decode_feature_file(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
    } catch (const FormatError& e) {
      throw FormatError("tensor \"" + name + "\": " + e.what(), block_at + e.byte_offset());
    }
    const auto idx = store.find(name);
    if (!idx) throw FormatError("unknown tensor \"" + name + "\"", entry_at);
    if (seen[*idx]) throw FormatError("duplicate tensor \"" + name + "\"", entry_at);
    Tensor& t = store.tensor(*idx);
    if (block.frames.size() != 1 || block.grid_h != t.rows() || block.grid_w != 1 || block.dim != t.cols()) {
      throw FormatError("tensor \"" + name + "\" has shape " + std::to_string(block.grid_h) + "x" +
                            std::to_string(block.dim) + ", expected " + t.shape_string(),
                        entry_at);
    }
    std::copy(block.frames[0].values.begin(), block.frames[0].values.end(), t.data());
    seen[*idx] = true;
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint", r.offset());
  return model;
}

void save_checkpoint(const std::string& path, const PolicyModel& model) {
  write_file_atomic(path, encode_checkpoint(model));
}

PolicyModel load_checkpoint(const std::string& path) { return decode_checkpoint(read_file_bytes(path)); }

std::string checkpoint_id(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0x5357434bULL;
  for (std::uint8_t b : bytes) h = mix64(h ^ b);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sw
