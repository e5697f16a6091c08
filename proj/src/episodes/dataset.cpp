#include "episodes/dataset.hpp"

#include <string_view>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace sw {
namespace {

constexpr std::string_view kMagic = "SWEP";
constexpr std::uint32_t kVersion = 1;

void put_vec(ByteWriter& w, Vec2 v) {
  w.f64(v.x);
  w.f64(v.y);
}

Vec2 get_vec(ByteReader& r) {
  const double x = r.f64();
  return {x, r.f64()};
}

void put_input(ByteWriter& w, const ProviderInput& in) {
  w.u64(in.seed);
  put_vec(w, in.pose.position);
  w.f64(in.pose.heading);
  w.f64(in.time_s);
}

ProviderInput get_input(ByteReader& r) {
  ProviderInput in;
  in.seed = r.u64();
  in.pose.position = get_vec(r);
  in.pose.heading = r.f64();
  in.time_s = r.f64();
  return in;
}

// Guards counts read from the file against the bytes actually left.
std::size_t count(ByteReader& r, std::uint64_t n, std::size_t min_bytes_each, const char* what) {
  if (min_bytes_each > 0 && n > r.remaining() / min_bytes_each) {
    throw FormatError(std::string(what) + " count " + std::to_string(n) + " exceeds the remaining data", r.offset());
  }
  return static_cast<std::size_t>(n);
}

void put_world(ByteWriter& w, const World& world) {
  w.u64(world.seed);
  put_vec(w, world.bounds.min);
  put_vec(w, world.bounds.max);
  w.u32(static_cast<std::uint32_t>(world.obstacles.size()));
  for (const Polygon& p : world.obstacles) {
    w.u32(static_cast<std::uint32_t>(p.vertices.size()));
    for (Vec2 v : p.vertices) put_vec(w, v);
  }
  w.u32(static_cast<std::uint32_t>(world.agents.size()));
  for (const MovingAgent& a : world.agents) {
    w.f64(a.speed);
    w.f64(a.radius);
    w.u32(static_cast<std::uint32_t>(a.path.size()));
    for (Vec2 v : a.path) put_vec(w, v);
  }
}

World get_world(ByteReader& r) {
  World world;
  world.seed = r.u64();
  world.bounds.min = get_vec(r);
  world.bounds.max = get_vec(r);
  const std::size_t n_obs = count(r, r.u32(), 4, "obstacle");
  for (std::size_t i = 0; i < n_obs; ++i) {
    Polygon p;
    const std::size_t n = count(r, r.u32(), 16, "vertex");
    for (std::size_t k = 0; k < n; ++k) p.vertices.push_back(get_vec(r));
    world.obstacles.push_back(std::move(p));
  }
  const std::size_t n_agents = count(r, r.u32(), 20, "agent");
  for (std::size_t i = 0; i < n_agents; ++i) {
    MovingAgent a;
    a.speed = r.f64();
    a.radius = r.f64();
    const std::size_t n = count(r, r.u32(), 16, "path point");
    for (std::size_t k = 0; k < n; ++k) a.path.push_back(get_vec(r));
    world.agents.push_back(std::move(a));
  }
  return world;
}

void put_episode(ByteWriter& w, const EpisodeRecord& ep) {
  w.u64(ep.episode_id);
  w.u32(ep.world_index);
  w.u8(static_cast<std::uint8_t>(ep.scenario));
  w.u8(static_cast<std::uint8_t>(ep.source));
  w.u32(static_cast<std::uint32_t>(ep.length()));
  for (const FrameObservation& f : ep.frames) {
    w.i64(f.frame_id);
    put_input(w, f.left);
    w.u8(f.right ? 1 : 0);
    if (f.right) put_input(w, *f.right);
    w.f64(f.focal_px);
    w.f64(f.baseline_m);
  }
  for (Vec2 p : ep.positions) put_vec(w, p);
  for (double h : ep.headings) w.f64(h);
  for (double t : ep.timestamps) w.f64(t);
}

EpisodeRecord get_episode(ByteReader& r, std::size_t world_count) {
  EpisodeRecord ep;
  ep.episode_id = r.u64();
  const std::size_t world_at = r.offset();
  ep.world_index = r.u32();
  if (ep.world_index >= world_count && world_count > 0) {
    throw FormatError("episode references world " + std::to_string(ep.world_index) + " of " +
                          std::to_string(world_count),
                      world_at);
  }
  const std::size_t tag_at = r.offset();
  const std::uint8_t tag = r.u8();
  if (tag > static_cast<std::uint8_t>(Scenario::kOther)) throw FormatError("unknown scenario tag", tag_at);
  ep.scenario = static_cast<Scenario>(tag);
  const std::size_t source_at = r.offset();
  const std::uint8_t source = r.u8();
  if (source > 1) throw FormatError("unknown episode source", source_at);
  ep.source = static_cast<EpisodeSource>(source);
  const std::size_t n = count(r, r.u32(), 8 + 40 + 1 + 16 + 16 + 8 + 8, "step");
  for (std::size_t i = 0; i < n; ++i) {
    FrameObservation f;
    f.frame_id = r.i64();
    f.left = get_input(r);
    const std::size_t flag_at = r.offset();
    const std::uint8_t has_right = r.u8();
    if (has_right > 1) throw FormatError("bad right-view flag", flag_at);
    if (has_right) f.right = get_input(r);
    f.focal_px = r.f64();
    f.baseline_m = r.f64();
    ep.frames.push_back(f);
  }
  for (std::size_t i = 0; i < n; ++i) ep.positions.push_back(get_vec(r));
  for (std::size_t i = 0; i < n; ++i) ep.headings.push_back(r.f64());
  for (std::size_t i = 0; i < n; ++i) ep.timestamps.push_back(r.f64());
  return ep;
}

}  // namespace

std::vector<std::uint8_t> encode_dataset(const Dataset& dataset) {
  ByteWriter w;
  w.raw(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(dataset.worlds.size()));
  for (const World& world : dataset.worlds) put_world(w, world);
  w.u64(dataset.episodes.size());
  for (const EpisodeRecord& ep : dataset.episodes) {
    ep.validate();
    put_episode(w, ep);
  }
  return w.take();
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(kMagic);
  const std::size_t version_at = r.offset();
  if (r.u32() != kVersion) throw FormatError("unsupported SWEP version", version_at);
  Dataset ds;
  const std::size_t n_worlds = count(r, r.u32(), 48, "world");
  for (std::size_t i = 0; i < n_worlds; ++i) ds.worlds.push_back(get_world(r));
  const std::size_t n_eps = count(r, r.u64(), 18, "episode");
  for (std::size_t i = 0; i < n_eps; ++i) {
    const std::size_t at = r.offset();
    EpisodeRecord ep = get_episode(r, n_worlds);
    try {
      ep.validate();
    } catch (const ValidationError& e) {
      throw FormatError(std::string("invalid episode: ") + e.what(), at);
    }
    ds.episodes.push_back(std::move(ep));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after dataset", r.offset());
  return ds;
}

void save_dataset(const std::string& path, const Dataset& dataset) { write_file_atomic(path, encode_dataset(dataset)); }

Dataset load_dataset(const std::string& path) { return decode_dataset(read_file_bytes(path)); }

}  // namespace sw
