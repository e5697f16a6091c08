#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "episodes/episode.hpp"
#include "perception/perception.hpp"
#include "tensor/gradcheck.hpp"

using namespace sw;

namespace {

FrameObservation mono_frame(std::uint64_t seed) {
  FrameObservation f;
  f.left.seed = seed;
  f.focal_px = 56.0;
  return f;
}

FrameObservation stereo_frame(std::uint64_t seed) {
  FrameObservation f = mono_frame(seed);
  f.right = ProviderInput{seed + 1, {}, 0.0};
  f.baseline_m = 0.12;
  return f;
}

// Provider whose depth is a fixed ground-truth map and whose disparity is
// derived from it with the frame's own f and B.
class GroundTruthProvider final : public FeatureProvider {
 public:
  explicit GroundTruthProvider(DepthMap z) : z_(std::move(z)) {}
  FeatureGrid appearance(const FrameObservation& f, std::size_t h, std::size_t w, std::size_t d) const override {
    return ProceduralProvider{}.appearance(f, h, w, d);
  }
  DepthMap monocular_depth(const FrameObservation&, std::size_t, std::size_t) const override { return z_; }
  DisparityMap disparity(const FrameObservation& f, std::size_t, std::size_t) const override {
    DisparityMap d{z_.grid_h, z_.grid_w, {}};
    for (double z : z_.z) d.d.push_back(f.focal_px * f.baseline_m / z);
    return d;
  }
  TrackSet tracks(std::span<const FrameObservation> window, std::size_t h, std::size_t w,
                  std::size_t count) const override {
    return ProceduralProvider{}.tracks(window, h, w, count);
  }

 private:
  DepthMap z_;
};

}  // namespace

TEST(DisparityToDepth, ConstantDisparityGivesUnitDepth) {
  const DisparityMap d{2, 3, std::vector<double>(6, 70.0)};
  const DepthMap z = disparity_to_depth(d, 700.0, 0.1);
  for (double v : z.z) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(DisparityToDepth, RoundTripRecoversDisparityProperty) {
  SplitMix rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const double f = rng.uniform(20.0, 1000.0), b = rng.uniform(0.05, 0.5);
    DisparityMap d{4, 5, {}};
    for (int i = 0; i < 20; ++i) d.d.push_back(rng.uniform(0.01, 200.0));
    const DepthMap z = disparity_to_depth(d, f, b);
    for (std::size_t i = 0; i < d.d.size(); ++i) EXPECT_NEAR(f * b / z.z[i], d.d[i], 1e-9 * d.d[i]);
  }
}

TEST(DisparityToDepth, ZeroDisparityNamesThePatch) {
  DisparityMap d{3, 4, std::vector<double>(12, 5.0)};
  d.d[1 * 4 + 2] = 0.0;
  try {
    disparity_to_depth(d, 56.0, 0.12);
    FAIL() << "expected DegenerateDisparityError";
  } catch (const DegenerateDisparityError& e) {
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.col(), 2u);
  }
}

TEST(PatchGrid, FullResolutionGivesTwentyFivePatches) {
  EXPECT_EQ(patch_grid_extent(350, 14), 25u);
  const PerceptionConfig full = PerceptionConfig::full();
  EXPECT_EQ(full.grid_h, 25u);
  EXPECT_EQ(full.grid_w, 25u);
  EXPECT_EQ(full.image_h(), 350u);
  EXPECT_THROW(patch_grid_extent(351, 14), ConfigError);
}

TEST(PatchGrid, FullTokenDimIs832) {
  const PerceptionConfig full = PerceptionConfig::full();
  EXPECT_EQ(full.appearance_dim, 768u);
  EXPECT_EQ(full.depth_dim, 64u);
  EXPECT_EQ(full.token_dim(), 832u);
}

TEST(Appearance, DeskGridShapeAndDeterminism) {
  const ProceduralProvider p;
  const FeatureGrid a = p.appearance(mono_frame(9), 8, 8, 32);
  EXPECT_EQ(a.values.size(), 64u * 32u);
  EXPECT_EQ(a, p.appearance(mono_frame(9), 8, 8, 32));
  EXPECT_NE(a, p.appearance(mono_frame(10), 8, 8, 32));
}

TEST(DepthSource, MonocularIsPassthrough) {
  const ProceduralProvider p;
  const FrameObservation f = mono_frame(3);
  EXPECT_EQ(depth_source(p, DepthMode::kMonocular, f, 4, 4), p.monocular_depth(f, 4, 4));
}

TEST(DepthSource, StereoWithoutRightViewIsConfigError) {
  EXPECT_THROW(depth_source(ProceduralProvider{}, DepthMode::kStereo, mono_frame(3), 4, 4), ConfigError);
}

TEST(DepthSource, StereoRecoversGroundTruthDepth) {
  SplitMix rng(5);
  DepthMap truth{3, 3, {}};
  for (int i = 0; i < 9; ++i) truth.z.push_back(rng.uniform(0.5, 30.0));
  const GroundTruthProvider p(truth);
  const DepthMap stereo = depth_source(p, DepthMode::kStereo, stereo_frame(1), 3, 3);
  const DepthMap mono = depth_source(p, DepthMode::kMonocular, stereo_frame(1), 3, 3);
  for (std::size_t i = 0; i < truth.z.size(); ++i) {
    EXPECT_NEAR(stereo.z[i], truth.z[i], 1e-9);
    EXPECT_NEAR(stereo.z[i], mono.z[i], 1e-9);
  }
}

TEST(DepthSource, SceneProviderModesAgree) {
  const auto world = std::make_shared<World>(generate_world(12));
  const SceneProvider p(world);
  const auto frames = frames_for_path(3, {{20, 20}}, {0.7}, {0.0});
  const DepthMap mono = depth_source(p, DepthMode::kMonocular, frames[0], 8, 8);
  const DepthMap stereo = depth_source(p, DepthMode::kStereo, frames[0], 8, 8);
  for (std::size_t i = 0; i < mono.z.size(); ++i) EXPECT_NEAR(mono.z[i], stereo.z[i], 1e-9 * mono.z[i]);
}

TEST(EncodeDepth, ConstantDepthGivesIdenticalEmbeddings) {
  ParamStore store;
  SplitMix rng(2);
  const DepthEncoder enc = make_depth_encoder(store, "depth", 8, rng);
  Tape tape;
  const auto p = store.bind(tape);
  const Var z = encode_depth(p, enc, DepthMap{3, 3, std::vector<double>(9, 4.2)});
  ASSERT_EQ(z.value().rows(), 9u);
  ASSERT_EQ(z.value().cols(), 8u);
  for (std::size_t r = 1; r < 9; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(z.value().at(r, c), z.value().at(0, c));
}

TEST(EncodeDepth, FullDepthDimIs64) {
  ParamStore store;
  SplitMix rng(2);
  const DepthEncoder enc = make_depth_encoder(store, "depth", PerceptionConfig::full().depth_dim, rng);
  Tape tape;
  const auto p = store.bind(tape);
  EXPECT_EQ(encode_depth(p, enc, DepthMap{1, 1, {3.0}}).value().cols(), 64u);
}

TEST(EncodeDepth, NonPositiveDepthIsRejected) {
  EXPECT_THROW(depth_features(DepthMap{1, 2, {1.0, 0.0}}), ValidationError);
  EXPECT_THROW(depth_features(DepthMap{1, 2, {1.0, -2.0}}), ValidationError);
}

TEST(EncodeDepth, GradientsMatchFiniteDifferences) {
  ParamStore store;
  SplitMix rng(8);
  const DepthEncoder enc = make_depth_encoder(store, "depth", 4, rng);
  const DepthMap depth{2, 2, {0.7, 2.0, 9.0, 25.0}};
  std::vector<Tensor> inputs;
  for (std::size_t i = 0; i < store.size(); ++i) inputs.push_back(store.tensor(i));
  const GradReport r = check_gradients(
      "encode_depth", [&](Tape&, std::span<const Var> in) { return encode_depth(in, enc, depth); }, inputs);
  EXPECT_TRUE(r.passed()) << r.max_rel_error;
}

TEST(AssembleTokens, DepthOffZeroesTrailingEntries) {
  const ProceduralProvider p;
  const FeatureGrid x = p.appearance(mono_frame(1), 3, 3, 5);
  const FeatureGrid z = p.appearance(mono_frame(2), 3, 3, 4);
  const PatchTokenGrid off = assemble_tokens(x, z, false);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 3; ++k) {
      const auto t = off.token(j, k);
      for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(t[c], x.at(j, k)[c]);
      for (std::size_t c = 5; c < 9; ++c) EXPECT_EQ(t[c], 0.0);
    }
}

TEST(AssembleTokens, TokenDependsOnlyOnItsPatch) {
  const ProceduralProvider p;
  const FeatureGrid x = p.appearance(mono_frame(1), 3, 3, 5);
  const FeatureGrid z = p.appearance(mono_frame(2), 3, 3, 4);
  FeatureGrid x2 = x;
  x2.values[(2 * 3 + 2) * 5 + 1] += 10.0;
  const PatchTokenGrid a = assemble_tokens(x, z), b = assemble_tokens(x2, z);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 3; ++k) {
      const auto ta = a.token(j, k), tb = b.token(j, k);
      const bool same = std::equal(ta.begin(), ta.end(), tb.begin());
      EXPECT_EQ(same, !(j == 2 && k == 2));
    }
}

TEST(AssembleTokens, GridMismatchIsDimensionError) {
  const ProceduralProvider p;
  EXPECT_THROW(assemble_tokens(p.appearance(mono_frame(1), 3, 3, 5), p.appearance(mono_frame(1), 3, 2, 4)),
               DimensionError);
}

TEST(Tracks, StaticSceneTracksAreConstant) {
  const ProceduralProvider p;
  const std::vector<FrameObservation> window{mono_frame(1), mono_frame(2), mono_frame(3)};
  const TrackSet t = p.tracks(window, 8, 8, 16);
  for (const auto& track : t.tracks)
    for (const TrackPoint& pt : track) EXPECT_EQ(pt, track.front());
}

TEST(Tracks, HorizontalFlowAdvancesOnePatchPerFrame) {
  const FlowTrackProvider p(std::make_shared<ProceduralProvider>(), [](std::size_t, Vec2) { return Vec2{1.0, 0.0}; });
  std::vector<FrameObservation> window;
  for (int i = 0; i < 5; ++i) window.push_back(mono_frame(static_cast<std::uint64_t>(i)));
  const TrackSet t = p.tracks(window, 8, 8, 64);
  for (const auto& track : t.tracks)
    for (std::size_t i = 1; i < track.size(); ++i) {
      EXPECT_DOUBLE_EQ(track[i].position.x - track[i - 1].position.x, 1.0);
      EXPECT_DOUBLE_EQ(track[i].position.y, track[0].position.y);
    }
}

TEST(Tracks, SixtyFourTracksOverFiveFrames) {
  std::vector<FrameObservation> window;
  for (int i = 0; i < 5; ++i) window.push_back(mono_frame(static_cast<std::uint64_t>(i)));
  const WindowPerception wp = perceive(ProceduralProvider{}, PerceptionConfig::desk(), window);
  EXPECT_EQ(wp.tracks.size(), 64u);
  for (const auto& track : wp.tracks.tracks) EXPECT_EQ(track.size(), 5u);
  EXPECT_EQ(wp.appearance.size(), 5u);
  EXPECT_EQ(wp.depth.size(), 5u);
}

TEST(Tracks, SceneTracksFollowTheWorldAsTheRobotTurns) {
  const auto world = std::make_shared<World>(generate_world(4, {.agents = 0}));
  const SceneProvider p(world);
  const auto frames = frames_for_path(1, {{20, 20}, {20, 20}}, {0.0, 0.2}, {0.0, 1.0});
  const TrackSet t = p.tracks(frames, 8, 8, 16);
  t.validate();
  // A left turn moves visible scene points to the right in the image.
  int moved_right = 0, visible = 0;
  for (const auto& track : t.tracks) {
    if (!track[0].visible || !track[1].visible) continue;
    ++visible;
    if (track[1].position.x > track[0].position.x) ++moved_right;
  }
  ASSERT_GT(visible, 0);
  EXPECT_EQ(moved_right, visible);
}

TEST(FeatureFile, RoundTripIsBitwise) {
  const ProceduralProvider p;
  FeatureFile file{2, 3, 4, {p.appearance(mono_frame(1), 2, 3, 4), p.appearance(mono_frame(2), 2, 3, 4)}};
  const auto bytes = encode_feature_file(file);
  EXPECT_EQ(decode_feature_file(bytes), file);
  EXPECT_EQ(encode_feature_file(decode_feature_file(bytes)), bytes);
  const auto path = std::filesystem::temp_directory_path() / "sw_test_features.swft";
  save_feature_file(path.string(), file);
  EXPECT_EQ(load_feature_file(path.string()), file);
  std::filesystem::remove(path);
}

TEST(FeatureFile, CorruptMagicAndTruncationAreRejected) {
  FeatureFile file{1, 1, 2, {FeatureGrid{1, 1, 2, {1.0, 2.0}}}};
  auto bytes = encode_feature_file(file);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_feature_file(bad), FormatError);
  bytes.pop_back();
  EXPECT_THROW(decode_feature_file(bytes), FormatError);
}

TEST(FileProvider, ServesStoredAppearanceByFrameId) {
  const ProceduralProvider p;
  FeatureFile file{2, 2, 3, {p.appearance(mono_frame(7), 2, 2, 3), p.appearance(mono_frame(8), 2, 2, 3)}};
  const FileProvider fp(file, std::nullopt, std::make_shared<ProceduralProvider>());
  FrameObservation f = mono_frame(99);
  f.frame_id = 1;
  EXPECT_EQ(fp.appearance(f, 2, 2, 3), file.frames[1]);
  f.frame_id = 2;
  EXPECT_THROW(fp.appearance(f, 2, 2, 3), ValidationError);
  EXPECT_THROW(fp.appearance(mono_frame(0), 2, 2, 4), DimensionError);
}
