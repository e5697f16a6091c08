#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "common/error.hpp"
#include "policy/checkpoint.hpp"
#include "policy/config.hpp"
#include "policy/loss.hpp"
#include "policy/model.hpp"
#include "policy/train.hpp"
#include "support/fixtures.hpp"
#include "tensor/gradcheck.hpp"
#include "tensor/ops.hpp"

using namespace sw;

namespace {

struct Bound {
  Tape tape;
  std::vector<Var> vars;
  explicit Bound(const PolicyModel& m) : vars(m.params().bind(tape)) {}
  Params p() const { return vars; }
};

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  return worst;
}

std::vector<Tensor> param_values(const PolicyModel& m) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < m.params().size(); ++i) out.push_back(m.params().tensor(i));
  return out;
}

}  // namespace

TEST(Config, PresetsValidateAndCarryTableValues) {
  for (const char* name : {"tiny", "toy", "desk", "full"}) EXPECT_NO_THROW(ModelConfig::preset(name).validate()) << name;
  const ModelConfig full = ModelConfig::full();
  EXPECT_EQ(full.context_n, 5u);
  EXPECT_EQ(full.horizon, 5u);
  EXPECT_EQ(full.token_dim(), 832u);
  EXPECT_EQ(full.n_track_layers, 2u);
  EXPECT_EQ(full.n_global_layers, 12u);
  EXPECT_EQ(full.n_target_layers, 4u);
  EXPECT_EQ(full.lambda_arrvd, 1.0);
  EXPECT_EQ(full.lambda_dir, 10.0);
  const ModelConfig tiny = ModelConfig::tiny();
  EXPECT_EQ(tiny.token_dim(), 8u);
  EXPECT_EQ(tiny.context_n, 2u);
  EXPECT_EQ(tiny.horizon, 2u);
  EXPECT_THROW(ModelConfig::preset("huge"), ConfigError);
}

TEST(Config, InconsistentFieldsAreConfigErrors) {
  ModelConfig c = ModelConfig::toy();
  c.heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ModelConfig::toy();
  c.lambda_dir = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ModelConfig::toy();
  c.horizon = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, JsonRoundTripAndHash) {
  ModelConfig c = ModelConfig::desk();
  c.use_depth = false;
  const ModelConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_NE(config_hash(c), config_hash(ModelConfig::desk()));
  EXPECT_THROW(config_from_json("{\"horizon\": \"five\"}"), Error);
}

TEST(EncodeTrajectory, IdenticalPositionsGiveIdenticalTokens) {
  const PolicyModel m(ModelConfig::toy(), 1);
  Bound b(m);
  const std::vector<Vec2> pos(5, Vec2{1.5, -2.0});
  const Var w = m.encode_trajectory(b.p(), pos);
  ASSERT_EQ(w.value().rows(), 5u);
  EXPECT_EQ(w.value().cols(), m.config().token_dim());
  for (std::size_t r = 1; r < 5; ++r)
    for (std::size_t c = 0; c < w.value().cols(); ++c) EXPECT_EQ(w.value().at(r, c), w.value().at(0, c));
}

TEST(EncodeTarget, DeterministicWithTokenDim) {
  const PolicyModel m(ModelConfig::toy(), 1);
  Bound b1(m), b2(m);
  const Var g1 = m.encode_target(b1.p(), {2, 1}), g2 = m.encode_target(b2.p(), {2, 1});
  EXPECT_EQ(g1.value().cols(), m.config().token_dim());
  EXPECT_EQ(max_abs_diff(g1.value(), g2.value()), 0.0);
}

TEST(GlobalAttention, SequenceLengthFollowsPatchTokenFlag) {
  for (bool patches : {true, false}) {
    ModelConfig c = ModelConfig::toy();
    c.use_patch_tokens = patches;
    const PolicyModel m(c, 2);
    const TrainingSample s = fixture::random_sample(c, 3);
    Bound b(m);
    const Var h = m.global_attention(b.p(), m.image_tokens(b.p(), s.input), m.encode_trajectory(b.p(), s.input.positions));
    const std::size_t expect = patches ? 5 * 16 + 5 : 5 + 5;
    EXPECT_EQ(h.value().rows(), expect);
    EXPECT_EQ(c.global_sequence_length(), expect);
    EXPECT_EQ(h.value().cols(), c.token_dim());
  }
}

TEST(GlobalAttention, FrameOrderMatters) {
  const ModelConfig c = ModelConfig::toy();
  PolicyModel m(c, 4);
  fixture::randomize_params(m, 5);
  const TrainingSample s = fixture::random_sample(c, 6);
  Bound b(m);
  const Var img = m.image_tokens(b.p(), s.input);
  const Var traj = m.encode_trajectory(b.p(), s.input.positions);
  // Swap the token blocks of frames 0 and 1.
  const std::size_t per = 16;
  std::vector<std::size_t> order;
  for (std::size_t f : {1, 0, 2, 3, 4})
    for (std::size_t i = 0; i < per; ++i) order.push_back(f * per + i);
  const Var swapped = gather_rows(img, order);
  const Var h1 = m.global_attention(b.p(), img, traj), h2 = m.global_attention(b.p(), swapped, traj);
  EXPECT_GT(max_abs_diff(h1.value(), h2.value()), 1e-6);
}

TEST(TargetAttention, ReturnsOneRowThatDependsOnContext) {
  const ModelConfig c = ModelConfig::toy();
  const PolicyModel m(c, 7);
  Bound b(m);
  SplitMix rng(8);
  Tensor h(Shape{10, c.token_dim()});
  for (double& v : h.values()) v = rng.normal();
  Tensor h2 = h;
  h2.values()[3] += 0.5;
  const Var g = m.encode_target(b.p(), {2, 0});
  const Var a = m.target_attention(b.p(), b.tape.constant(h), g);
  const Var a2 = m.target_attention(b.p(), b.tape.constant(h2), g);
  ASSERT_EQ(a.value().rows(), 1u);
  EXPECT_EQ(a.value().cols(), c.token_dim());
  EXPECT_GT(max_abs_diff(a.value(), a2.value()), 1e-9);
}

TEST(Predict, HorizonWaypointsProbabilityRangeAndDeterminism) {
  const ModelConfig c = ModelConfig::toy();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    PolicyModel m(c, seed);
    fixture::randomize_params(m, seed, 1.0);
    const ObservationWindow w = fixture::curve_window(5, seed);
    const PolicyOutput a = m.predict(ProceduralProvider{}, w), b = m.predict(ProceduralProvider{}, w);
    ASSERT_EQ(a.waypoints.size(), 5u);
    EXPECT_GE(a.arrival_prob, 0.0);
    EXPECT_LE(a.arrival_prob, 1.0);
    EXPECT_EQ(a.waypoints, b.waypoints);
    EXPECT_EQ(a.arrival_prob, b.arrival_prob);
    for (const Vec2& p : a.waypoints) EXPECT_TRUE(std::isfinite(p.x) && std::isfinite(p.y));
  }
}

TEST(Predict, MalformedWindowIsRejectedBeforeNumerics) {
  const PolicyModel m(ModelConfig::toy(), 1);
  ObservationWindow w = fixture::curve_window(4, 1);
  EXPECT_THROW(m.predict(ProceduralProvider{}, w), ValidationError);
  w = fixture::curve_window(5, 1);
  w.subgoal = {std::nan(""), 0};
  EXPECT_THROW(m.predict(ProceduralProvider{}, w), ValidationError);
}

TEST(Ablation, AllEightFlagCombinationsRunForwardAndBackward) {
  for (int flags = 0; flags < 8; ++flags) {
    ModelConfig c = ModelConfig::tiny();
    c.use_patch_tokens = flags & 1;
    c.use_depth = flags & 2;
    c.use_tracking = flags & 4;
    const PolicyModel m(c, 3);
    const TrainingSample s = fixture::random_sample(c, 4);
    SampleGradient g;
    ASSERT_NO_THROW(g = sample_gradient(m, s)) << "flags " << flags;
    EXPECT_TRUE(std::isfinite(g.loss));
    ASSERT_EQ(g.grads.size(), m.params().size());
    for (std::size_t i = 0; i < g.grads.size(); ++i) EXPECT_EQ(g.grads[i].shape(), m.params().tensor(i).shape());
  }
}

TEST(DirectionLoss, IdentityAndWraparound) {
  const std::vector<Vec2> gt{{1, 0}, {2, 1}};
  EXPECT_EQ(direction_loss(std::span<const Vec2>(gt), std::span<const Vec2>(gt)), 0.0);
  const double a = deg_to_rad(179.0), b = deg_to_rad(-179.0);
  const std::vector<Vec2> p1{{std::cos(a), std::sin(a)}}, g1{{std::cos(b), std::sin(b)}};
  EXPECT_NEAR(direction_loss(std::span<const Vec2>(p1), std::span<const Vec2>(g1)), 0.0349, 1e-4);
}

TEST(CompositeLoss, PerfectWaypointsAtHalfProbabilityIsLn2) {
  const ModelConfig c = ModelConfig::toy();
  const std::vector<Vec2> gt{{1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 2}};
  Tape tape;
  Tensor pred(Shape{5, 2});
  for (std::size_t k = 0; k < 5; ++k) {
    pred.at(k, 0) = gt[k].x;
    pred.at(k, 1) = gt[k].y;
  }
  const LossTerms l = composite_loss(tape.leaf(pred), tape.leaf(Tensor::matrix(1, 1, {0.5})), gt, true, c);
  EXPECT_NEAR(l.total.value()[0], std::log(2.0), 1e-12);
  const LossTerms l1 = composite_loss(tape.leaf(pred), tape.leaf(Tensor::matrix(1, 1, {1.0})), gt, true, c);
  EXPECT_NEAR(l1.total.value()[0], -std::log(1.0 - 1e-7), 1e-12);
  EXPECT_TRUE(std::isfinite(binary_cross_entropy(0.0, true)));
  EXPECT_NEAR(binary_cross_entropy(0.0, true), -std::log(1e-7), 1e-9);
}

TEST(CompositeLoss, NonNegativeOnRandomInputs) {
  const ModelConfig c = ModelConfig::toy();
  SplitMix rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    Tape tape;
    Tensor pred(Shape{5, 2});
    for (double& v : pred.values()) v = rng.uniform(-3, 3);
    std::vector<Vec2> gt;
    for (int k = 0; k < 5; ++k) gt.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
    const LossTerms l = composite_loss(tape.leaf(pred), tape.leaf(Tensor::matrix(1, 1, {rng.uniform()})), gt,
                                       rng.uniform() < 0.5, c);
    EXPECT_GE(l.total.value()[0], 0.0);
  }
}

// Composite loss w.r.t. every parameter of the minimal model, 10 seeds.
TEST(CompositeLoss, EndToEndGradientsOnMinimalModel) {
  const ModelConfig c = ModelConfig::tiny();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PolicyModel m(c, seed);
    fixture::randomize_params(m, seed + 100);
    const TrainingSample s = fixture::random_sample(c, seed + 200);
    const auto op = [&](Tape&, std::span<const Var> in) {
      const ForwardVars f = m.forward(in, s.input);
      return composite_loss(f.waypoints, f.arrival, s.gt_waypoints, s.gt_arrived, c).total;
    };
    const GradReport r = check_gradients("policy", op, param_values(m));
    EXPECT_LT(r.max_rel_error, 1e-3) << "seed " << seed;
  }
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  PolicyModel m(ModelConfig::tiny(), 1);
  const auto before = param_values(m);
  const TrainingSample s = fixture::random_sample(m.config(), 2);
  const TrainingSample* batch[] = {&s};
  AdamW opt;
  train_step(m, opt, batch, 0.0);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(max_abs_diff(before[i], m.params().tensor(i)), 0.0);
}

TEST(Train, BatchOfIdenticalSamplesEqualsSingleSample) {
  PolicyModel a(ModelConfig::tiny(), 1), b(ModelConfig::tiny(), 1);
  const TrainingSample s = fixture::random_sample(a.config(), 2);
  const TrainingSample* one[] = {&s};
  const TrainingSample* three[] = {&s, &s, &s};
  AdamW oa, ob;
  const double la = train_step(a, oa, one, 1e-3), lb = train_step(b, ob, three, 1e-3);
  EXPECT_NEAR(la, lb, 1e-12);
  for (std::size_t i = 0; i < a.params().size(); ++i)
    EXPECT_LT(max_abs_diff(a.params().tensor(i), b.params().tensor(i)), 1e-12);
}

TEST(Train, ReturnsPreStepLoss) {
  PolicyModel m(ModelConfig::tiny(), 1);
  const TrainingSample s = fixture::random_sample(m.config(), 2);
  const double before = sample_loss(m, s);
  const TrainingSample* batch[] = {&s};
  AdamW opt;
  EXPECT_DOUBLE_EQ(train_step(m, opt, batch, 1e-2), before);
  EXPECT_NE(sample_loss(m, s), before);
}

TEST(Train, MemorisesSixteenSamples) {
  const ModelConfig c = ModelConfig::tiny();
  PolicyModel m(c, 3);
  std::vector<TrainingSample> samples;
  for (std::uint64_t i = 0; i < 16; ++i) samples.push_back(fixture::random_sample(c, 50 + i));
  const double before = mean_loss(m, samples);
  TrainOptions o;
  o.steps = 200;
  o.batch_size = 16;
  o.lr = 1e-2;
  o.warmup_steps = 10;
  train(m, samples, o);
  EXPECT_LE(mean_loss(m, samples), 0.1 * before);
}

TEST(Train, ScheduleWarmsUpThenDecays) {
  TrainOptions o;
  o.steps = 100;
  o.warmup_steps = 10;
  o.lr = 1.0;
  EXPECT_LT(scheduled_lr(o, 0), scheduled_lr(o, 9));
  EXPECT_NEAR(scheduled_lr(o, 10), 1.0, 1e-9);
  EXPECT_NEAR(scheduled_lr(o, 99), o.min_lr_ratio, 1e-3);
  for (std::size_t t = 11; t < 100; ++t) EXPECT_LE(scheduled_lr(o, t), scheduled_lr(o, t - 1));
}

TEST(Train, NonFiniteLossAborts) {
  PolicyModel m(ModelConfig::tiny(), 1);
  m.params().tensor(0).values()[0] = std::nan("");
  const TrainingSample s = fixture::random_sample(m.config(), 2);
  const TrainingSample* batch[] = {&s};
  AdamW opt;
  EXPECT_THROW(train_step(m, opt, batch, 1e-3), NumericError);
}

TEST(Checkpoint, RoundTripIsBitwiseAndPredictionsMatch) {
  PolicyModel m(ModelConfig::toy(), 9);
  fixture::randomize_params(m, 10);
  const auto bytes = encode_checkpoint(m);
  const PolicyModel back = decode_checkpoint(bytes);
  EXPECT_EQ(encode_checkpoint(back), bytes);
  const ObservationWindow w = fixture::curve_window(5, 3);
  EXPECT_EQ(m.predict(ProceduralProvider{}, w).waypoints, back.predict(ProceduralProvider{}, w).waypoints);
  const auto path = std::filesystem::temp_directory_path() / ("sw_ck_" + std::to_string(::getpid()) + ".swck");
  save_checkpoint(path.string(), m);
  std::ifstream in(path, std::ios::binary);
  const std::vector<std::uint8_t> disk((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(disk, bytes);
  EXPECT_EQ(encode_checkpoint(load_checkpoint(path.string())), bytes);
  std::filesystem::remove(path);
  EXPECT_EQ(checkpoint_id(bytes).size(), 16u);
}

TEST(Checkpoint, CorruptInputIsRejected) {
  const auto bytes = encode_checkpoint(PolicyModel(ModelConfig::tiny(), 1));
  auto bad = bytes;
  bad[1] = 'Z';
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  EXPECT_THROW(decode_checkpoint(std::span(bytes).first(bytes.size() - 3)), FormatError);
  EXPECT_THROW(load_checkpoint("/nonexistent.swck"), IoError);
}
