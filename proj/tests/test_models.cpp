#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "gearfd/error.hpp"
#include "gearfd/eval.hpp"
#include "gearfd/models.hpp"
#include "gearfd/nn/weights.hpp"

using namespace gearfd;

namespace {

const DomainData& domain_a() {
  static const DomainData data = [] {
    DatasetOptions o;
    o.counts.train = 48;
    o.counts.test = 16;
    return make_region_datasets('A', o, 5);
  }();
  return data;
}

TrainingRecipe small_recipe(int iterations, int batch, std::uint64_t seed = 1) {
  TrainingRecipe r;
  r.iterations = iterations;
  r.batch = batch;
  r.adam.drop_at = iterations;
  r.seed = seed;
  return r;
}

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return std::accumulate(v.begin() + begin, v.begin() + end, 0.0) / static_cast<double>(end - begin);
}

int flatten_before_first_linear(const Network& net, nn::Shape3 in) {
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net[i].kind() == nn::LayerKind::linear) return in[0] * in[1] * in[2];
    in = net[i].output_shape(in);
  }
  return -1;
}

}  // namespace

TEST(Architecture, ClassifierFlattensTo48x24x8) {
  const Network net = build_classifier();
  EXPECT_EQ(flatten_before_first_linear(net, {1, 95, 31}), 48 * 24 * 8);
  EXPECT_EQ(net.output_shape({1, 95, 31}), (nn::Shape3{2, 1, 1}));
}

TEST(Architecture, RegressorHasOneOutput) {
  const Network net = build_regressor(30.0);
  EXPECT_EQ(net.output_shape({1, 95, 31}), (nn::Shape3{1, 1, 1}));
  EXPECT_THROW(build_regressor(0.0), PreconditionError);
}

TEST(Architecture, AutoencoderPreservesShape) {
  for (auto [r, p] : std::vector<std::pair<int, int>>{{95, 31}, {61, 23}, {40, 17}, {31, 31}, {12, 5}}) {
    GearGeometry g;
    g.ring_teeth = r;
    g.planet_teeth = p;
    Network net = build_autoencoder(g);
    EXPECT_EQ(net.output_shape({1, r, p}), (nn::Shape3{1, r, p})) << r << "x" << p;
  }
}

TEST(Architecture, AutoencoderLatentIs128) {
  const Network net = build_autoencoder();
  nn::Shape3 s{1, 95, 31};
  bool seen = false;
  for (std::size_t i = 0; i < net.size() && !seen; ++i) {
    s = net[i].output_shape(s);
    if (net[i].kind() == nn::LayerKind::linear) {
      EXPECT_EQ(s, (nn::Shape3{128, 1, 1}));
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Inference, ClassifierProbabilitiesSumToOne) {
  Network net = build_classifier();
  net.init(3);
  const auto& maps = domain_a().test_normal;
  const auto p = fault_probability(net, maps);
  const auto labels = classify(net, maps);
  ASSERT_EQ(p.size(), maps.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_GE(p[i], 0.0);
    EXPECT_LE(p[i], 1.0);
    EXPECT_EQ(labels[i], p[i] > 0.5 ? 1 : 0);
  }
}

TEST(Inference, ReconstructionKeepsShape) {
  Network net = build_autoencoder();
  net.init(4);
  const auto rec = reconstruct(net, std::span(domain_a().test_normal).first(3));
  for (const HDMap& m : rec) {
    EXPECT_EQ(m.rows(), 95);
    EXPECT_EQ(m.cols(), 31);
  }
}

TEST(Threshold, ThreeSigma) {
  const std::vector<double> equal{0.7, 0.7, 0.7};
  const auto t = three_sigma_threshold(equal);
  EXPECT_DOUBLE_EQ(t.threshold, 0.7);
  EXPECT_FALSE(t.is_faulty(0.7));

  const std::vector<double> ones{1, 1, 1, 1};
  const auto u = three_sigma_threshold(ones);
  EXPECT_DOUBLE_EQ(u.threshold, 1.0);
  EXPECT_TRUE(u.is_faulty(2.0));

  const std::vector<double> spread{1, 3};
  EXPECT_DOUBLE_EQ(three_sigma_threshold(spread).threshold, 2.0 + 3.0 * 1.0);
  EXPECT_THROW(three_sigma_threshold(std::vector<double>{}), PreconditionError);
}

TEST(Training, RecipeDefaults) {
  const TrainingRecipe desk = TrainingRecipe::desk();
  EXPECT_EQ(desk.iterations, 600);
  EXPECT_EQ(desk.batch, 64);
  EXPECT_EQ(desk.adam.drop_at, 400);
  const TrainingRecipe full = TrainingRecipe::full();
  EXPECT_EQ(full.iterations, 3000);
  EXPECT_EQ(full.batch, 128);
  EXPECT_EQ(full.adam.drop_at, 2000);
  EXPECT_DOUBLE_EQ(full.adam.lr, 1e-3);
  EXPECT_DOUBLE_EQ(full.adam.lr_after_drop, 1e-4);
  TrainingRecipe odd = desk;
  odd.batch = 7;
  EXPECT_THROW(odd.validate(), PreconditionError);
}

TEST(Training, RefusesFaultyMapsForNormalOnlyObjectives) {
  std::vector<HDMap> mixed = domain_a().train_normal;
  mixed.push_back(domain_a().train_fault.front());
  const SynthesisConfig synth;
  EXPECT_THROW(train_autoencoder(mixed, small_recipe(1, 2)), PreconditionError);
  EXPECT_THROW(train_classifier(mixed, synth, {}, small_recipe(1, 2)), PreconditionError);
  EXPECT_THROW(train_regressor(mixed, synth, {}, small_recipe(1, 2)), PreconditionError);
  EXPECT_THROW(train_autoencoder({}, small_recipe(1, 2)), PreconditionError);
}

TEST(Training, SeedDeterminism) {
  const SynthesisConfig synth;
  auto a = train_classifier(domain_a().train_normal, synth, {}, small_recipe(3, 4, 9));
  auto b = train_classifier(domain_a().train_normal, synth, {}, small_recipe(3, 4, 9));
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(nn::encode_network(a.net), nn::encode_network(b.net));
  auto c = train_classifier(domain_a().train_normal, synth, {}, small_recipe(3, 4, 10));
  EXPECT_NE(nn::encode_network(a.net), nn::encode_network(c.net));
}

TEST(Training, AutoencoderFitsIdenticalMaps) {
  const std::vector<HDMap> same(8, domain_a().train_normal.front());
  const auto r = train_autoencoder(same, small_recipe(300, 4));
  EXPECT_LT(r.loss.back(), 1e-3 * r.loss.front());
}

TEST(Training, FourObjectivesHalveTheirLoss) {
  const auto& d = domain_a();
  Network ae = train_autoencoder(d.train_normal, small_recipe(120, 8)).net;
  const auto pool = extract_fault_signatures(d.train_fault, ae);
  ASSERT_FALSE(pool.empty());
  for (SynthesisMethod m : {SynthesisMethod::scaled_cutpaste, SynthesisMethod::faultpaste}) {
    SynthesisConfig synth;
    synth.method = m;
    const auto clf = train_classifier(d.train_normal, synth, pool, small_recipe(150, 16));
    const auto reg = train_regressor(d.train_normal, synth, pool, small_recipe(150, 16));
    EXPECT_LT(mean_of(clf.loss, 100, 150), 0.5 * mean_of(clf.loss, 0, 10)) << to_string(m);
    EXPECT_LT(mean_of(reg.loss, 100, 150), 0.5 * mean_of(reg.loss, 0, 10)) << to_string(m);
  }
}

TEST(Signatures, ExactReconstructionIsDegenerate) {
  const HDMap& x = domain_a().train_normal.front();
  EXPECT_THROW(fault_signature(x, x), DegenerateSignatureError);
}

TEST(Signatures, NonnegativeWithUnitPeak) {
  Network ae = build_autoencoder();
  ae.init(2);
  for (const HDMap& x : std::span(domain_a().train_fault).first(4)) {
    const FaultSignature s = extract_fault_signature(x, ae);
    EXPECT_GE(*std::min_element(s.grid.values.begin(), s.grid.values.end()), 0.0);
    EXPECT_DOUBLE_EQ(*std::max_element(s.grid.values.begin(), s.grid.values.end()), 1.0);
  }
}
