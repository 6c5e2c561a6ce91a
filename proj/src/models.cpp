#include "gearfd/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "gearfd/error.hpp"
#include "gearfd/rng.hpp"

namespace gearfd {

namespace {

using nn::Tensor;

constexpr int kInferenceChunk = 32;

enum StreamTag : std::uint64_t { kInit = 1, kDraw = 2, kSynth = 3 };

void check_geometry(const GearGeometry& g) {
  g.validate();
  if (g.ring_teeth < 5 || g.planet_teeth < 5) throw PreconditionError("maps must be at least 5 x 5");
}

void add_lenet_trunk(Network& net, const GearGeometry& g) {
  check_geometry(g);
  net.add<nn::Conv2d<float>>(1, 32, 5, 1, 2);
  net.add<nn::ReLU<float>>();
  net.add<nn::MaxPool2d<float>>(3, 2, 1);
  net.add<nn::Conv2d<float>>(32, 48, 5, 1, 2);
  net.add<nn::ReLU<float>>();
  net.add<nn::MaxPool2d<float>>(3, 2, 1);
  const nn::Shape3 s = net.output_shape({1, g.ring_teeth, g.planet_teeth});
  net.add<nn::Linear<float>>(s[0] * s[1] * s[2], 100);
  net.add<nn::ReLU<float>>();
  net.add<nn::Linear<float>>(100, 100);
  net.add<nn::ReLU<float>>();
}

void require_normals(std::span<const HDMap> maps, const char* what) {
  if (maps.empty()) throw PreconditionError(std::string(what) + ": no training maps");
  for (const HDMap& m : maps)
    if (m.provenance.health != HealthLevel::normal)
      throw PreconditionError(std::string(what) + ": training maps must all be normal");
}

const GearGeometry& common_geometry(std::span<const HDMap> maps) {
  const GearGeometry& g = maps.front().geometry;
  for (const HDMap& m : maps)
    if (m.geometry.ring_teeth != g.ring_teeth || m.geometry.planet_teeth != g.planet_teeth)
      throw PreconditionError("maps have different grid shapes");
  return g;
}

void copy_map(const HDMap& m, float* dst) {
  for (std::size_t i = 0; i < m.values.size(); ++i) dst[i] = static_cast<float>(m.values[i]);
}

// Draws the batch, returns the loss and its gradient with respect to the network output.
using StepFn = std::function<nn::LossResult<float>(Network&, Rng& draw, Rng& synth)>;

TrainingResult run_training(Network net, const TrainingRecipe& recipe, const StepFn& step) {
  recipe.validate();
  net.init(derive_seed(recipe.seed, {kInit}));
  net[0].set_input_grad(false);
  Rng draw(derive_seed(recipe.seed, {kDraw}));
  Rng synth(derive_seed(recipe.seed, {kSynth}));
  nn::Adam<float> opt(net.params(), recipe.adam);
  TrainingResult result;
  result.loss.reserve(recipe.iterations);
  for (int it = 0; it < recipe.iterations; ++it) {
    net.zero_grad();
    nn::LossResult<float> l = step(net, draw, synth);
    if (!std::isfinite(l.loss)) throw NumericError("non-finite training loss at iteration " + std::to_string(it + 1));
    net.backward(l.grad);
    opt.step();
    result.loss.push_back(l.loss);
  }
  result.net = std::move(net);
  return result;
}

// batch/2 indices drawn with replacement.
std::vector<std::size_t> draw_indices(std::size_t pool, int count, Rng& rng) {
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool) - 1));
  return idx;
}

template <typename Fn>
void for_chunks(std::span<const HDMap> maps, Fn&& fn) {
  for (std::size_t b = 0; b < maps.size(); b += kInferenceChunk) {
    const std::size_t n = std::min<std::size_t>(kInferenceChunk, maps.size() - b);
    fn(b, to_tensor(maps.subspan(b, n)));
  }
}

}  // namespace

TrainingRecipe TrainingRecipe::full() {
  TrainingRecipe r;
  r.iterations = 3000;
  r.batch = 128;
  r.adam.drop_at = 2000;
  return r;
}

TrainingRecipe TrainingRecipe::desk() { return {}; }

void TrainingRecipe::validate() const {
  if (iterations < 1) throw PreconditionError("recipe: iterations must be positive");
  if (batch < 2 || batch % 2 != 0) throw PreconditionError("recipe: batch must be even and at least 2");
  if (!(adam.lr > 0) || !(adam.lr_after_drop > 0)) throw PreconditionError("recipe: learning rates must be positive");
}

Network build_classifier(const GearGeometry& geometry) {
  Network net;
  add_lenet_trunk(net, geometry);
  net.add<nn::Linear<float>>(100, 2);
  return net;
}

Network build_regressor(double output_scale, const GearGeometry& geometry) {
  if (!(output_scale > 0) || !std::isfinite(output_scale))
    throw PreconditionError("regressor output scale must be positive");
  Network net;
  add_lenet_trunk(net, geometry);
  net.add<nn::Linear<float>>(100, 1);
  net.add<nn::Scale<float>>(output_scale);
  return net;
}

Network build_autoencoder(const GearGeometry& geometry) {
  check_geometry(geometry);
  Network net;
  int ch = 1;
  for (int out : {16, 32, 64}) {
    net.add<nn::Conv2d<float>>(ch, out, 3, 1, 2);
    net.add<nn::BatchNorm<float>>(out);
    net.add<nn::ELU<float>>();
    net.add<nn::MaxPool2d<float>>(2, 2, 0);
    ch = out;
  }
  const nn::Shape3 enc = net.output_shape({1, geometry.ring_teeth, geometry.planet_teeth});
  // Decoder seed grid: the smallest whose three upsamplings cover the input.
  const auto seed_dim = [](int n) {
    int d = 1;
    while (8 * d + 6 < n) ++d;  // 12 x 4 -> 24 x 8 -> 51 x 19 -> 102 x 38 for the default grid
    return d;
  };
  const int sh = seed_dim(geometry.ring_teeth), sw = seed_dim(geometry.planet_teeth);
  net.add<nn::Linear<float>>(enc[0] * enc[1] * enc[2], 128);
  net.add<nn::BatchNorm<float>>(128);
  net.add<nn::ELU<float>>();
  net.add<nn::Linear<float>>(128, 64 * sh * sw);
  net.add<nn::BatchNorm<float>>(64 * sh * sw);
  net.add<nn::ELU<float>>();
  net.add<nn::Reshape<float>>(64, sh, sw);
  net.add<nn::ConvTranspose2d<float>>(64, 64, 4, 2, 1);
  net.add<nn::BatchNorm<float>>(64);
  net.add<nn::ELU<float>>();
  net.add<nn::ConvTranspose2d<float>>(64, 32, 5, 2, 0);
  net.add<nn::BatchNorm<float>>(32);
  net.add<nn::ELU<float>>();
  net.add<nn::ConvTranspose2d<float>>(32, 1, 4, 2, 1);
  const nn::Shape3 dec = net.output_shape({1, geometry.ring_teeth, geometry.planet_teeth});
  net.add<nn::Crop<float>>(geometry.ring_teeth, geometry.planet_teeth, (dec[1] - geometry.ring_teeth) / 2,
                           (dec[2] - geometry.planet_teeth) / 2);
  return net;
}

Tensor<float> to_tensor(std::span<const HDMap* const> maps) {
  if (maps.empty()) return {};
  const GearGeometry& g = maps.front()->geometry;
  Tensor<float> t(static_cast<int>(maps.size()), 1, g.ring_teeth, g.planet_teeth);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const HDMap& m = *maps[i];
    if (m.rows() != g.ring_teeth || m.cols() != g.planet_teeth || m.values.size() != t.sample_size())
      throw PreconditionError("maps have different grid shapes");
    copy_map(m, t.sample(static_cast<int>(i)));
  }
  return t;
}

Tensor<float> to_tensor(std::span<const HDMap> maps) {
  std::vector<const HDMap*> ptrs(maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) ptrs[i] = &maps[i];
  return to_tensor(std::span<const HDMap* const>(ptrs));
}

TrainingResult train_autoencoder(std::span<const HDMap> normals, const TrainingRecipe& recipe) {
  require_normals(normals, "autoencoder");
  const GearGeometry g = common_geometry(normals);
  return run_training(build_autoencoder(g), recipe, [&](Network& net, Rng& draw, Rng&) {
    std::vector<const HDMap*> batch;
    for (std::size_t i : draw_indices(normals.size(), recipe.batch, draw)) batch.push_back(&normals[i]);
    const Tensor<float> x = to_tensor(std::span<const HDMap* const>(batch));
    return nn::mse(net.forward(x, true), x);
  });
}

TrainingResult train_classifier(std::span<const HDMap> normals, const SynthesisConfig& synthesis,
                                std::span<const FaultSignature> pool, const TrainingRecipe& recipe) {
  require_normals(normals, "classifier");
  synthesis.validate();
  const GearGeometry g = common_geometry(normals);
  return run_training(build_classifier(g), recipe, [&](Network& net, Rng& draw, Rng& synth) {
    const int half = recipe.batch / 2;
    std::vector<HDMap> batch;
    batch.reserve(recipe.batch);
    for (std::size_t i : draw_indices(normals.size(), half, draw)) batch.push_back(normals[i]);
    for (int i = 0; i < half; ++i) batch.push_back(synthesize(batch[i], synthesis, pool, synth).map);
    std::vector<int> labels(recipe.batch, 0);
    std::fill(labels.begin() + half, labels.end(), 1);
    return nn::softmax_cross_entropy(net.forward(to_tensor(batch), true), std::span<const int>(labels));
  });
}

TrainingResult train_regressor(std::span<const HDMap> normals, const SynthesisConfig& synthesis,
                               std::span<const FaultSignature> pool, const TrainingRecipe& recipe) {
  require_normals(normals, "regressor");
  synthesis.validate();
  const GearGeometry g = common_geometry(normals);
  const double amax = synthesis.method == SynthesisMethod::faultpaste ? synthesis.max_faultpaste_scale
                                                                      : synthesis.max_cutpaste_scale;
  return run_training(build_regressor(std::max(amax, 1.0), g), recipe, [&](Network& net, Rng& draw, Rng& synth) {
    const int half = recipe.batch / 2;
    std::vector<HDMap> batch;
    batch.reserve(recipe.batch);
    Tensor<float> target(recipe.batch, 1, 1, 1);
    for (std::size_t i : draw_indices(normals.size(), half, draw)) batch.push_back(normals[i]);
    for (int i = 0; i < half; ++i) {
      Synthesized s = synthesize(batch[i], synthesis, pool, synth);
      target.data[half + i] = static_cast<float>(s.scale);
      batch.push_back(std::move(s.map));
    }
    return nn::mse(net.forward(to_tensor(batch), true), target);
  });
}

TrainingResult train_supervised_classifier(std::span<const HDMap> normals, std::span<const HDMap> faults,
                                           const TrainingRecipe& recipe) {
  if (normals.empty() || faults.empty()) throw PreconditionError("baseline: both classes are required");
  for (const HDMap& m : normals)
    if (m.provenance.health != HealthLevel::normal) throw PreconditionError("baseline: normal set holds a faulty map");
  for (const HDMap& m : faults)
    if (m.provenance.health == HealthLevel::normal) throw PreconditionError("baseline: fault set holds a normal map");
  const GearGeometry g = common_geometry(normals);
  return run_training(build_classifier(g), recipe, [&](Network& net, Rng& draw, Rng&) {
    const int half = recipe.batch / 2;
    std::vector<const HDMap*> batch;
    for (std::size_t i : draw_indices(normals.size(), half, draw)) batch.push_back(&normals[i]);
    for (std::size_t i : draw_indices(faults.size(), half, draw)) batch.push_back(&faults[i]);
    std::vector<int> labels(recipe.batch, 0);
    std::fill(labels.begin() + half, labels.end(), 1);
    return nn::softmax_cross_entropy(net.forward(to_tensor(std::span<const HDMap* const>(batch)), true),
                                     std::span<const int>(labels));
  });
}

std::vector<double> fault_probability(Network& net, std::span<const HDMap> maps) {
  std::vector<double> out(maps.size());
  for_chunks(maps, [&](std::size_t b, const Tensor<float>& x) {
    const Tensor<float> p = nn::softmax(net.forward(x, false));
    if (p.c * p.h * p.w != 2) throw PreconditionError("classifier must have two outputs");
    for (int i = 0; i < p.n; ++i) out[b + i] = p.sample(i)[1];
  });
  return out;
}

std::vector<int> classify(Network& net, std::span<const HDMap> maps) {
  std::vector<int> out(maps.size());
  for_chunks(maps, [&](std::size_t b, const Tensor<float>& x) {
    const Tensor<float> z = net.forward(x, false);
    if (z.c * z.h * z.w != 2) throw PreconditionError("classifier must have two outputs");
    for (int i = 0; i < z.n; ++i) out[b + i] = z.sample(i)[1] > z.sample(i)[0] ? 1 : 0;
  });
  return out;
}

std::vector<double> regress(Network& net, std::span<const HDMap> maps) {
  std::vector<double> out(maps.size());
  for_chunks(maps, [&](std::size_t b, const Tensor<float>& x) {
    const Tensor<float> y = net.forward(x, false);
    if (y.c * y.h * y.w != 1) throw PreconditionError("regressor must have one output");
    for (int i = 0; i < y.n; ++i) out[b + i] = y.data[i];
  });
  return out;
}

std::vector<HDMap> reconstruct(Network& autoencoder, std::span<const HDMap> maps) {
  std::vector<HDMap> out(maps.begin(), maps.end());
  for_chunks(maps, [&](std::size_t b, const Tensor<float>& x) {
    const Tensor<float> y = autoencoder.forward(x, false);
    if (!y.same_shape(x)) throw PreconditionError("autoencoder output shape differs from its input");
    for (int i = 0; i < y.n; ++i) {
      auto& v = out[b + i].values;
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = y.sample(i)[k];
    }
  });
  return out;
}

std::vector<double> reconstruction_errors(Network& autoencoder, std::span<const HDMap> maps) {
  const std::vector<HDMap> rec = reconstruct(autoencoder, maps);
  std::vector<double> err(maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    double s = 0;
    for (std::size_t k = 0; k < maps[i].values.size(); ++k) {
      const double d = maps[i].values[k] - rec[i].values[k];
      s += d * d;
    }
    err[i] = s / static_cast<double>(maps[i].values.size());
  }
  return err;
}

AnomalyThreshold three_sigma_threshold(std::span<const double> errors) {
  if (errors.empty()) throw PreconditionError("threshold needs at least one error value");
  AnomalyThreshold t;
  for (double e : errors) t.mean += e;
  t.mean /= static_cast<double>(errors.size());
  double ss = 0;
  for (double e : errors) ss += (e - t.mean) * (e - t.mean);
  t.std = std::sqrt(ss / static_cast<double>(errors.size()));
  t.threshold = t.mean + 3.0 * t.std;
  return t;
}

AnomalyThreshold ad_threshold(Network& autoencoder, std::span<const HDMap> normals) {
  require_normals(normals, "anomaly threshold");
  const std::vector<double> err = reconstruction_errors(autoencoder, normals);
  return three_sigma_threshold(err);
}

FaultSignature extract_fault_signature(const HDMap& faulty, Network& autoencoder) {
  const std::vector<HDMap> rec = reconstruct(autoencoder, std::span<const HDMap>(&faulty, 1));
  FaultSignature s = fault_signature(faulty, rec.front());
  s.source_domain = faulty.provenance.domain;
  s.source_sample = faulty.provenance.record_seed;
  return s;
}

std::vector<FaultSignature> extract_fault_signatures(std::span<const HDMap> faulty, Network& autoencoder,
                                                     std::size_t* skipped) {
  const std::vector<HDMap> rec = reconstruct(autoencoder, faulty);
  std::vector<FaultSignature> out;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < faulty.size(); ++i) {
    try {
      FaultSignature s = fault_signature(faulty[i], rec[i]);
      s.source_domain = faulty[i].provenance.domain;
      s.source_sample = faulty[i].provenance.record_seed;
      out.push_back(std::move(s));
    } catch (const DegenerateSignatureError&) {
      ++bad;
    }
  }
  if (skipped) *skipped = bad;
  return out;
}

}  // namespace gearfd
