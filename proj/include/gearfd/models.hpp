#pragma once

// The baseline/self-supervised LeNet classifier and regressor, the convolutional autoencoder,
// and their training objectives.

#include <cstdint>
#include <span>
#include <vector>

#include "gearfd/hdmap.hpp"
#include "gearfd/nn/adam.hpp"
#include "gearfd/nn/layers.hpp"
#include "gearfd/synth.hpp"

namespace gearfd {

using Network = nn::Sequential<float>;

struct TrainingRecipe {
  int iterations = 600;
  int batch = 64;  // samples per step; even, half unmodified and half faulty
  nn::AdamConfig adam{1e-3, 1e-4, 400};
  std::uint64_t seed = 0;

  /// 3000 iterations of 128 with the learning-rate drop at 2000.
  static TrainingRecipe full();
  /// 600 iterations of 64 with the drop at 400.
  static TrainingRecipe desk();
  void validate() const;
};

/// LeNet stack on a 1 x N_R x N_P map: two conv/ReLU/pool blocks, two 100-node layers, two logits.
Network build_classifier(const GearGeometry& geometry = {});
/// Same trunk with one linear output multiplied by output_scale.
Network build_regressor(double output_scale, const GearGeometry& geometry = {});
/// Three conv/batchnorm/ELU/pool encoder blocks, a 128-wide latent layer, a mirror projection,
/// three transposed convolutions, and a crop back to N_R x N_P.
Network build_autoencoder(const GearGeometry& geometry = {});

/// Stacks maps into an N x 1 x N_R x N_P tensor.
nn::Tensor<float> to_tensor(std::span<const HDMap* const> maps);
nn::Tensor<float> to_tensor(std::span<const HDMap> maps);

struct TrainingResult {
  Network net;
  std::vector<double> loss;  // one entry per iteration
};

/// Mean squared reconstruction error on normal maps only.
TrainingResult train_autoencoder(std::span<const HDMap> normals, const TrainingRecipe& recipe);

/// Each step draws batch/2 normal maps and pairs every one with a freshly synthesized
/// counterpart: cross-entropy with labels 0 and 1 for the classifier, squared error against
/// 0 and the drawn scale for the regressor. The pool is only read by FaultPaste.
TrainingResult train_classifier(std::span<const HDMap> normals, const SynthesisConfig& synthesis,
                                std::span<const FaultSignature> pool, const TrainingRecipe& recipe);
TrainingResult train_regressor(std::span<const HDMap> normals, const SynthesisConfig& synthesis,
                               std::span<const FaultSignature> pool, const TrainingRecipe& recipe);

/// Source-only baseline: balanced batches of labelled normal and faulty maps.
TrainingResult train_supervised_classifier(std::span<const HDMap> normals, std::span<const HDMap> faults,
                                           const TrainingRecipe& recipe);

/// Inference-mode outputs, computed in fixed chunks.
std::vector<int> classify(Network& net, std::span<const HDMap> maps);
/// Softmax probability of the faulty class.
std::vector<double> fault_probability(Network& net, std::span<const HDMap> maps);
std::vector<double> regress(Network& net, std::span<const HDMap> maps);
std::vector<HDMap> reconstruct(Network& autoencoder, std::span<const HDMap> maps);
/// Mean squared reconstruction error per map.
std::vector<double> reconstruction_errors(Network& autoencoder, std::span<const HDMap> maps);

struct AnomalyThreshold {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double threshold = 0.0;

  bool is_faulty(double error) const { return error > threshold; }
};

/// mean + 3 std of the given (training) reconstruction errors.
AnomalyThreshold three_sigma_threshold(std::span<const double> errors);
AnomalyThreshold ad_threshold(Network& autoencoder, std::span<const HDMap> normals);

FaultSignature extract_fault_signature(const HDMap& faulty, Network& autoencoder);
/// Signatures of every map whose residual is not degenerate; the skipped count is reported.
std::vector<FaultSignature> extract_fault_signatures(std::span<const HDMap> faulty, Network& autoencoder,
                                                     std::size_t* skipped = nullptr);

}  // namespace gearfd
