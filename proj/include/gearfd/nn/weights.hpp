#pragma once

// "GWT1" weight files: magic, u32 layer count, then per layer a u8 kind tag, u32 dim count and
// u32 dims (the layer configuration), u32 parameter count and f32 parameters, u32 state count
// and f32 non-trainable state. All integers little-endian.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gearfd/nn/layers.hpp"

namespace gearfd::nn {

std::vector<std::uint8_t> encode_network(Sequential<float>& net);

/// Rebuilds the layer stack described by the file, with its parameters and state.
Sequential<float> decode_network(std::vector<std::uint8_t> bytes);

/// Loads parameters into an existing network; throws FormatError unless the stored layer
/// kinds and configurations match it exactly.
void load_network(Sequential<float>& net, std::vector<std::uint8_t> bytes);

void write_network(const std::filesystem::path& path, Sequential<float>& net);
Sequential<float> read_network(const std::filesystem::path& path);

}  // namespace gearfd::nn
