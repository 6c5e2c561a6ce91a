#include "gearfd/nn/weights.hpp"

#include "gearfd/binary_io.hpp"
#include "gearfd/error.hpp"

namespace gearfd::nn {

namespace {

constexpr std::uint32_t kMaxLayers = 4096;

struct StoredLayer {
  LayerKind kind{};
  std::vector<std::uint32_t> dims;
  std::vector<float> params;
  std::vector<float> state;
  std::size_t offset = 0;
};

std::vector<StoredLayer> parse(std::vector<std::uint8_t> bytes) {
  ByteReader rd(std::move(bytes));
  rd.expect_magic("GWT1");
  const std::uint32_t count = rd.u32();
  if (count > kMaxLayers) throw FormatError("implausible layer count", rd.offset() - 4);
  std::vector<StoredLayer> layers(count);
  for (StoredLayer& l : layers) {
    l.offset = rd.offset();
    const std::uint8_t tag = rd.u8();
    if (tag < static_cast<std::uint8_t>(LayerKind::conv) || tag > static_cast<std::uint8_t>(LayerKind::scale))
      throw FormatError("unknown layer kind " + std::to_string(tag), l.offset);
    l.kind = static_cast<LayerKind>(tag);
    const std::uint32_t nd = rd.u32();
    if (nd > 16) throw FormatError("implausible dimension count", rd.offset() - 4);
    l.dims.resize(nd);
    for (auto& d : l.dims) d = rd.u32();
    const std::uint32_t np = rd.u32();
    if (static_cast<std::uint64_t>(np) * 4 > rd.remaining()) throw FormatError("parameter block truncated", rd.offset());
    l.params.resize(np);
    for (auto& v : l.params) v = rd.f32();
    const std::uint32_t ns = rd.u32();
    if (static_cast<std::uint64_t>(ns) * 4 > rd.remaining()) throw FormatError("state block truncated", rd.offset());
    l.state.resize(ns);
    for (auto& v : l.state) v = rd.f32();
  }
  rd.expect_end();
  return layers;
}

int as_int(std::uint32_t v) { return static_cast<int>(static_cast<std::int32_t>(v)); }

void need_dims(const StoredLayer& l, std::size_t n) {
  if (l.dims.size() != n) throw FormatError("wrong dimension count for " + to_string(l.kind), l.offset);
}

void add_layer(Sequential<float>& net, const StoredLayer& l) {
  const auto& d = l.dims;
  try {
    switch (l.kind) {
      case LayerKind::conv:
        need_dims(l, 5);
        net.add<Conv2d<float>>(as_int(d[0]), as_int(d[1]), as_int(d[2]), as_int(d[3]), as_int(d[4]));
        break;
      case LayerKind::transposed_conv:
        need_dims(l, 5);
        net.add<ConvTranspose2d<float>>(as_int(d[0]), as_int(d[1]), as_int(d[2]), as_int(d[3]), as_int(d[4]));
        break;
      case LayerKind::batchnorm:
        need_dims(l, 1);
        net.add<BatchNorm<float>>(as_int(d[0]));
        break;
      case LayerKind::relu:
        need_dims(l, 0);
        net.add<ReLU<float>>();
        break;
      case LayerKind::elu:
        need_dims(l, 0);
        net.add<ELU<float>>();
        break;
      case LayerKind::maxpool:
        need_dims(l, 3);
        net.add<MaxPool2d<float>>(as_int(d[0]), as_int(d[1]), as_int(d[2]));
        break;
      case LayerKind::linear:
        need_dims(l, 2);
        net.add<Linear<float>>(as_int(d[0]), as_int(d[1]));
        break;
      case LayerKind::reshape:
        need_dims(l, 3);
        net.add<Reshape<float>>(as_int(d[0]), as_int(d[1]), as_int(d[2]));
        break;
      case LayerKind::crop:
        need_dims(l, 4);
        net.add<Crop<float>>(as_int(d[0]), as_int(d[1]), as_int(d[2]), as_int(d[3]));
        break;
      case LayerKind::scale:
        need_dims(l, 0);
        net.add<Scale<float>>(1.0);
        break;
    }
  } catch (const PreconditionError& e) {
    throw FormatError(std::string("invalid layer configuration: ") + e.what(), l.offset);
  }
}

void fill(Layer<float>& layer, const StoredLayer& l) {
  std::size_t np = 0, ns = 0;
  for (Param<float>* p : layer.params()) np += p->value.size();
  for (auto* b : layer.buffers()) ns += b->size();
  if (np != l.params.size() || ns != l.state.size())
    throw FormatError("parameter count does not match the " + to_string(l.kind) + " layer", l.offset);
  std::size_t i = 0;
  for (Param<float>* p : layer.params())
    for (float& v : p->value) v = l.params[i++];
  i = 0;
  for (auto* b : layer.buffers())
    for (float& v : *b) v = l.state[i++];
}

}  // namespace

std::vector<std::uint8_t> encode_network(Sequential<float>& net) {
  ByteWriter w;
  w.magic("GWT1");
  w.u32(static_cast<std::uint32_t>(net.size()));
  for (std::size_t i = 0; i < net.size(); ++i) {
    Layer<float>& l = net[i];
    w.u8(static_cast<std::uint8_t>(l.kind()));
    const auto cfg = l.config();
    w.u32(static_cast<std::uint32_t>(cfg.size()));
    for (std::uint32_t d : cfg) w.u32(d);
    std::size_t np = 0, ns = 0;
    for (Param<float>* p : l.params()) np += p->value.size();
    for (auto* b : l.buffers()) ns += b->size();
    w.u32(static_cast<std::uint32_t>(np));
    for (Param<float>* p : l.params())
      for (float v : p->value) w.f32(v);
    w.u32(static_cast<std::uint32_t>(ns));
    for (auto* b : l.buffers())
      for (float v : *b) w.f32(v);
  }
  return w.buffer();
}

Sequential<float> decode_network(std::vector<std::uint8_t> bytes) {
  const auto layers = parse(std::move(bytes));
  Sequential<float> net;
  for (const StoredLayer& l : layers) {
    add_layer(net, l);
    fill(net[net.size() - 1], l);
  }
  return net;
}

void load_network(Sequential<float>& net, std::vector<std::uint8_t> bytes) {
  const auto layers = parse(std::move(bytes));
  if (layers.size() != net.size()) throw FormatError("layer count does not match the network", 4);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (net[i].kind() != layers[i].kind || net[i].config() != layers[i].dims)
      throw FormatError("layer " + std::to_string(i) + " does not match the network architecture", layers[i].offset);
  }
  for (std::size_t i = 0; i < layers.size(); ++i) fill(net[i], layers[i]);
}

void write_network(const std::filesystem::path& path, Sequential<float>& net) {
  ByteWriter w;
  w.bytes(encode_network(net));
  w.save(path);
}

Sequential<float> read_network(const std::filesystem::path& path) { return decode_network(read_file_bytes(path)); }

}  // namespace gearfd::nn
