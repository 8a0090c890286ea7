// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstring>
#include <string>

#include "spectrarec/detail/le_bytes.hpp"
#include "spectrarec/errors.hpp"
#include "spectrarec/fileio.hpp"
#include "spectrarec/nn.hpp"

namespace spectrarec::nn {

namespace {

constexpr char kMagic[4] = {'H', 'S', 'W', '1'};
constexpr std::uint8_t kVersion = 1;

}  // namespace

std::vector<unsigned char> encode_checkpoint(const ModelSpec& spec, const Weights& weights) {
  validate_spec(spec);
  check_weights(spec, weights);
  for (double v : weights.values) {
    if (!std::isfinite(v)) {
      throw ValidationError("checkpoint weights contain a non-finite value");
    }
  }
  detail::ByteWriter out;
  out.bytes(kMagic, sizeof(kMagic));
  out.u8(kVersion);
  const std::string name = to_string(spec.name);
  out.u8(static_cast<std::uint8_t>(name.size()));
  out.bytes(name.data(), name.size());
  out.u32(detail::checked_u32(spec.output_channels, "output channels"));
  out.u32(detail::checked_u32(spec.layers.size(), "layer count"));
  for (const auto& layer : spec.layers) {
    out.u8(static_cast<std::uint8_t>(layer.kind));
    out.u32(detail::checked_u32(layer.in_channels, "layer input"));
    out.u32(detail::checked_u32(layer.out_channels, "layer output"));
    out.u32(detail::checked_u32(layer.heads, "layer heads"));
  }
  out.u32(detail::checked_u32(weights.values.size(), "parameter count"));
  for (double v : weights.values) {
    out.f32(static_cast<float>(v));
  }
  return out.take();
}

Checkpoint decode_checkpoint(std::span<const unsigned char> bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not an HSW1 checkpoint (bad magic)");
  }
  detail::ByteReader in(bytes, "HSW1");
  in.skip(sizeof(kMagic));
  if (const auto version = in.u8(); version != kVersion) {
    throw FormatError("unsupported HSW1 version " + std::to_string(version));
  }
  const std::string name = in.str(in.u8());
  const auto model = parse_model_name(name);
  if (!model) {
    throw FormatError("checkpoint names unknown model '" + name + "'");
  }
  Checkpoint ckpt;
  ckpt.spec.name = *model;
  ckpt.spec.output_channels = in.u32();
  const std::size_t layer_count = in.u32();
  for (std::size_t i = 0; i < layer_count; ++i) {
    LayerSpec layer;
    const auto kind = in.u8();
    if (kind > static_cast<std::uint8_t>(LayerKind::spectral_attention)) {
      throw FormatError("checkpoint layer " + std::to_string(i) + " has unknown kind");
    }
    layer.kind = static_cast<LayerKind>(kind);
    layer.in_channels = in.u32();
    layer.out_channels = in.u32();
    layer.heads = in.u32();
    ckpt.spec.layers.push_back(layer);
  }
  try {
    validate_spec(ckpt.spec);
  } catch (const SpecError& e) {
    throw FormatError(std::string("checkpoint spec invalid: ") + e.what());
  }
  ckpt.weights = make_weights(ckpt.spec);
  const std::size_t count = in.u32();
  if (count != ckpt.weights.values.size()) {
    throw FormatError("checkpoint holds " + std::to_string(count) + " parameters, spec needs " +
                      std::to_string(ckpt.weights.values.size()));
  }
  for (double& v : ckpt.weights.values) {
    v = in.f32();
  }
  if (in.remaining() != 0) {
    throw FormatError("HSW1 file has trailing bytes");
  }
  return ckpt;
}

void save_checkpoint(const ModelSpec& spec, const Weights& weights,
                     const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(spec, weights));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace spectrarec::nn
