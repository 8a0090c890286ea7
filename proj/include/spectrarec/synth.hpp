// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spectrarec/cube.hpp"
#include "spectrarec/dataset.hpp"

namespace spectrarec::synth {

struct WavelengthGrid {
  double min_nm = 500.0;
  double max_nm = 1000.0;
  double step_nm = 5.0;
};

inline constexpr WavelengthGrid kWideGrid{500.0, 1000.0, 5.0};
inline constexpr WavelengthGrid kNarrowGrid{460.0, 720.0, 10.0};

/// min, min + step, ... up to max inclusive (within 1e-9 steps). ConfigError
/// on a non-positive step or max < min.
std::vector<float> make_wavelength_grid(const WavelengthGrid& grid);

struct Endmember {
  std::string name;
  std::vector<double> spectrum;  // nonnegative, unit L1 norm
};

inline constexpr double kMinEndmemberAngle = 0.1;  // radians

/// k smooth spectra, each 2-4 Gaussian bumps with distinct centers plus a
/// small floor, pairwise spectral angle >= kMinEndmemberAngle. Candidates
/// violating the separation are redrawn; GenerationError after
/// `max_attempts` redraws in total.
std::vector<Endmember> make_endmembers(std::span<const float> wavelengths, std::size_t k,
                                       std::uint64_t seed, std::size_t max_attempts = 10000);

struct SceneSpec {
  std::size_t height = 64;
  std::size_t width = 64;
  WavelengthGrid grid = kWideGrid;
  std::vector<Endmember> endmembers;
  std::size_t blob_count = 6;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// ConfigError when the scene cannot be rendered (empty size, no
/// endmembers, spectra off the grid, blob_count 0, negative noise).
void validate_scene(const SceneSpec& scene);

struct RenderedScene {
  Hypercube cube;                 // with noise, clipped at 0
  Hypercube clean;                // noiseless mixture
  std::vector<double> abundances; // H x W x K, each pixel on the simplex
};

/// Each pixel mixes the endmembers with weights from smooth Gaussian blobs
/// over a uniform floor. Noise uses its own stream, so `clean` is the same
/// for every noise level.
RenderedScene render_scene(const SceneSpec& scene);

struct SplitFractions {
  double train = 0.6;
  double val = 0.1;
  double test = 0.3;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// Rounded train and val counts, test takes the rest. DatasetError when the
/// fractions are negative, do not sum to 1, or leave train empty.
SplitCounts split_counts(std::size_t scene_count, const SplitFractions& fractions);

struct DatasetSpec {
  std::size_t scene_count = 10;
  SceneSpec scene;  // scene.seed is the master seed
  std::optional<CameraResponse> response;  // default_response() when unset
  SplitFractions fractions;
};

/// Renders scene_count scenes with per-scene seeds drawn from the master
/// seed, pairs each with its synthesized RGB, and assigns splits by a
/// seeded permutation.
Dataset make_dataset(const DatasetSpec& spec);

// Flat key = value scene configuration:
//   height width lambda_min lambda_max lambda_step endmembers endmember_seed
//   blob_count noise_sigma seed scene_count train_fraction val_fraction
//   test_fraction red_band green_band blue_band (each "lo,hi" in nm)
struct SceneConfig {
  DatasetSpec dataset;
  std::size_t endmember_count = 3;
  std::uint64_t endmember_seed = 1;
  std::optional<std::array<WavelengthBand, 3>> bands;  // r, g, b
};

/// ConfigError on unknown keys or bad values.
SceneConfig parse_scene_config(std::string_view text);

/// Builds endmembers and response, then the dataset.
Dataset generate(const SceneConfig& config);

}  // namespace spectrarec::synth
