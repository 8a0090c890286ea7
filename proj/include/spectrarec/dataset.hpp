// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spectrarec/cube.hpp"

namespace spectrarec {

enum class Split { train, val, test };

const char* to_string(Split split) noexcept;
std::optional<Split> parse_split(std::string_view text);

// One paired RGB / hypercube scene.
struct Sample {
  std::string name;  // file stem, e.g. scene_0003
  Split split = Split::train;
  std::uint64_t seed = 0;
  RgbImage rgb;
  Hypercube cube;
};

struct Dataset {
  std::vector<float> wavelengths;
  std::vector<Sample> samples;

  std::vector<const Sample*> split(Split which) const;
  std::size_t channels() const noexcept { return wavelengths.size(); }
};

/// DatasetError if a sample's cube disagrees with the dataset axis or its
/// RGB image differs in size.
void check_dataset(const Dataset& dataset);

inline constexpr std::string_view kManifestName = "manifest.csv";

/// `<stem>_rgb.hsc` next to `<stem>.hsc`.
std::string rgb_file_name(std::string_view cube_file);

// On disk: <dir>/<name>.hsc, <dir>/<name>_rgb.hsc and a manifest.csv with
// columns file,split,seed. Every file is written atomically.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// DatasetError on a missing or malformed manifest, or inconsistent scenes.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace spectrarec
