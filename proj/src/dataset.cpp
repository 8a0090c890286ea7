// SPDX-License-Identifier: Apache-2.0
#include "spectrarec/dataset.hpp"

#include <algorithm>
#include <system_error>

#include "spectrarec/errors.hpp"
#include "spectrarec/fileio.hpp"

namespace spectrarec {

const char* to_string(Split split) noexcept {
  switch (split) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view text) {
  for (Split s : {Split::train, Split::val, Split::test}) {
    if (text == to_string(s)) {
      return s;
    }
  }
  return std::nullopt;
}

std::vector<const Sample*> Dataset::split(Split which) const {
  std::vector<const Sample*> out;
  for (const Sample& s : samples) {
    if (s.split == which) {
      out.push_back(&s);
    }
  }
  return out;
}

void check_dataset(const Dataset& dataset) {
  for (const Sample& s : dataset.samples) {
    if (!std::equal(s.cube.wavelengths().begin(), s.cube.wavelengths().end(),
                    dataset.wavelengths.begin(), dataset.wavelengths.end())) {
      throw DatasetError(s.name + ": wavelength axis differs from the dataset");
    }
    if (s.rgb.height() != s.cube.height() || s.rgb.width() != s.cube.width()) {
      throw DatasetError(s.name + ": RGB and cube sizes differ");
    }
  }
}

std::string rgb_file_name(std::string_view cube_file) {
  std::string stem(cube_file);
  if (stem.size() > 4 && stem.ends_with(".hsc")) {
    stem.resize(stem.size() - 4);
  }
  return stem + "_rgb.hsc";
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  check_dataset(dataset);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  CsvWriter manifest({"file", "split", "seed"});
  for (const Sample& s : dataset.samples) {
    const std::string file = s.name + ".hsc";
    save_cube(s.cube, dir / file);
    save_rgb(s.rgb, dir / rgb_file_name(file));
    manifest.add_row({file, to_string(s.split), std::to_string(s.seed)});
  }
  write_file_atomic(dir / kManifestName, manifest.str());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestName;
  if (!std::filesystem::exists(manifest_path)) {
    throw DatasetError("no " + std::string(kManifestName) + " in " + dir.string());
  }
  CsvTable table;
  std::size_t file_col = 0;
  std::size_t split_col = 0;
  std::size_t seed_col = 0;
  try {
    table = parse_csv(read_file_text(manifest_path));
    file_col = table.column("file");
    split_col = table.column("split");
    seed_col = table.column("seed");
  } catch (const FormatError& e) {
    throw DatasetError(manifest_path.string() + ": " + e.what());
  }
  if (table.rows.empty()) {
    throw DatasetError(manifest_path.string() + " lists no scenes");
  }
  Dataset dataset;
  for (const CsvRow& row : table.rows) {
    const std::string& file = row[file_col];
    const auto split = parse_split(row[split_col]);
    if (!split) {
      throw DatasetError(file + ": unknown split '" + row[split_col] + "'");
    }
    Sample s;
    s.name = file.ends_with(".hsc") ? file.substr(0, file.size() - 4) : file;
    s.split = *split;
    try {
      s.seed = static_cast<std::uint64_t>(std::stoull(row[seed_col]));
    } catch (const std::exception&) {
      throw DatasetError(file + ": bad seed '" + row[seed_col] + "'");
    }
    s.cube = load_cube(dir / file);
    s.rgb = load_rgb(dir / rgb_file_name(file));
    if (dataset.samples.empty()) {
      dataset.wavelengths.assign(s.cube.wavelengths().begin(), s.cube.wavelengths().end());
    }
    dataset.samples.push_back(std::move(s));
  }
  check_dataset(dataset);
  return dataset;
}

}  // namespace spectrarec
