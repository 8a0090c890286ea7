// SPDX-License-Identifier: Apache-2.0
#include "spectrarec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "spectrarec/errors.hpp"
#include "spectrarec/fileio.hpp"
#include "spectrarec/metrics.hpp"
#include "spectrarec/parallel.hpp"

namespace spectrarec::synth {

std::vector<float> make_wavelength_grid(const WavelengthGrid& grid) {
  if (!(grid.step_nm > 0.0) || !std::isfinite(grid.min_nm) || !std::isfinite(grid.max_nm) ||
      grid.max_nm < grid.min_nm) {
    throw ConfigError("wavelength grid needs step > 0 and max >= min");
  }
  const auto count =
      static_cast<std::size_t>(std::floor((grid.max_nm - grid.min_nm) / grid.step_nm + 1e-9)) + 1;
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = static_cast<float>(grid.min_nm + static_cast<double>(i) * grid.step_nm);
  }
  for (std::size_t i = 1; i < count; ++i) {
    if (!(out[i] > out[i - 1])) {
      throw ConfigError("wavelength step too small for 32-bit resolution");
    }
  }
  return out;
}

namespace {

std::vector<double> draw_spectrum(std::span<const float> wl, std::mt19937_64& rng) {
  const double lo = wl.front();
  const double span = std::max(static_cast<double>(wl.back()) - lo, 1.0);
  std::uniform_int_distribution<int> bump_count(2, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int bumps = bump_count(rng);
  std::vector<double> centers;
  while (static_cast<int>(centers.size()) < bumps) {
    const double c = lo + unit(rng) * span;
    if (std::find(centers.begin(), centers.end(), c) == centers.end()) {
      centers.push_back(c);
    }
  }
  std::vector<double> s(wl.size(), 0.02);
  for (double c : centers) {
    const double width = (0.05 + 0.2 * unit(rng)) * span;
    const double amp = 0.2 + 0.8 * unit(rng);
    for (std::size_t i = 0; i < wl.size(); ++i) {
      const double z = (wl[i] - c) / width;
      s[i] += amp * std::exp(-0.5 * z * z);
    }
  }
  double total = 0.0;
  for (double v : s) {
    total += v;
  }
  for (double& v : s) {
    v /= total;
  }
  return s;
}

}  // namespace

std::vector<Endmember> make_endmembers(std::span<const float> wavelengths, std::size_t k,
                                       std::uint64_t seed, std::size_t max_attempts) {
  if (k == 0) {
    throw ConfigError("need at least one endmember");
  }
  if (wavelengths.empty()) {
    throw AxisError("empty wavelength grid");
  }
  std::mt19937_64 rng(seed);
  std::vector<Endmember> out;
  std::size_t attempts = 0;
  while (out.size() < k) {
    if (attempts++ >= max_attempts) {
      throw GenerationError("could not separate " + std::to_string(k) +
                            " endmembers by the minimum spectral angle");
    }
    auto candidate = draw_spectrum(wavelengths, rng);
    const bool separated = std::all_of(out.begin(), out.end(), [&](const Endmember& e) {
      const auto angle = metrics::spectral_angle(candidate, e.spectrum);
      return angle && *angle >= kMinEndmemberAngle;
    });
    if (separated) {
      out.push_back({"endmember_" + std::to_string(out.size()), std::move(candidate)});
    }
  }
  return out;
}

void validate_scene(const SceneSpec& scene) {
  if (scene.height == 0 || scene.width == 0) {
    throw ConfigError("scene height and width must be >= 1");
  }
  if (scene.endmembers.empty()) {
    throw ConfigError("scene has no endmembers");
  }
  const std::size_t c = make_wavelength_grid(scene.grid).size();
  for (const Endmember& e : scene.endmembers) {
    if (e.spectrum.size() != c) {
      throw ConfigError(e.name + " has " + std::to_string(e.spectrum.size()) +
                        " samples, grid has " + std::to_string(c));
    }
  }
  if (scene.blob_count == 0) {
    throw ConfigError("blob_count must be >= 1");
  }
  if (!(scene.noise_sigma >= 0.0) || !std::isfinite(scene.noise_sigma)) {
    throw ConfigError("noise_sigma must be finite and >= 0");
  }
}

RenderedScene render_scene(const SceneSpec& scene) {
  validate_scene(scene);
  const std::vector<float> wl = make_wavelength_grid(scene.grid);
  const std::size_t h_count = scene.height;
  const std::size_t w_count = scene.width;
  const std::size_t k_count = scene.endmembers.size();
  const std::size_t c_count = wl.size();

  std::mt19937_64 rng(scene.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, k_count - 1);
  std::vector<double> ab(h_count * w_count * k_count, 0.05);
  const double extent = static_cast<double>(std::min(h_count, w_count));
  for (std::size_t b = 0; b < scene.blob_count; ++b) {
    const std::size_t k = pick(rng);
    const double cy = unit(rng) * static_cast<double>(h_count);
    const double cx = unit(rng) * static_cast<double>(w_count);
    const double sigma = (0.1 + 0.2 * unit(rng)) * extent;
    for (std::size_t h = 0; h < h_count; ++h) {
      for (std::size_t w = 0; w < w_count; ++w) {
        const double dy = static_cast<double>(h) - cy;
        const double dx = static_cast<double>(w) - cx;
        ab[(h * w_count + w) * k_count + k] += std::exp(-0.5 * (dy * dy + dx * dx) / (sigma * sigma));
      }
    }
  }
  for (std::size_t p = 0; p < h_count * w_count; ++p) {
    double total = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      total += ab[p * k_count + k];
    }
    for (std::size_t k = 0; k < k_count; ++k) {
      ab[p * k_count + k] /= total;
    }
  }

  std::vector<double> mix(h_count * w_count * c_count, 0.0);
  for (std::size_t p = 0; p < h_count * w_count; ++p) {
    for (std::size_t k = 0; k < k_count; ++k) {
      const double a = ab[p * k_count + k];
      const auto& e = scene.endmembers[k].spectrum;
      for (std::size_t c = 0; c < c_count; ++c) {
        mix[p * c_count + c] += a * e[c];
      }
    }
  }

  std::vector<float> clean(mix.size());
  std::vector<float> noisy(mix.size());
  std::mt19937_64 noise_rng(scene.seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> noise(0.0, scene.noise_sigma > 0.0 ? scene.noise_sigma : 1.0);
  for (std::size_t i = 0; i < mix.size(); ++i) {
    clean[i] = static_cast<float>(mix[i]);
    noisy[i] = scene.noise_sigma > 0.0
                   ? static_cast<float>(std::max(mix[i] + noise(noise_rng), 0.0))
                   : clean[i];
  }
  return {Hypercube(h_count, w_count, wl, std::move(noisy)),
          Hypercube(h_count, w_count, wl, std::move(clean)), std::move(ab)};
}

SplitCounts split_counts(std::size_t scene_count, const SplitFractions& f) {
  if (f.train < 0.0 || f.val < 0.0 || f.test < 0.0 ||
      std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw DatasetError("split fractions must be >= 0 and sum to 1");
  }
  const auto n = static_cast<double>(scene_count);
  SplitCounts c;
  c.train = static_cast<std::size_t>(std::lround(f.train * n));
  c.val = static_cast<std::size_t>(std::lround(f.val * n));
  if (c.train + c.val > scene_count) {
    c.val = scene_count - std::min(c.train, scene_count);
    c.train = std::min(c.train, scene_count);
  }
  c.test = scene_count - c.train - c.val;
  if (c.train == 0) {
    throw DatasetError("split leaves the training set empty");
  }
  return c;
}

Dataset make_dataset(const DatasetSpec& spec) {
  validate_scene(spec.scene);
  const SplitCounts counts = split_counts(spec.scene_count, spec.fractions);
  const std::vector<float> wl = make_wavelength_grid(spec.scene.grid);
  const CameraResponse response = spec.response ? *spec.response : default_response(wl);
  if (!std::equal(response.wavelengths.begin(), response.wavelengths.end(), wl.begin(), wl.end())) {
    throw AxisError("camera response grid does not match the scene grid");
  }
  validate_response(response);

  std::mt19937_64 master(spec.scene.seed);
  std::vector<std::uint64_t> seeds;
  std::set<std::uint64_t> used;
  while (seeds.size() < spec.scene_count) {
    const std::uint64_t s = master();
    if (used.insert(s).second) {
      seeds.push_back(s);
    }
  }
  std::vector<std::size_t> order(spec.scene_count);
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::shuffle(order.begin(), order.end(), master);
  std::vector<Split> splits(spec.scene_count, Split::test);
  for (std::size_t r = 0; r < order.size(); ++r) {
    splits[order[r]] = r < counts.train ? Split::train
                       : r < counts.train + counts.val ? Split::val
                                                       : Split::test;
  }

  Dataset dataset;
  dataset.wavelengths = wl;
  dataset.samples.resize(spec.scene_count);
  parallel_for(spec.scene_count, [&](std::size_t i) {
    SceneSpec scene = spec.scene;
    scene.seed = seeds[i];
    Sample& s = dataset.samples[i];
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04zu", i);
    s.name = name;
    s.split = splits[i];
    s.seed = seeds[i];
    s.cube = render_scene(scene).cube;
    s.rgb = synthesize_rgb(s.cube, response);
  });
  return dataset;
}

namespace {

WavelengthBand parse_band(const KeyValue& kv) {
  const auto comma = kv.value.find(',');
  if (comma == std::string::npos) {
    throw ConfigError(kv.key + ": expected lo,hi");
  }
  WavelengthBand band{parse_double(kv.value.substr(0, comma)),
                      parse_double(kv.value.substr(comma + 1))};
  if (!(band.hi_nm >= band.lo_nm)) {
    throw ConfigError(kv.key + ": hi must be >= lo");
  }
  return band;
}

std::size_t parse_count(const KeyValue& kv) {
  return static_cast<std::size_t>(parse_uint(kv.value));
}

}  // namespace

SceneConfig parse_scene_config(std::string_view text) {
  SceneConfig cfg;
  DatasetSpec& d = cfg.dataset;
  std::array<std::optional<WavelengthBand>, 3> bands;
  for (const KeyValue& kv : parse_key_values(text)) {
    try {
      const std::string& k = kv.key;
      if (k == "height") {
        d.scene.height = parse_count(kv);
      } else if (k == "width") {
        d.scene.width = parse_count(kv);
      } else if (k == "lambda_min") {
        d.scene.grid.min_nm = parse_double(kv.value);
      } else if (k == "lambda_max") {
        d.scene.grid.max_nm = parse_double(kv.value);
      } else if (k == "lambda_step") {
        d.scene.grid.step_nm = parse_double(kv.value);
      } else if (k == "endmembers") {
        cfg.endmember_count = parse_count(kv);
      } else if (k == "endmember_seed") {
        cfg.endmember_seed = parse_uint(kv.value);
      } else if (k == "blob_count") {
        d.scene.blob_count = parse_count(kv);
      } else if (k == "noise_sigma") {
        d.scene.noise_sigma = parse_double(kv.value);
      } else if (k == "seed") {
        d.scene.seed = parse_uint(kv.value);
      } else if (k == "scene_count") {
        d.scene_count = parse_count(kv);
      } else if (k == "train_fraction") {
        d.fractions.train = parse_double(kv.value);
      } else if (k == "val_fraction") {
        d.fractions.val = parse_double(kv.value);
      } else if (k == "test_fraction") {
        d.fractions.test = parse_double(kv.value);
      } else if (k == "red_band") {
        bands[0] = parse_band(kv);
      } else if (k == "green_band") {
        bands[1] = parse_band(kv);
      } else if (k == "blue_band") {
        bands[2] = parse_band(kv);
      } else {
        throw ConfigError("unknown key");
      }
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(kv.line) + " (" + kv.key + "): " + e.what());
    }
  }
  const auto set = std::count_if(bands.begin(), bands.end(), [](const auto& b) { return b.has_value(); });
  if (set == 3) {
    cfg.bands = std::array<WavelengthBand, 3>{*bands[0], *bands[1], *bands[2]};
  } else if (set != 0) {
    throw ConfigError("red_band, green_band and blue_band must be given together");
  }
  try {
    split_counts(d.scene_count, d.fractions);
  } catch (const DatasetError& e) {
    throw ConfigError(e.what());
  }
  make_wavelength_grid(d.scene.grid);
  if (d.scene.height == 0 || d.scene.width == 0 || d.scene.blob_count == 0 ||
      cfg.endmember_count == 0) {
    throw ConfigError("height, width, blob_count and endmembers must be >= 1");
  }
  if (!(d.scene.noise_sigma >= 0.0)) {
    throw ConfigError("noise_sigma must be >= 0");
  }
  return cfg;
}

Dataset generate(const SceneConfig& config) {
  DatasetSpec spec = config.dataset;
  const std::vector<float> wl = make_wavelength_grid(spec.scene.grid);
  spec.scene.endmembers = make_endmembers(wl, config.endmember_count, config.endmember_seed);
  if (config.bands) {
    spec.response = boxcar_response(wl, *config.bands);
  }
  return make_dataset(spec);
}

}  // namespace spectrarec::synth
