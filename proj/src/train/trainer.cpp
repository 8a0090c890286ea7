// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "spectrarec/errors.hpp"
#include "spectrarec/fileio.hpp"
#include "spectrarec/parallel.hpp"
#include "spectrarec/train.hpp"

namespace spectrarec::train {

double image_loss(const TrainConfig& config, const nn::Tensor& y, const nn::Tensor& yhat) {
  return config.loss == LossKind::l1 ? loss_l1(y, yhat).value
                                     : loss_mrae(y, yhat, config.mrae_epsilon).value;
}

double evaluate_loss(const nn::ModelSpec& spec, const nn::Weights& weights,
                     std::span<const Sample* const> samples, const TrainConfig& config) {
  if (samples.empty()) {
    throw DatasetError("cannot evaluate an empty split");
  }
  std::vector<double> losses(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const nn::Tensor yhat = nn::forward(spec, weights, nn::to_tensor(samples[i]->rgb));
    losses[i] = image_loss(config, nn::to_tensor(samples[i]->cube), yhat);
  });
  double total = 0.0;
  for (double l : losses) {
    total += l;
  }
  return total / static_cast<double>(losses.size());
}

namespace {

struct Pair {
  nn::Tensor x;
  nn::Tensor y;
};

struct Tile {
  std::size_t image = 0;
  std::size_t y0 = 0;
  std::size_t x0 = 0;
  std::size_t h = 0;
  std::size_t w = 0;
};

nn::Tensor crop(const nn::Tensor& t, const Tile& tile) {
  if (tile.y0 == 0 && tile.x0 == 0 && tile.h == t.height() && tile.w == t.width()) {
    return t;
  }
  nn::Tensor out(tile.h, tile.w, t.depth());
  for (std::size_t i = 0; i < tile.h; ++i) {
    const double* src = &t.at(tile.y0 + i, tile.x0, 0);
    std::copy(src, src + tile.w * t.depth(), &out.at(i, 0, 0));
  }
  return out;
}

void append_tiles(std::vector<Tile>& tiles, std::size_t image, std::size_t h, std::size_t w,
                  std::size_t tile_size) {
  if (tile_size == 0) {
    tiles.push_back({image, 0, 0, h, w});
    return;
  }
  for (std::size_t y0 = 0; y0 < h; y0 += tile_size) {
    for (std::size_t x0 = 0; x0 < w; x0 += tile_size) {
      tiles.push_back({image, y0, x0, std::min(tile_size, h - y0), std::min(tile_size, w - x0)});
    }
  }
}

std::vector<Pair> epoch_pairs(std::span<const Sample* const> train, const TrainConfig& config,
                              std::mt19937_64& rng) {
  std::vector<Pair> pairs;
  pairs.reserve(train.size());
  for (const Sample* s : train) {
    if (config.augment.enabled) {
      const AugmentedPair a = augment_pair(s->rgb, s->cube, config.augment, rng);
      pairs.push_back({nn::to_tensor(a.rgb), nn::to_tensor(a.cube)});
    } else {
      pairs.push_back({nn::to_tensor(s->rgb), nn::to_tensor(s->cube)});
    }
  }
  return pairs;
}

struct SampleGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

SampleGrad sample_gradient(const nn::ModelSpec& spec, const nn::Weights& weights, const Pair& pair,
                           const Tile& tile, const TrainConfig& config) {
  const nn::Tensor x = crop(pair.x, tile);
  const nn::Tensor y = crop(pair.y, tile);
  nn::ForwardTrace trace;
  const nn::Tensor yhat = nn::forward(spec, weights, x, &trace);
  LossResult loss = config.loss == LossKind::l1 ? loss_l1(y, yhat)
                                                : loss_mrae(y, yhat, config.mrae_epsilon);
  return {loss.value, nn::backward(spec, weights, trace, loss.grad).weights};
}

}  // namespace

TrainResult train_model(const nn::ModelSpec& spec, const nn::Weights& initial,
                        const Dataset& dataset, const TrainConfig& config,
                        const EpochCallback& on_epoch) {
  config.validate();
  nn::validate_spec(spec);
  nn::check_weights(spec, initial);
  const auto train = dataset.split(Split::train);
  const auto val = dataset.split(Split::val);
  if (train.empty()) {
    throw DatasetError("training split is empty");
  }
  if (val.empty()) {
    throw DatasetError("validation split is empty");
  }
  if (spec.output_channels != dataset.channels()) {
    throw DatasetError("model predicts " + std::to_string(spec.output_channels) +
                       " channels, dataset has " + std::to_string(dataset.channels()));
  }
  check_dataset(dataset);

  std::size_t samples_per_epoch = 0;
  {
    std::vector<Tile> tiles;
    for (const Sample* s : train) {
      const std::size_t h = config.augment.enabled ? config.augment.target_h : s->cube.height();
      const std::size_t w = config.augment.enabled ? config.augment.target_w : s->cube.width();
      append_tiles(tiles, 0, h, w, config.tile_size);
    }
    samples_per_epoch = tiles.size();
  }
  const std::size_t steps_per_epoch = (samples_per_epoch + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = config.epochs * steps_per_epoch;

  TrainResult result;
  result.spec = spec;
  nn::Weights weights = initial;
  nn::round_to_f32(weights.values);
  result.weights = weights;
  OptimizerState state = OptimizerState::zeros(weights.values.size());
  const AdamParams adam{config.beta1, config.beta2, 1e-8};
  std::mt19937_64 rng(config.seed);
  std::size_t step = 0;
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<Pair> pairs = epoch_pairs(train, config, rng);
    std::vector<Tile> tiles;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      append_tiles(tiles, i, pairs[i].x.height(), pairs[i].x.width(), config.tile_size);
    }
    std::shuffle(tiles.begin(), tiles.end(), rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < tiles.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, tiles.size() - start);
      std::vector<SampleGrad> parts(count);
      parallel_for(count, [&](std::size_t b) {
        const Tile& t = tiles[start + b];
        parts[b] = sample_gradient(spec, weights, pairs[t.image], t, config);
      });
      std::vector<double> grad(weights.values.size(), 0.0);
      for (const SampleGrad& p : parts) {
        if (!std::isfinite(p.loss)) {
          throw NumericsError("non-finite training loss", epoch);
        }
        loss_sum += p.loss;
        for (std::size_t i = 0; i < grad.size(); ++i) {
          grad[i] += p.grad[i];
        }
      }
      for (double& g : grad) {
        g /= static_cast<double>(count);
      }
      try {
        adam_step(state, weights.values, grad, cosine_lr(step, total_steps, config.lr0, config.eta_min),
                  adam);
      } catch (const NumericsError& e) {
        throw NumericsError(e.what(), epoch);
      }
      nn::round_to_f32(weights.values);
      ++step;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(tiles.size());
    rec.val_loss = evaluate_loss(spec, weights, val, config);
    rec.lr = cosine_lr(std::min(step, total_steps), total_steps, config.lr0, config.eta_min);
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
      throw NumericsError("non-finite loss", epoch);
    }
    result.history.push_back(rec);
    if (!have_best || rec.val_loss < result.best_val_loss) {
      have_best = true;
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      result.weights = weights;
    }
    if (on_epoch) {
      on_epoch(rec);
    }
  }
  return result;
}

TrainResult train_model(const nn::ModelSpec& spec, const Dataset& dataset,
                        const TrainConfig& config, const EpochCallback& on_epoch) {
  return train_model(spec, nn::init_weights(spec, config.seed), dataset, config, on_epoch);
}

TrainResult fine_tune(const nn::ModelSpec& spec, const nn::Weights& pretrained,
                      const Dataset& dataset, const TrainConfig& config,
                      const EpochCallback& on_epoch) {
  config.validate();
  const nn::HeadReplacement head =
      nn::replace_head(spec, pretrained, dataset.channels(), config.seed);
  TrainConfig tuned = config;
  tuned.epochs = config.fine_tune_epochs;
  return train_model(head.spec, head.weights, dataset, tuned, on_epoch);
}

std::string history_csv(std::span<const EpochRecord> history) {
  CsvWriter csv({"epoch", "train_loss", "val_loss", "lr"});
  for (const EpochRecord& r : history) {
    csv.add_row({std::to_string(r.epoch), format_double(r.train_loss), format_double(r.val_loss),
                 format_double(r.lr)});
  }
  return csv.str();
}

}  // namespace spectrarec::train
