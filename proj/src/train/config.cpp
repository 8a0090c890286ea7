// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <string>

#include "spectrarec/errors.hpp"
#include "spectrarec/fileio.hpp"
#include "spectrarec/train.hpp"

namespace spectrarec::train {

void TrainConfig::validate() const {
  if (epochs < 1) {
    throw ConfigError("epochs must be >= 1");
  }
  if (!(eta_min > 0.0 && eta_min <= lr0 && std::isfinite(lr0))) {
    throw ConfigError("learning rates must satisfy 0 < eta_min <= lr0");
  }
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("beta1 and beta2 must lie in (0, 1)");
  }
  if (!(mrae_epsilon > 0.0)) {
    throw ConfigError("mrae_epsilon must be > 0");
  }
  if (batch_size < 1) {
    throw ConfigError("batch_size must be >= 1");
  }
  if (fine_tune_epochs < 1 || fine_tune_epochs > kMaxFineTuneEpochs) {
    throw ConfigError("fine_tune_epochs must be in [1, " + std::to_string(kMaxFineTuneEpochs) +
                      "]");
  }
  augment.validate();
}

namespace {

std::size_t parse_count(const std::string& v) { return static_cast<std::size_t>(parse_uint(v)); }

}  // namespace

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig c;
  for (const KeyValue& kv : parse_key_values(text)) {
    const std::string& k = kv.key;
    const std::string& v = kv.value;
    try {
      if (k == "epochs") {
        c.epochs = parse_count(v);
      } else if (k == "lr0") {
        c.lr0 = parse_double(v);
      } else if (k == "beta1") {
        c.beta1 = parse_double(v);
      } else if (k == "beta2") {
        c.beta2 = parse_double(v);
      } else if (k == "eta_min") {
        c.eta_min = parse_double(v);
      } else if (k == "loss") {
        if (v == "l1") {
          c.loss = LossKind::l1;
        } else if (v == "mrae") {
          c.loss = LossKind::mrae;
        } else {
          throw ConfigError("expected l1 or mrae");
        }
      } else if (k == "mrae_epsilon") {
        c.mrae_epsilon = parse_double(v);
      } else if (k == "batch_size") {
        c.batch_size = parse_count(v);
      } else if (k == "tile_size") {
        c.tile_size = parse_count(v);
      } else if (k == "seed") {
        c.seed = parse_uint(v);
      } else if (k == "fine_tune_epochs") {
        c.fine_tune_epochs = parse_count(v);
      } else if (k == "augment") {
        c.augment.enabled = parse_bool(v);
      } else if (k == "augment_target_h") {
        c.augment.target_h = parse_count(v);
      } else if (k == "augment_target_w") {
        c.augment.target_w = parse_count(v);
      } else if (k == "augment_flip_prob") {
        c.augment.flip_prob = parse_double(v);
      } else if (k == "augment_shift_frac") {
        c.augment.shift_frac = parse_double(v);
      } else if (k == "augment_scale_lo") {
        c.augment.scale_lo = parse_double(v);
      } else if (k == "augment_scale_hi") {
        c.augment.scale_hi = parse_double(v);
      } else if (k == "augment_rotate_deg") {
        c.augment.rotate_deg = parse_double(v);
      } else {
        throw ConfigError("unknown key");
      }
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(kv.line) + " (" + k + "): " + e.what());
    }
  }
  c.validate();
  return c;
}

std::string write_train_config(const TrainConfig& c) {
  std::string out;
  auto put = [&out](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  put("epochs", std::to_string(c.epochs));
  put("lr0", format_double(c.lr0));
  put("beta1", format_double(c.beta1));
  put("beta2", format_double(c.beta2));
  put("eta_min", format_double(c.eta_min));
  put("loss", to_string(c.loss));
  put("mrae_epsilon", format_double(c.mrae_epsilon));
  put("batch_size", std::to_string(c.batch_size));
  put("tile_size", std::to_string(c.tile_size));
  put("seed", std::to_string(c.seed));
  put("fine_tune_epochs", std::to_string(c.fine_tune_epochs));
  put("augment", c.augment.enabled ? "true" : "false");
  put("augment_target_h", std::to_string(c.augment.target_h));
  put("augment_target_w", std::to_string(c.augment.target_w));
  put("augment_flip_prob", format_double(c.augment.flip_prob));
  put("augment_shift_frac", format_double(c.augment.shift_frac));
  put("augment_scale_lo", format_double(c.augment.scale_lo));
  put("augment_scale_hi", format_double(c.augment.scale_hi));
  put("augment_rotate_deg", format_double(c.augment.rotate_deg));
  return out;
}

}  // namespace spectrarec::train
