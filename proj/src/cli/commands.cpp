// SPDX-License-Identifier: Apache-2.0
#include "spectrarec/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "spectrarec/check.hpp"
#include "spectrarec/dataset.hpp"
#include "spectrarec/errors.hpp"
#include "spectrarec/fileio.hpp"
#include "spectrarec/metrics.hpp"
#include "spectrarec/nn.hpp"
#include "spectrarec/parallel.hpp"
#include "spectrarec/report.hpp"
#include "spectrarec/synth.hpp"
#include "spectrarec/train.hpp"

namespace spectrarec::cli {

namespace fs = std::filesystem;

namespace {

// A usage or configuration problem found after parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config;
  std::string out;
  std::string model;
  std::string data;
  std::string checkpoint;
  std::string history;
  std::string split = "test";
  std::string cube;
  std::string rgb;
  std::string in;
  std::vector<std::string> points;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  bool sam_degrees = false;
};

train::TrainConfig load_train_config(const Options& o) {
  train::TrainConfig cfg = o.config.empty() ? train::TrainConfig{}
                                            : train::parse_train_config(read_file_text(o.config));
  if (o.epochs) {
    cfg.epochs = *o.epochs;
  }
  if (o.seed) {
    cfg.seed = *o.seed;
  }
  cfg.validate();
  return cfg;
}

fs::path history_path(const Options& o) {
  return o.history.empty() ? fs::path(o.out + ".history.csv") : fs::path(o.history);
}

void print_epoch(std::ostream& out, const train::EpochRecord& r) {
  out << r.epoch << ' ' << format_double(r.train_loss) << ' ' << format_double(r.val_loss) << ' '
      << format_double(r.lr) << std::endl;
}

int cmd_gen(const Options& o, std::ostream& out) {
  const synth::SceneConfig cfg = synth::parse_scene_config(read_file_text(o.config));
  const Dataset dataset = synth::generate(cfg);
  save_dataset(dataset, o.out);
  out << "scenes " << dataset.samples.size() << ": train " << dataset.split(Split::train).size()
      << ", val " << dataset.split(Split::val).size() << ", test "
      << dataset.split(Split::test).size() << ", channels " << dataset.channels() << '\n';
  return kExitOk;
}

void finish_training(const Options& o, const train::TrainResult& result, std::ostream& out) {
  nn::save_checkpoint(result.spec, result.weights, o.out);
  write_file_atomic(history_path(o), train::history_csv(result.history));
  out << "best epoch " << result.best_epoch << " val_loss " << format_double(result.best_val_loss)
      << '\n';
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto name = nn::parse_model_name(o.model);
  if (!name) {
    throw UsageError("unknown model '" + o.model + "'; valid names: " + nn::model_names());
  }
  const train::TrainConfig cfg = load_train_config(o);
  const Dataset dataset = load_dataset(o.data);
  const nn::ModelSpec spec = nn::make_model_spec(*name, dataset.channels());
  const auto result =
      train::train_model(spec, dataset, cfg, [&](const train::EpochRecord& r) { print_epoch(out, r); });
  finish_training(o, result, out);
  return kExitOk;
}

int cmd_finetune(const Options& o, std::ostream& out) {
  Options base = o;
  base.epochs.reset();
  train::TrainConfig cfg = load_train_config(base);
  if (o.epochs) {
    cfg.fine_tune_epochs = *o.epochs;
    cfg.validate();
  }
  const nn::Checkpoint ckpt = nn::load_checkpoint(o.checkpoint);
  const Dataset dataset = load_dataset(o.data);
  const auto result = train::fine_tune(ckpt.spec, ckpt.weights, dataset, cfg,
                                       [&](const train::EpochRecord& r) { print_epoch(out, r); });
  finish_training(o, result, out);
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto split = parse_split(o.split);
  if (!split) {
    throw UsageError("unknown split '" + o.split + "'; use train, val or test");
  }
  const nn::Checkpoint ckpt = nn::load_checkpoint(o.checkpoint);
  const Dataset dataset = load_dataset(o.data);
  if (ckpt.spec.output_channels != dataset.channels()) {
    throw UsageError("checkpoint predicts " + std::to_string(ckpt.spec.output_channels) +
                     " channels but the dataset has " + std::to_string(dataset.channels()) +
                     "; run `finetune` on this dataset first");
  }
  const auto samples = dataset.split(*split);
  if (samples.empty()) {
    throw UsageError("split '" + o.split + "' is empty");
  }
  std::vector<metrics::ImageMetrics> per_image(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Hypercube pred = nn::predict(ckpt.spec, ckpt.weights, samples[i]->rgb, dataset.wavelengths);
    per_image[i] = metrics::evaluate_image(samples[i]->cube, pred);
  });
  const metrics::MetricReport rep = metrics::aggregate_reports(per_image);
  report::ReportOptions ro;
  ro.sam_degrees = o.sam_degrees;
  report::write_report(o.out, rep, dataset.wavelengths, ro);
  out << report::metrics_csv(rep, ro);
  return kExitOk;
}

// Rebuilds the per-channel chart and prints the tables of an eval directory.
int cmd_report(const Options& o, std::ostream& out) {
  const fs::path dir = o.in;
  const CsvTable channels = parse_csv(read_file_text(dir / "channels.csv"));
  metrics::MetricReport rep;
  std::vector<float> wl;
  const std::size_t c_wl = channels.column("wavelength_nm");
  const std::size_t c_mae = channels.column("mae_mean");
  const std::size_t c_mae_sd = channels.column("mae_std");
  const std::size_t c_psnr = channels.column("psnr_mean");
  const std::size_t c_psnr_sd = channels.column("psnr_std");
  for (const CsvRow& row : channels.rows) {
    wl.push_back(static_cast<float>(parse_double(row[c_wl])));
    rep.channel_mae.push_back({parse_double(row[c_mae]), parse_double(row[c_mae_sd])});
    rep.channel_psnr.push_back({parse_double(row[c_psnr]), parse_double(row[c_psnr_sd])});
  }
  if (wl.empty()) {
    throw UsageError((dir / "channels.csv").string() + " has no rows");
  }
  write_file_atomic(dir / "channels.svg", report::channels_svg(rep, wl));
  for (const char* file : {"metrics.csv", "ranges.csv"}) {
    const CsvTable t = parse_csv(read_file_text(dir / file));
    out << file << '\n';
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      out << (i ? "\t" : "  ") << t.header[i];
    }
    out << '\n';
    for (const CsvRow& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        out << (i ? "\t" : "  ") << row[i];
      }
      out << '\n';
    }
  }
  out << "wrote " << (dir / "channels.svg").string() << '\n';
  return kExitOk;
}

std::pair<std::size_t, std::size_t> parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw UsageError("point '" + text + "' is not h,w");
  }
  try {
    return {static_cast<std::size_t>(parse_uint(text.substr(0, comma))),
            static_cast<std::size_t>(parse_uint(text.substr(comma + 1)))};
  } catch (const ConfigError&) {
    throw UsageError("point '" + text + "' is not h,w");
  }
}

int cmd_spectra(const Options& o, std::ostream& out) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(o.checkpoint);
  const Hypercube cube = load_cube(o.cube);
  const fs::path rgb_path =
      o.rgb.empty() ? fs::path(o.cube).parent_path() / rgb_file_name(fs::path(o.cube).filename().string())
                    : fs::path(o.rgb);
  const RgbImage rgb = load_rgb(rgb_path);
  if (rgb.height() != cube.height() || rgb.width() != cube.width()) {
    throw UsageError("RGB and cube sizes differ");
  }
  if (ckpt.spec.output_channels != cube.channels()) {
    throw UsageError("checkpoint predicts " + std::to_string(ckpt.spec.output_channels) +
                     " channels, cube has " + std::to_string(cube.channels()));
  }
  std::vector<std::pair<std::size_t, std::size_t>> points;
  for (const std::string& p : o.points) {
    points.push_back(parse_point(p));
    if (points.back().first >= cube.height() || points.back().second >= cube.width()) {
      throw UsageError("point " + p + " outside " + std::to_string(cube.height()) + "x" +
                       std::to_string(cube.width()));
    }
  }
  const Hypercube pred = nn::predict(ckpt.spec, ckpt.weights, rgb, cube.wavelengths());
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) {
    throw IoError("cannot create " + o.out + ": " + ec.message());
  }
  for (const auto& [h, w] : points) {
    const Spectrum label = extract_spectrum(cube, h, w);
    const Spectrum guess = extract_spectrum(pred, h, w);
    CsvWriter csv({"wavelength_nm", "label", "prediction"});
    for (std::size_t c = 0; c < label.values.size(); ++c) {
      csv.add_row({format_float(label.wavelengths[c]), format_float(label.values[c]),
                   format_float(guess.values[c])});
    }
    const fs::path path =
        fs::path(o.out) / ("point_" + std::to_string(h) + "_" + std::to_string(w) + ".csv");
    write_file_atomic(path, csv.str());
    out << path.string() << '\n';
  }
  return kExitOk;
}

int cmd_check(std::ostream& out) {
  bool all = true;
  run_checks([&](const CheckResult& r) {
    all = all && r.passed;
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << std::endl;
  });
  out << (all ? "all checks passed" : "some checks FAILED") << '\n';
  return all ? kExitOk : kExitFailure;
}

bool is_usage(const Error& e) {
  return dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
         dynamic_cast<const DatasetError*>(&e) || dynamic_cast<const IoError*>(&e) ||
         dynamic_cast<const FormatError*>(&e) || dynamic_cast<const TruncationError*>(&e) ||
         dynamic_cast<const AxisError*>(&e) || dynamic_cast<const IndexError*>(&e) ||
         dynamic_cast<const SpecError*>(&e) || dynamic_cast<const ShapeError*>(&e) ||
         dynamic_cast<const ValidationError*>(&e);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"spectrarec: RGB to hyperspectral reconstruction toolkit"};
  app.require_subcommand(1, 1);
  Options o;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic paired RGB/hyperspectral dataset");
  gen->add_option("--config", o.config, "Scene config (key = value)")->required();
  gen->add_option("--out", o.out, "Output dataset directory")->required();

  auto add_train_flags = [&o](CLI::App* cmd) {
    cmd->add_option("--data", o.data, "Dataset directory with manifest.csv")->required();
    cmd->add_option("--config", o.config, "Training config (key = value); defaults if omitted");
    cmd->add_option("--out", o.out, "Output checkpoint (HSW1)")->required();
    cmd->add_option("--history", o.history, "History CSV (default: <out>.history.csv)");
    cmd->add_option("--epochs", o.epochs, "Override epochs (fine_tune_epochs for finetune)");
    cmd->add_option("--seed", o.seed, "Override the training seed");
  };
  auto* tr = app.add_subcommand("train", "Train a model; prints `epoch train_loss val_loss lr`");
  tr->add_option("--model", o.model, "pixel_feature_net | local_feature_net | spectral_attention_net")
      ->required();
  add_train_flags(tr);

  auto* ft = app.add_subcommand("finetune", "Replace the head of a checkpoint and fine-tune it");
  ft->add_option("--checkpoint", o.checkpoint, "Pretrained checkpoint (HSW1)")->required();
  add_train_flags(ft);

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint (HSW1)")->required();
  ev->add_option("--data", o.data, "Dataset directory")->required();
  ev->add_option("--split", o.split, "train | val | test")->capture_default_str();
  ev->add_option("--out", o.out, "Report directory")->required();
  ev->add_flag("--sam-degrees", o.sam_degrees, "Report SAM in degrees instead of radians");

  auto* rp = app.add_subcommand("report", "Print the tables of an eval directory and redraw its chart");
  rp->add_option("--in", o.in, "Directory written by eval")->required();

  auto* sp = app.add_subcommand("spectra", "Export label and predicted spectra at pixels");
  sp->add_option("--checkpoint", o.checkpoint, "Checkpoint (HSW1)")->required();
  sp->add_option("--cube", o.cube, "Label cube (HSC1)")->required();
  sp->add_option("--rgb", o.rgb, "RGB input (default: <cube stem>_rgb.hsc)");
  sp->add_option("--point", o.points, "Pixel as h,w (repeatable)")->required();
  sp->add_option("--out", o.out, "Output directory")->required();

  auto* ck = app.add_subcommand("check", "Run the built-in verification suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen(o, out);
    }
    if (tr->parsed()) {
      return cmd_train(o, out);
    }
    if (ft->parsed()) {
      return cmd_finetune(o, out);
    }
    if (ev->parsed()) {
      return cmd_eval(o, out);
    }
    if (rp->parsed()) {
      return cmd_report(o, out);
    }
    if (sp->parsed()) {
      return cmd_spectra(o, out);
    }
    if (ck->parsed()) {
      return cmd_check(out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_usage(e) ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace spectrarec::cli
