#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "etbox/align.hpp"
#include "etbox/heatmap.hpp"
#include "etbox/io/evaluate.hpp"
#include "etbox/io/formats.hpp"
#include "etbox/io/image.hpp"
#include "etbox/io/pipeline.hpp"
#include "etbox/io/reflacx.hpp"
#include "etbox/io/triplets.hpp"
#include "etbox/repurpose.hpp"
#include "etbox/synth.hpp"

namespace etbox::cli {

namespace {

namespace fs = std::filesystem;

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::size_t max_row_errors = 100;

  void add_to(CLI::App* cmd, bool with_seed) {
    cmd->add_option("--config", config_path, "key=value config file");
    add_override(cmd, "--psi", "psi_s", "pre-sentence interval in seconds");
    add_override(cmd, "--sigma", "sigma_px",
                 "Gaussian sigma in pixels (default: image width / 20)");
    add_override(cmd, "--threshold", "threshold_frac",
                 "heatmap threshold fraction of the peak");
    add_override(cmd, "--min-area", "min_area_frac",
                 "minimum component area as a fraction of the image");
    add_override(cmd, "--connectivity", "connectivity", "4 or 8");
    add_override(cmd, "--assignment", "assignment_mode",
                 "containment or overlap");
    if (with_seed) add_override(cmd, "--seed", "seed", "random seed");
    cmd->add_option("--max-row-errors", max_row_errors,
                    "malformed rows tolerated per input file");
  }

  void add_override(CLI::App* cmd, const std::string& flag,
                    const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { overrides[key] = v; }, help);
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = io::load_config(config_path);
    for (const auto& [key, value] : overrides) {
      io::apply_config_value(cfg, key, value);
    }
    cfg.validate();
    return cfg;
  }

  io::ParseOptions parse_options() const {
    io::ParseOptions o;
    o.max_row_errors = max_row_errors;
    return o;
  }
};

template <typename T>
void report_rows(const std::string& path, const io::ParseResult<T>& r) {
  for (const auto& e : r.errors) {
    std::cerr << path << ":" << e.line << ": " << e.message << "\n";
  }
  if (r.dropped_out_of_image > 0) {
    std::cerr << path << ": dropped " << r.dropped_out_of_image
              << " fixation(s) outside the image\n";
  }
}

void print_warnings(const std::vector<std::string>& warnings,
                    std::size_t limit = 50) {
  for (std::size_t i = 0; i < warnings.size() && i < limit; ++i) {
    std::cerr << "warning: " << warnings[i] << "\n";
  }
  if (warnings.size() > limit) {
    std::cerr << "warning: ... " << warnings.size() - limit << " more\n";
  }
}

struct Inputs {
  std::vector<ImageMeta> metas;
  std::vector<io::FixationRecord> fixations;
  std::vector<io::TranscriptRecord> transcript;
  std::vector<io::AnnotationRecord> annotations;
};

std::vector<io::StudyBundle> load_bundles(const std::string& meta_path,
                                          const std::string& fixation_path,
                                          const std::string& transcript_path,
                                          const std::string& annotation_path,
                                          const io::ParseOptions& opts) {
  Inputs in;
  const auto metas = io::parse_meta(meta_path, opts);
  report_rows(meta_path, metas);
  in.metas = metas.records;
  if (!fixation_path.empty()) {
    const auto r =
        io::parse_fixations(fixation_path, io::index_meta(in.metas), opts);
    report_rows(fixation_path, r);
    in.fixations = r.records;
  }
  if (!transcript_path.empty()) {
    const auto r = io::parse_transcript(transcript_path, opts);
    report_rows(transcript_path, r);
    in.transcript = r.records;
  }
  if (!annotation_path.empty()) {
    const auto r = io::parse_annotations(annotation_path, opts);
    report_rows(annotation_path, r);
    in.annotations = r.records;
  }
  std::vector<std::string> warnings;
  auto bundles = io::assemble_bundles(in.metas, in.fixations, in.transcript,
                                      in.annotations, &warnings);
  print_warnings(warnings);
  return bundles;
}

void add_gen_et(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand(
      "gen-et", "fixations + transcript + image meta -> ET grounding triplets");
  struct Args {
    std::string meta, fixations, transcript, out, diagnostics;
    unsigned workers = io::default_workers();
    ConfigFlags flags;
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("--meta", args->meta, "image meta CSV")->required();
  cmd->add_option("--fixations", args->fixations, "fixations CSV")->required();
  cmd->add_option("--transcript", args->transcript, "transcript CSV")
      ->required();
  cmd->add_option("--out", args->out, "output triplets (JSON lines)")
      ->required();
  cmd->add_option("--diagnostics", args->diagnostics,
                  "write per-sentence no-box reasons here");
  cmd->add_option("--workers", args->workers, "worker threads")
      ->check(CLI::PositiveNumber);
  args->flags.add_to(cmd, false);
  cmd->callback([&action, args] {
    action = [args] {
      const auto cfg = args->flags.resolve();
      const auto bundles =
          load_bundles(args->meta, args->fixations, args->transcript, "",
                       args->flags.parse_options());
      const auto out = io::run_gen_et(bundles, cfg, args->workers);
      io::write_triplets(out.triplets, args->out);
      if (!args->diagnostics.empty()) {
        std::string text;
        for (const auto& d : out.diagnostics) text += d + "\n";
        io::write_file(args->diagnostics, text);
      }
      std::cerr << "gen-et: " << bundles.size() << " studies, "
                << out.sentences << " sentences, " << out.boxes
                << " ET boxes (config " << cfg.fingerprint() << ")\n";
      return kExitOk;
    };
  });
}

void add_repurpose(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand(
      "repurpose", "annotations + transcript -> PG and OD triplets");
  struct Args {
    std::string meta, annotations, transcript, lexicon, pg_out, od_out;
    unsigned workers = io::default_workers();
    ConfigFlags flags;
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("--meta", args->meta, "image meta CSV")->required();
  cmd->add_option("--annotations", args->annotations, "annotations CSV")
      ->required();
  cmd->add_option("--transcript", args->transcript, "transcript CSV")
      ->required();
  cmd->add_option("--lexicon", args->lexicon,
                  "label lexicon ('label: stem, ...' per line)");
  cmd->add_option("--pg-out", args->pg_out, "phrase-grounding triplets")
      ->required();
  cmd->add_option("--od-out", args->od_out, "detection triplets")->required();
  cmd->add_option("--workers", args->workers, "worker threads")
      ->check(CLI::PositiveNumber);
  args->flags.add_to(cmd, true);
  cmd->callback([&action, args] {
    action = [args] {
      const auto cfg = args->flags.resolve();
      const auto lex = args->lexicon.empty()
                           ? LabelLexicon::default_lexicon()
                           : LabelLexicon::load(args->lexicon);
      const auto bundles =
          load_bundles(args->meta, "", args->transcript, args->annotations,
                       args->flags.parse_options());
      const auto out = io::run_repurpose(bundles, lex, cfg, args->workers);
      io::write_triplets(out.pg, args->pg_out);
      io::write_triplets(out.od, args->od_out);
      print_warnings(out.diagnostics);
      std::cerr << "repurpose: " << bundles.size() << " studies, "
                << out.pg.size() << " PG triplets, " << out.od.size()
                << " OD triplets\n";
      return kExitOk;
    };
  });
}

void add_eval(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand(
      "eval", "ground truth + predictions -> localization metrics report");
  struct Args {
    std::string gt, pred, et, pred_et, out, mode = "pg";
    bool table = false;
    bool no_label_gating = false;
    std::vector<double> thresholds = {0.3, 0.5};
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("--gt", args->gt, "ground-truth triplets")->required();
  cmd->add_option("--pred", args->pred, "prediction records");
  cmd->add_option("--mode", args->mode, "pg or od")
      ->check(CLI::IsMember({"pg", "od"}));
  cmd->add_option("--et", args->et, "generated ET triplets (CR containers)");
  cmd->add_option("--pred-et", args->pred_et,
                  "predicted ET boxes with sentence_index");
  cmd->add_option("--out", args->out, "write the JSON report here");
  cmd->add_option("--thresholds", args->thresholds, "IoU accuracy thresholds");
  cmd->add_flag("--table", args->table, "print a human-readable table");
  cmd->add_flag("--no-label-gating", args->no_label_gating,
                "let detections match ground truth of any label");
  cmd->callback([&action, args] {
    action = [args] {
      io::EvalInputs in;
      in.mode = args->mode == "od" ? io::EvalMode::kDetection
                                   : io::EvalMode::kPhraseGrounding;
      in.ground_truth = io::read_triplets(args->gt);
      if (!args->pred.empty()) in.predictions = io::read_triplets(args->pred);
      if (!args->et.empty()) in.gt_et = io::read_triplets(args->et);
      if (!args->pred_et.empty()) in.pred_et = io::read_triplets(args->pred_et);
      in.label_gating = !args->no_label_gating;
      in.thresholds = args->thresholds;
      const auto report = io::run_eval(in);
      print_warnings(report.warnings, 20);
      const auto json = io::report_to_json(report, in.mode);
      if (args->out.empty()) {
        std::cout << json;
      } else {
        io::write_file(args->out, json);
      }
      if (args->table) std::cout << io::report_to_table(report);
      return kExitOk;
    };
  });
}

void add_render(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand(
      "render", "overlay boxes (and a sentence heatmap) on an image");
  struct Args {
    std::string meta, study, image, fixations, transcript, et, gt, pred,
        pred_et, out, heatmap_out;
    std::optional<int> sentence;
    ConfigFlags flags;
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("--meta", args->meta, "image meta CSV")->required();
  cmd->add_option("--study", args->study, "study to render")->required();
  cmd->add_option("--out", args->out, "output PNG")->required();
  cmd->add_option("--image", args->image, "radiograph (PNG, PGM or PPM)");
  cmd->add_option("--fixations", args->fixations, "fixations CSV");
  cmd->add_option("--transcript", args->transcript, "transcript CSV");
  cmd->add_option("--sentence", args->sentence,
                  "sentence index for the heatmap and box filtering");
  cmd->add_option("--et", args->et, "ET triplets (filled purple)");
  cmd->add_option("--gt", args->gt, "ground-truth triplets (filled blue)");
  cmd->add_option("--pred", args->pred, "predictions (blue outline)");
  cmd->add_option("--pred-et", args->pred_et,
                  "predicted ET boxes (magenta outline)");
  cmd->add_option("--heatmap-out", args->heatmap_out,
                  "also write the sentence heatmap as 8-bit grayscale PNG");
  args->flags.add_to(cmd, false);
  cmd->callback([&action, args] {
    action = [args] {
      const auto cfg = args->flags.resolve();
      const auto opts = args->flags.parse_options();
      const auto metas = io::index_meta(io::parse_meta(args->meta, opts).records);
      const auto it = metas.find(args->study);
      if (it == metas.end()) {
        throw Error(ErrorKind::kValidation,
                    "study '" + args->study + "' not in " + args->meta,
                    "study_id");
      }
      const ImageMeta& meta = it->second;

      auto matches_sentence = [&](const io::TripletRecord& r) {
        if (!args->sentence) return true;
        if (r.sentence_index) return *r.sentence_index == *args->sentence;
        return r.sentence_indices.empty() ||
               std::find(r.sentence_indices.begin(), r.sentence_indices.end(),
                         *args->sentence) != r.sentence_indices.end();
      };
      std::vector<io::OverlayBox> boxes;
      auto add = [&](const std::string& path, io::BoxRole role) {
        if (path.empty()) return;
        for (const auto& r : io::read_triplets(path)) {
          if (r.study_id == args->study && matches_sentence(r)) {
            boxes.push_back({r.box, role});
          }
        }
      };
      add(args->gt, io::BoxRole::kGroundTruth);
      add(args->et, io::BoxRole::kEt);
      add(args->pred, io::BoxRole::kPrediction);
      add(args->pred_et, io::BoxRole::kPredictedEt);

      std::optional<Heatmap> heatmap;
      if (!args->fixations.empty() && !args->transcript.empty() &&
          args->sentence) {
        const auto bundles = load_bundles(args->meta, args->fixations,
                                          args->transcript, "", opts);
        for (const auto& b : bundles) {
          if (b.meta.study_id != args->study) continue;
          const auto aligned = assign_fixations(b.fixations, b.sentences, cfg);
          for (std::size_t k = 0; k < b.sentences.size(); ++k) {
            if (b.sentences[k].sentence_index != *args->sentence) continue;
            heatmap = render_accumulated(aligned.per_sentence[k], meta,
                                         cfg.sigma_for(meta));
          }
        }
        if (!heatmap) {
          throw Error(ErrorKind::kValidation,
                      "sentence " + std::to_string(*args->sentence) +
                          " not found for study " + args->study,
                      "sentence_index");
        }
        if (!args->heatmap_out.empty()) {
          io::export_heatmap_png(*heatmap, args->heatmap_out);
        }
      }
      std::optional<std::string> image;
      if (!args->image.empty()) image = args->image;
      io::render_overlay(image, meta, boxes, heatmap ? &*heatmap : nullptr,
                         args->out);
      return kExitOk;
    };
  });
}

void add_split(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand("split", "seeded train/validation split");
  struct Args {
    std::string meta, train_out, val_out;
    double ratio = 0.2;
    std::uint64_t seed = 0;
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("--meta", args->meta, "image meta CSV listing the studies")
      ->required();
  cmd->add_option("--ratio", args->ratio, "validation fraction")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", args->seed, "random seed");
  cmd->add_option("--train-out", args->train_out, "train ids, one per line")
      ->required();
  cmd->add_option("--val-out", args->val_out, "validation ids, one per line")
      ->required();
  cmd->callback([&action, args] {
    action = [args] {
      const auto metas = io::parse_meta(args->meta);
      report_rows(args->meta, metas);
      std::vector<std::string> ids;
      for (const auto& m : metas.records) ids.push_back(m.study_id);
      const auto split = io::split_dataset(ids, args->ratio, args->seed);
      auto lines = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& id : v) s += id + "\n";
        return s;
      };
      io::write_file(args->train_out, lines(split.train));
      io::write_file(args->val_out, lines(split.val));
      std::cerr << "split: " << split.train.size() << " train, "
                << split.val.size() << " val\n";
      return kExitOk;
    };
  });
}

void add_synth(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand(
      "synth", "write a synthetic corpus in the canonical input formats");
  struct Args {
    std::string out_dir;
    int studies = 20;
    std::string jitter = "uniform";
    std::uint64_t seed = 0;
    RandomSynthOptions options;
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("--out-dir", args->out_dir, "output directory")->required();
  cmd->add_option("--studies", args->studies, "number of studies")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sentences", args->options.sentences,
                  "sentences per study")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--fixations", args->options.fixations_per_sentence,
                  "fixations per sentence")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--width", args->options.width_px, "image width")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--height", args->options.height_px, "image height")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--min-side", args->options.min_box_side,
                  "minimum target box side")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-side", args->options.max_box_side,
                  "maximum target box side")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--jitter", args->jitter,
                  "uniform (stratified), iid or gaussian")
      ->check(CLI::IsMember({"uniform", "iid", "gaussian"}));
  cmd->add_option("--min-duration", args->options.min_duration_s,
                  "shortest fixation in seconds")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-duration", args->options.max_duration_s,
                  "longest fixation in seconds")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args->seed, "random seed");
  cmd->callback([&action, args] {
    action = [args] {
      args->options.jitter = args->jitter == "gaussian"
                                 ? JitterModel::kGaussianAroundCenter
                             : args->jitter == "iid" ? JitterModel::kUniformIid
                                                     : JitterModel::kUniformInBox;
      std::vector<io::StudyBundle> bundles;
      std::vector<io::TripletRecord> targets;
      for (int i = 0; i < args->studies; ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "synth-%04d", i);
        const auto spec = random_synth_spec(id, args->options, args->seed);
        const auto study = synth_study(spec);
        io::StudyBundle b;
        b.meta = study.meta;
        b.fixations = study.fixations;
        b.sentences = study.sentences;
        b.ellipses = study.ellipses;
        bundles.push_back(std::move(b));
        for (std::size_t k = 0; k < study.targets.size(); ++k) {
          io::TripletRecord r;
          r.study_id = study.meta.study_id;
          r.box = study.targets[k];
          r.label = spec.sentences[k].label;
          r.source = "TARGET";
          r.sentence_index = static_cast<int>(k);
          targets.push_back(std::move(r));
        }
      }
      io::write_bundles(bundles, args->out_dir);
      io::write_triplets(targets,
                         (fs::path(args->out_dir) / "targets.jsonl").string());
      std::cerr << "synth: wrote " << bundles.size() << " studies to "
                << args->out_dir << "\n";
      return kExitOk;
    };
  });
}

void add_import(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand(
      "import-reflacx", "convert a REFLACX release into the canonical files");
  struct Args {
    std::string root, out_dir;
    std::optional<int> phase;
    bool include_discarded = false;
  };
  auto args = std::make_shared<Args>();
  cmd->add_option("--root", args->root, "REFLACX root directory")->required();
  cmd->add_option("--out-dir", args->out_dir, "output directory")->required();
  cmd->add_option("--phase", args->phase, "only this metadata phase");
  cmd->add_flag("--include-discarded", args->include_discarded,
                "keep studies flagged eye_tracking_data_discarded");
  cmd->callback([&action, args] {
    action = [args] {
      io::ReflacxOptions options;
      options.phase = args->phase;
      options.include_discarded = args->include_discarded;
      const auto result = io::import_reflacx(args->root, options);
      print_warnings(result.warnings);
      io::write_bundles(result.bundles, args->out_dir);
      std::cerr << "import-reflacx: " << result.bundles.size()
                << " studies imported, " << result.skipped_studies
                << " skipped, " << result.dropped_fixations
                << " fixation(s) outside the image dropped\n";
      return kExitOk;
    };
  });
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Eye-tracking grounding boxes: generation, repurposing and "
               "evaluation"};
  app.require_subcommand(1);
  std::function<int()> action;
  add_gen_et(app, action);
  add_repurpose(app, action);
  add_eval(app, action);
  add_render(app, action);
  add_split(app, action);
  add_synth(app, action);
  add_import(app, action);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace etbox::cli
