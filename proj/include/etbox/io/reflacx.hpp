#pragma once

#include <optional>
#include <string>
#include <vector>

#include "etbox/io/formats.hpp"

namespace etbox::io {

// Adapter for the public REFLACX release layout:
//
//   <root>/main_data/metadata_phase_<N>.csv   id, image_size_x, image_size_y,
//                                             eye_tracking_data_discarded, ...
//   <root>/main_data/<id>/fixations.csv       timestamp_start_fixation,
//                                             timestamp_end_fixation,
//                                             x_position, y_position, ...
//   <root>/main_data/<id>/timestamps_transcription.csv
//                                             word, timestamp_start_word,
//                                             timestamp_end_word
//   <root>/main_data/<id>/anomaly_location_ellipses.csv
//                                             xmin, ymin, xmax, ymax,
//                                             certainty, <one bool column per
//                                             label>
//
// Renames applied: x_position/average_x_position -> x_px, the ellipse's
// bounding corners -> center and semi-axes, word timestamps -> sentences split
// after words ending in '.', '?' or '!'.
struct ReflacxOptions {
  // Restrict to metadata_phase_<phase>.csv; all phases when unset.
  std::optional<int> phase;
  bool include_discarded = false;
};

struct ReflacxImport {
  std::vector<StudyBundle> bundles;
  std::vector<std::string> warnings;
  std::size_t skipped_studies = 0;
  std::size_t dropped_fixations = 0;
};

ReflacxImport import_reflacx(const std::string& root,
                             const ReflacxOptions& options = {});

struct TimedWord {
  std::string word;
  double t_start_s = 0.0;
  double t_end_s = 0.0;
};

// Groups timed words into sentences; a sentence spans from its first word's
// start to its last word's end.
std::vector<SentenceSpan> segment_sentences(const std::vector<TimedWord>& words);

// Writes meta.csv, fixations.csv, transcript.csv and annotations.csv.
void write_bundles(const std::vector<StudyBundle>& bundles,
                   const std::string& out_dir);

}  // namespace etbox::io
