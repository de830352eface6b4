#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etbox/core.hpp"
#include "etbox/repurpose.hpp"

namespace etbox::io {

inline constexpr const char* kFixationColumns[] = {"study_id", "t_start_s",
                                                   "t_end_s", "x_px", "y_px"};
inline constexpr const char* kTranscriptColumns[] = {
    "study_id", "sentence_index", "t_start_s", "t_end_s", "text"};
inline constexpr const char* kAnnotationColumns[] = {
    "study_id",       "center_x_px",    "center_y_px", "semi_axis_x_px",
    "semi_axis_y_px", "labels",         "certainty"};
inline constexpr const char* kMetaColumns[] = {"study_id", "width_px",
                                               "height_px"};

struct RowError {
  int line = 0;
  std::string message;
};

struct ParseOptions {
  // Parsing aborts with a RowError once more rows than this fail.
  std::size_t max_row_errors = 100;
};

template <typename T>
struct ParseResult {
  std::vector<T> records;
  std::vector<RowError> errors;
  std::size_t dropped_out_of_image = 0;
};

struct FixationRecord {
  std::string study_id;
  Fixation fixation;
  friend bool operator==(const FixationRecord&,
                         const FixationRecord&) = default;
};

struct TranscriptRecord {
  std::string study_id;
  SentenceSpan sentence;
  friend bool operator==(const TranscriptRecord&,
                         const TranscriptRecord&) = default;
};

struct AnnotationRecord {
  std::string study_id;
  AnnotatedEllipse ellipse;
  friend bool operator==(const AnnotationRecord&,
                         const AnnotationRecord&) = default;
};

using MetaIndex = std::map<std::string, ImageMeta>;

ParseResult<ImageMeta> parse_meta(const std::string& path,
                                  const ParseOptions& options = {});
MetaIndex index_meta(const std::vector<ImageMeta>& metas);

// Fixations centered outside their image are dropped and counted. Rows for
// studies missing from `metas` are row errors.
ParseResult<FixationRecord> parse_fixations(const std::string& path,
                                            const MetaIndex& metas,
                                            const ParseOptions& options = {});
ParseResult<TranscriptRecord> parse_transcript(
    const std::string& path, const ParseOptions& options = {});
ParseResult<AnnotationRecord> parse_annotations(
    const std::string& path, const ParseOptions& options = {});

ParseResult<ImageMeta> parse_meta(std::istream& in,
                                  const ParseOptions& options = {});
ParseResult<FixationRecord> parse_fixations(std::istream& in,
                                            const MetaIndex& metas,
                                            const ParseOptions& options = {});
ParseResult<TranscriptRecord> parse_transcript(
    std::istream& in, const ParseOptions& options = {});
ParseResult<AnnotationRecord> parse_annotations(
    std::istream& in, const ParseOptions& options = {});

void write_meta(const std::vector<ImageMeta>& metas, std::ostream& out);
void write_fixations(const std::vector<FixationRecord>& records,
                     std::ostream& out);
void write_transcript(const std::vector<TranscriptRecord>& records,
                      std::ostream& out);
void write_annotations(const std::vector<AnnotationRecord>& records,
                       std::ostream& out);

void write_meta(const std::vector<ImageMeta>& metas, const std::string& path);
void write_fixations(const std::vector<FixationRecord>& records,
                     const std::string& path);
void write_transcript(const std::vector<TranscriptRecord>& records,
                      const std::string& path);
void write_annotations(const std::vector<AnnotationRecord>& records,
                       const std::string& path);

// Shortest text that parses back to the same double.
std::string format_real(double v);

struct StudyBundle {
  ImageMeta meta;
  std::vector<Fixation> fixations;
  std::vector<SentenceSpan> sentences;
  std::vector<AnnotatedEllipse> ellipses;
  std::optional<std::string> image_path;
};

// Groups records by study (ordered by study_id). Fixations are stably sorted
// by start time; sentences are sorted by start time and checked for overlap.
// Records of studies without meta and ellipses lying entirely outside their
// image are skipped with a message in `warnings`.
std::vector<StudyBundle> assemble_bundles(
    const std::vector<ImageMeta>& metas,
    const std::vector<FixationRecord>& fixations,
    const std::vector<TranscriptRecord>& transcript,
    const std::vector<AnnotationRecord>& annotations,
    std::vector<std::string>* warnings = nullptr);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// `key = value` lines; `#` starts a comment. Unknown keys are errors.
PipelineConfig parse_config(std::string_view text,
                            PipelineConfig base = {});
PipelineConfig load_config(const std::string& path,
                           PipelineConfig base = {});
void apply_config_value(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

struct SplitResult {
  std::vector<std::string> train;
  std::vector<std::string> val;
};

// Seeded uniform split with |val| = round(ratio * N). Both halves keep the
// input order.
SplitResult split_dataset(const std::vector<std::string>& study_ids,
                          double ratio, std::uint64_t seed);

}  // namespace etbox::io
