#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "etbox/core.hpp"

namespace etbox {

// Label -> lowercase keyword stems. A sentence implies a label when any of
// its stems occurs in the lowercased sentence.
class LabelLexicon {
 public:
  LabelLexicon() = default;
  explicit LabelLexicon(std::map<std::string, std::vector<std::string>> stems);

  // Stem table for the 14 finding labels of the chest X-ray vocabulary.
  static LabelLexicon default_lexicon();
  // `label: stem1, stem2, ...` per line; blank lines and `#` comments skipped.
  static LabelLexicon parse(std::string_view text);
  static LabelLexicon load(const std::string& path);

  bool contains(const std::string& label) const {
    return stems_.count(label) != 0;
  }
  const std::vector<std::string>& stems(const std::string& label) const;
  std::vector<std::string> labels() const;

 private:
  std::map<std::string, std::vector<std::string>> stems_;
};

struct Statement {
  std::string text;
  std::set<std::string> implied_labels;
  std::vector<int> source_sentence_indices;
};

struct ReportSentence {
  int sentence_index = 0;
  std::string text;
};

std::string to_lower(std::string_view text);

BoundingBox ellipse_to_box(const AnnotatedEllipse& e, const ImageMeta& meta);

bool is_negative_sentence(std::string_view sentence);

std::vector<std::string> filter_negative_sentences(
    const std::vector<std::string>& sentences);
std::vector<ReportSentence> filter_negative_sentences(
    const std::vector<ReportSentence>& sentences);

bool sentence_implies_label(std::string_view sentence,
                            const std::string& label,
                            const LabelLexicon& lex);

std::optional<Statement> build_statement(
    const std::set<std::string>& box_labels,
    const std::vector<ReportSentence>& retained_sentences,
    const LabelLexicon& lex);

struct BoxCandidate {
  BoundingBox box;
  int certainty = 1;
};

// Uniform integer in [0, n) from a standard-specified engine, so results are
// identical across standard library implementations.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

// Index into `candidates` of the chosen box: uniform among those with the
// highest certainty. The generator is only advanced on ties.
std::size_t pair_statement_with_box(const std::vector<BoxCandidate>& candidates,
                                    std::mt19937_64& rng);

std::uint64_t study_seed(std::uint64_t seed, const std::string& study_id);

struct AnnotationStudy {
  ImageMeta meta;
  std::vector<AnnotatedEllipse> ellipses;
  std::vector<ReportSentence> sentences;
};

std::vector<GroundingTriplet> build_pg_triplets(const AnnotationStudy& study,
                                                const LabelLexicon& lex,
                                                const PipelineConfig& cfg);

// When `lex` is given, each triplet also records the report sentences of the
// statement its box's labels produce.
std::vector<DetectionTriplet> build_od_triplets(
    const AnnotationStudy& study, const LabelLexicon* lex = nullptr);

}  // namespace etbox
