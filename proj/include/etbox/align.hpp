#pragma once

#include <vector>

#include "etbox/core.hpp"

namespace etbox {

// Interval over which fixations are collected for one sentence: the
// dictation interval extended backwards by the pre-sentence interval.
struct CollectionWindow {
  int sentence_index = 0;
  double w_start_s = 0.0;
  double w_end_s = 0.0;
};

struct AlignmentResult {
  // Parallel to the input sentences.
  std::vector<std::vector<Fixation>> per_sentence;
  std::vector<Fixation> unassigned;

  std::size_t assigned_count() const;
};

CollectionWindow collection_window(const SentenceSpan& s, double psi_s);

bool qualifies(const Fixation& f, const CollectionWindow& w,
               AssignmentMode mode);

// Each fixation goes to the first sentence (lowest position in `sentences`)
// whose window qualifies it. Both inputs must be sorted by start time.
AlignmentResult assign_fixations(const std::vector<Fixation>& fixations,
                                 const std::vector<SentenceSpan>& sentences,
                                 const PipelineConfig& cfg);

}  // namespace etbox
