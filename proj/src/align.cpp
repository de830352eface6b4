#include "etbox/align.hpp"

#include <algorithm>

namespace etbox {

std::size_t AlignmentResult::assigned_count() const {
  std::size_t n = 0;
  for (const auto& list : per_sentence) n += list.size();
  return n;
}

CollectionWindow collection_window(const SentenceSpan& s, double psi_s) {
  if (!(psi_s >= 0)) {
    throw Error(ErrorKind::kValidation, "psi_s must be >= 0", "psi_s");
  }
  return CollectionWindow{s.sentence_index, s.t_start_s - psi_s, s.t_end_s};
}

bool qualifies(const Fixation& f, const CollectionWindow& w,
               AssignmentMode mode) {
  if (mode == AssignmentMode::kContainment) {
    return w.w_start_s <= f.t_start_s && f.t_end_s <= w.w_end_s;
  }
  return std::max(f.t_start_s, w.w_start_s) < std::min(f.t_end_s, w.w_end_s);
}

AlignmentResult assign_fixations(const std::vector<Fixation>& fixations,
                                 const std::vector<SentenceSpan>& sentences,
                                 const PipelineConfig& cfg) {
  for (std::size_t i = 1; i < fixations.size(); ++i) {
    if (fixations[i].t_start_s < fixations[i - 1].t_start_s) {
      throw Error(ErrorKind::kUnsortedInput,
                  "fixation " + std::to_string(i) +
                      " starts before its predecessor",
                  "t_start_s");
    }
  }
  validate_sentence_order(sentences);

  std::vector<CollectionWindow> windows;
  windows.reserve(sentences.size());
  for (const auto& s : sentences) {
    windows.push_back(collection_window(s, cfg.psi_s));
  }

  AlignmentResult result;
  result.per_sentence.resize(sentences.size());
  for (const auto& f : fixations) {
    bool placed = false;
    for (std::size_t k = 0; k < windows.size(); ++k) {
      if (qualifies(f, windows[k], cfg.assignment_mode)) {
        result.per_sentence[k].push_back(f);
        placed = true;
        break;
      }
    }
    if (!placed) result.unassigned.push_back(f);
  }
  return result;
}

}  // namespace etbox
