#pragma once

#include <string>
#include <vector>

#include "etbox/io/triplets.hpp"
#include "etbox/metrics.hpp"

namespace etbox::io {

enum class EvalMode {
  // Predictions carry the ground-truth statement; one prediction per statement.
  kPhraseGrounding,
  // Predictions carry a label and score; matched greedily per study.
  kDetection,
};

struct EvalInputs {
  EvalMode mode = EvalMode::kPhraseGrounding;
  std::vector<TripletRecord> ground_truth;
  std::vector<TripletRecord> predictions;
  // ET boxes keyed by sentence_index; either may be empty.
  std::vector<TripletRecord> gt_et;
  std::vector<TripletRecord> pred_et;
  bool label_gating = true;
  std::vector<double> thresholds = {0.3, 0.5};
};

inline constexpr const char* kGtEtSource = "GT";
inline constexpr const char* kPredEtSource = "Pred";
inline constexpr const char* kAnnotationSource = "Radiologists' annotations";
inline constexpr const char* kPredictionSource = "Predictions";

// Containment of ground-truth boxes in ET boxes alone (no predictions).
CrReport annotation_cr(const std::vector<TripletRecord>& ground_truth,
                       const std::vector<TripletRecord>& gt_et);

MetricsReport run_eval(const EvalInputs& inputs);

// Stable key order; thresholds printed with two decimals.
std::string report_to_json(const MetricsReport& report, EvalMode mode);
// Class table plus CR table for terminals.
std::string report_to_table(const MetricsReport& report);

}  // namespace etbox::io
