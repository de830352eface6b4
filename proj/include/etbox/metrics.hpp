#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etbox/core.hpp"

namespace etbox {

struct EvalPair {
  std::string study_id;
  BoundingBox gt_box;
  std::optional<BoundingBox> pred_box;
  std::optional<std::string> label;
  std::optional<std::string> statement;
  // Report sentences the ground truth is tied to; used to find ET containers.
  std::vector<int> sentence_indices;

  EvalPair(std::string study_id, BoundingBox gt_box,
           std::optional<BoundingBox> pred_box,
           std::optional<std::string> label,
           std::optional<std::string> statement);

  double iou() const;
};

double iou(const BoundingBox& a, const BoundingBox& b);

// |container ∩ contained| / |contained|
double containment_ratio(const BoundingBox& container,
                         const BoundingBox& contained);

// Fraction of `contained` covered by the union of `containers`.
double containment_ratio(const std::vector<BoundingBox>& containers,
                         const BoundingBox& contained);

double accuracy_at(const std::vector<EvalPair>& pairs, double tau);

double miou_per_box(const std::vector<EvalPair>& pairs);

struct PerClassIou {
  std::map<std::string, double> per_class;
  std::map<std::string, std::size_t> counts;
  double mean = 0.0;
};

PerClassIou miou_per_class(const std::vector<EvalPair>& pairs);

struct Prediction {
  BoundingBox box;
  std::string label;
  double score = 0.0;
};

struct GroundTruth {
  BoundingBox box;
  std::string label;
  std::vector<int> sentence_indices;
};

// Greedy one-to-one matching within one image. Candidate (gt, pred) pairs with
// positive IoU are visited by descending prediction score, then descending
// IoU, then ascending prediction index, then ascending GT index. Output is
// parallel to `gts`; unmatched ground truth carries no prediction.
std::vector<EvalPair> greedy_match(const std::string& study_id,
                                   const std::vector<Prediction>& predictions,
                                   const std::vector<GroundTruth>& gts,
                                   bool label_gating = true);

struct CrContainer {
  std::string source;
  std::string study_id;
  std::string key;
  BoundingBox box;
};

struct CrContained {
  std::string source;
  std::string study_id;
  std::vector<std::string> keys;
  BoundingBox box;
};

struct CrRow {
  std::string container_source;
  std::string contained_source;
  double mean_cr = 0.0;
  std::size_t count = 0;
};

struct CrReport {
  std::vector<CrRow> rows;
  std::vector<std::string> warnings;
};

// For every contained box and every container source, the containers of that
// source sharing the study and any key form one region; the row value is the
// mean coverage of contained boxes by their region. Orphans on either side
// produce a warning and are left out of the means.
CrReport cr_report(const std::vector<CrContainer>& containers,
                   const std::vector<CrContained>& contained);

struct MetricsReport {
  std::map<std::string, double> per_class_iou;
  std::map<std::string, std::size_t> class_counts;
  std::optional<double> miou_per_class;
  double miou_per_box = 0.0;
  std::map<double, double> acc_at;
  std::size_t pair_count = 0;
  std::size_t missing_predictions = 0;
  std::vector<CrRow> cr_table;
  std::vector<std::string> warnings;
};

// Per-box and accuracy figures come from `pairs`. Class figures come from
// `class_pairs` when given (e.g. one entry per label of multi-label ground
// truth), otherwise from `pairs` when every pair is labeled.
MetricsReport evaluate(const std::vector<EvalPair>& pairs,
                       const std::vector<double>& thresholds = {0.3, 0.5},
                       const std::vector<EvalPair>* class_pairs = nullptr);

}  // namespace etbox
