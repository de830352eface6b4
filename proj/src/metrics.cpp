#include "etbox/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

namespace etbox {

namespace {

void require_nonempty(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) {
    throw Error(ErrorKind::kEmptyEvalSet, "no evaluation pairs");
  }
}

// Area of the union of boxes by coordinate compression.
std::int64_t union_area(const std::vector<BoundingBox>& boxes) {
  if (boxes.empty()) return 0;
  std::vector<int> xs, ys;
  for (const auto& b : boxes) {
    xs.push_back(b.x_min());
    xs.push_back(b.x_max());
    ys.push_back(b.y_min());
    ys.push_back(b.y_max());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::int64_t area = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const bool covered =
          std::any_of(boxes.begin(), boxes.end(), [&](const BoundingBox& b) {
            return b.x_min() <= xs[i] && xs[i + 1] <= b.x_max() &&
                   b.y_min() <= ys[j] && ys[j + 1] <= b.y_max();
          });
      if (covered) {
        area += static_cast<std::int64_t>(xs[i + 1] - xs[i]) *
                (ys[j + 1] - ys[j]);
      }
    }
  }
  return area;
}

}  // namespace

EvalPair::EvalPair(std::string study, BoundingBox gt,
                   std::optional<BoundingBox> pred,
                   std::optional<std::string> label_in,
                   std::optional<std::string> statement_in)
    : study_id(std::move(study)),
      gt_box(gt),
      pred_box(pred),
      label(std::move(label_in)),
      statement(std::move(statement_in)) {
  if (!label && !statement) {
    throw Error(ErrorKind::kValidation,
                "eval pair needs a label or a statement", "label");
  }
}

double EvalPair::iou() const {
  return pred_box ? etbox::iou(gt_box, *pred_box) : 0.0;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const std::int64_t inter = intersection_area(a, b);
  const std::int64_t uni = box_area(a) + box_area(b) - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double containment_ratio(const BoundingBox& container,
                         const BoundingBox& contained) {
  return static_cast<double>(intersection_area(container, contained)) /
         static_cast<double>(box_area(contained));
}

double containment_ratio(const std::vector<BoundingBox>& containers,
                         const BoundingBox& contained) {
  std::vector<BoundingBox> clipped;
  for (const auto& c : containers) {
    if (auto overlap = intersect(c, contained)) clipped.push_back(*overlap);
  }
  return static_cast<double>(union_area(clipped)) /
         static_cast<double>(box_area(contained));
}

double accuracy_at(const std::vector<EvalPair>& pairs, double tau) {
  require_nonempty(pairs);
  const auto hits = std::count_if(pairs.begin(), pairs.end(),
                                  [&](const EvalPair& p) {
                                    return p.iou() >= tau;
                                  });
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double miou_per_box(const std::vector<EvalPair>& pairs) {
  require_nonempty(pairs);
  // Summed in extended precision and rounded once, so that e.g. the mean of
  // 0.2, 0.4 and 0.9 comes out as exactly 0.5.
  long double sum = 0.0L;
  for (const auto& p : pairs) sum += p.iou();
  return static_cast<double>(sum / static_cast<long double>(pairs.size()));
}

PerClassIou miou_per_class(const std::vector<EvalPair>& pairs) {
  require_nonempty(pairs);
  std::map<std::string, long double> sums;
  PerClassIou out;
  for (const auto& p : pairs) {
    if (!p.label) {
      throw Error(ErrorKind::kMissingLabel,
                  "pair in study " + p.study_id + " has no label", "label");
    }
    sums[*p.label] += p.iou();
    ++out.counts[*p.label];
  }
  long double total = 0.0L;
  for (const auto& [label, sum] : sums) {
    const long double mean =
        sum / static_cast<long double>(out.counts[label]);
    out.per_class[label] = static_cast<double>(mean);
    total += mean;
  }
  out.mean = static_cast<double>(
      total / static_cast<long double>(out.per_class.size()));
  return out;
}

std::vector<EvalPair> greedy_match(const std::string& study_id,
                                   const std::vector<Prediction>& predictions,
                                   const std::vector<GroundTruth>& gts,
                                   bool label_gating) {
  struct Candidate {
    std::size_t gt;
    std::size_t pred;
    double score;
    double overlap;
  };
  std::vector<Candidate> candidates;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t p = 0; p < predictions.size(); ++p) {
      if (label_gating && predictions[p].label != gts[g].label) continue;
      const double overlap = iou(gts[g].box, predictions[p].box);
      if (overlap <= 0.0) continue;
      candidates.push_back({g, p, predictions[p].score, overlap});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return std::make_tuple(-a.score, -a.overlap, a.pred, a.gt) <
                     std::make_tuple(-b.score, -b.overlap, b.pred, b.gt);
            });

  std::vector<std::optional<std::size_t>> match(gts.size());
  std::vector<bool> used(predictions.size(), false);
  for (const auto& c : candidates) {
    if (match[c.gt] || used[c.pred]) continue;
    match[c.gt] = c.pred;
    used[c.pred] = true;
  }

  std::vector<EvalPair> pairs;
  pairs.reserve(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    std::optional<BoundingBox> pred;
    if (match[g]) pred = predictions[*match[g]].box;
    EvalPair pair(study_id, gts[g].box, pred, gts[g].label, std::nullopt);
    pair.sentence_indices = gts[g].sentence_indices;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

CrReport cr_report(const std::vector<CrContainer>& containers,
                   const std::vector<CrContained>& contained) {
  CrReport report;
  std::vector<std::string> container_sources;
  for (const auto& c : containers) {
    if (std::find(container_sources.begin(), container_sources.end(),
                  c.source) == container_sources.end()) {
      container_sources.push_back(c.source);
    }
  }

  struct Acc {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, Acc> acc;
  std::vector<bool> container_used(containers.size(), false);

  for (const auto& item : contained) {
    for (const auto& source : container_sources) {
      std::vector<BoundingBox> region;
      for (std::size_t i = 0; i < containers.size(); ++i) {
        const auto& c = containers[i];
        if (c.source != source || c.study_id != item.study_id) continue;
        if (std::find(item.keys.begin(), item.keys.end(), c.key) ==
            item.keys.end()) {
          continue;
        }
        region.push_back(c.box);
        container_used[i] = true;
      }
      if (region.empty()) {
        std::string keys;
        for (const auto& k : item.keys) keys += (keys.empty() ? "" : ",") + k;
        report.warnings.push_back("UnpairableEntry: " + item.source + " box in " +
                                  item.study_id + " [" + keys +
                                  "] has no " + source + " container");
        continue;
      }
      const auto row_key = std::make_pair(source, item.source);
      if (!acc.count(row_key)) order.push_back(row_key);
      auto& a = acc[row_key];
      a.sum += containment_ratio(region, item.box);
      ++a.count;
    }
  }
  for (std::size_t i = 0; i < containers.size(); ++i) {
    if (container_used[i]) continue;
    const auto& c = containers[i];
    report.warnings.push_back("UnpairableEntry: " + c.source +
                              " container in " + c.study_id + " [" + c.key +
                              "] contains nothing");
  }
  for (const auto& key : order) {
    const auto& a = acc[key];
    report.rows.push_back(CrRow{key.first, key.second,
                                a.sum / static_cast<double>(a.count),
                                a.count});
  }
  return report;
}

MetricsReport evaluate(const std::vector<EvalPair>& pairs,
                       const std::vector<double>& thresholds,
                       const std::vector<EvalPair>* class_pairs) {
  require_nonempty(pairs);
  MetricsReport report;
  report.pair_count = pairs.size();
  report.missing_predictions = static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(),
                    [](const EvalPair& p) { return !p.pred_box; }));
  report.miou_per_box = miou_per_box(pairs);
  for (double tau : thresholds) report.acc_at[tau] = accuracy_at(pairs, tau);
  const auto& labeled = class_pairs ? *class_pairs : pairs;
  const bool all_labeled =
      !labeled.empty() &&
      std::all_of(labeled.begin(), labeled.end(),
                  [](const EvalPair& p) { return p.label.has_value(); });
  if (all_labeled) {
    auto per_class = miou_per_class(labeled);
    report.per_class_iou = std::move(per_class.per_class);
    report.class_counts = std::move(per_class.counts);
    report.miou_per_class = per_class.mean;
  }
  return report;
}

}  // namespace etbox
