#include "etbox/io/evaluate.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace etbox::io {

namespace {

std::vector<int> sentence_keys(const TripletRecord& r) {
  if (!r.sentence_indices.empty()) return r.sentence_indices;
  if (r.sentence_index) return {*r.sentence_index};
  return {};
}

std::string key_of(int sentence_index) {
  return "s" + std::to_string(sentence_index);
}

std::vector<std::string> keys_of(const std::vector<int>& indices) {
  std::vector<std::string> keys;
  for (int i : indices) keys.push_back(key_of(i));
  return keys;
}

std::vector<CrContainer> containers_from(const std::vector<TripletRecord>& et,
                                         const char* source) {
  std::vector<CrContainer> out;
  for (const auto& r : et) {
    if (!r.sentence_index) {
      throw Error(ErrorKind::kValidation,
                  "ET record in " + r.study_id + " lacks sentence_index",
                  "sentence_index");
    }
    out.push_back({source, r.study_id, key_of(*r.sentence_index), r.box});
  }
  return out;
}

// Multi-label ground truth repeats a box once per label; keep one.
void add_contained(std::vector<CrContained>& out,
                   std::set<std::tuple<std::string, BoundingBox, std::vector<int>>>& seen,
                   const char* source, const std::string& study,
                   const BoundingBox& box, const std::vector<int>& indices) {
  if (!seen.emplace(study, box, indices).second) return;
  out.push_back({source, study, keys_of(indices), box});
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

CrReport annotation_cr(const std::vector<TripletRecord>& ground_truth,
                       const std::vector<TripletRecord>& gt_et) {
  std::vector<CrContained> contained;
  std::set<std::tuple<std::string, BoundingBox, std::vector<int>>> seen;
  for (const auto& g : ground_truth) {
    add_contained(contained, seen, kAnnotationSource, g.study_id, g.box,
                  sentence_keys(g));
  }
  return cr_report(containers_from(gt_et, kGtEtSource), contained);
}

MetricsReport run_eval(const EvalInputs& in) {
  std::vector<EvalPair> pairs;
  std::vector<EvalPair> class_pairs;
  bool classes_complete = true;

  if (in.mode == EvalMode::kPhraseGrounding) {
    std::map<std::pair<std::string, std::string>, const TripletRecord*> best;
    for (const auto& p : in.predictions) {
      if (!p.statement) {
        throw Error(ErrorKind::kValidation,
                    "PG prediction in " + p.study_id + " lacks a statement",
                    "statement");
      }
      auto& slot = best[{p.study_id, *p.statement}];
      if (!slot || p.score.value_or(0.0) > slot->score.value_or(0.0)) {
        slot = &p;
      }
    }
    for (const auto& g : in.ground_truth) {
      if (!g.statement) {
        throw Error(ErrorKind::kValidation,
                    "PG ground truth in " + g.study_id + " lacks a statement",
                    "statement");
      }
      std::optional<BoundingBox> pred;
      if (auto it = best.find({g.study_id, *g.statement}); it != best.end()) {
        pred = it->second->box;
      }
      EvalPair pair(g.study_id, g.box, pred, g.label, g.statement);
      pair.sentence_indices = sentence_keys(g);
      std::set<std::string> labels = g.labels;
      if (g.label) labels.insert(*g.label);
      if (labels.empty()) classes_complete = false;
      for (const auto& label : labels) {
        EvalPair per_label = pair;
        per_label.label = label;
        class_pairs.push_back(std::move(per_label));
      }
      pairs.push_back(std::move(pair));
    }
  } else {
    std::map<std::string, std::vector<GroundTruth>> gts;
    std::map<std::string, std::vector<Prediction>> preds;
    for (const auto& g : in.ground_truth) {
      if (!g.label) {
        throw Error(ErrorKind::kMissingLabel,
                    "detection ground truth in " + g.study_id +
                        " lacks a label",
                    "label");
      }
      gts[g.study_id].push_back({g.box, *g.label, sentence_keys(g)});
    }
    for (const auto& p : in.predictions) {
      if (!p.label) {
        throw Error(ErrorKind::kMissingLabel,
                    "detection prediction in " + p.study_id +
                        " lacks a label",
                    "label");
      }
      preds[p.study_id].push_back({p.box, *p.label, p.score.value_or(0.0)});
    }
    for (const auto& [study, study_gts] : gts) {
      const auto it = preds.find(study);
      const std::vector<Prediction> none;
      auto matched = greedy_match(study, it == preds.end() ? none : it->second,
                                  study_gts, in.label_gating);
      for (auto& p : matched) pairs.push_back(std::move(p));
    }
    class_pairs = pairs;
  }

  auto report = evaluate(pairs, in.thresholds,
                         classes_complete ? &class_pairs : nullptr);

  if (!in.gt_et.empty() || !in.pred_et.empty()) {
    auto containers = containers_from(in.gt_et, kGtEtSource);
    const auto pred_containers = containers_from(in.pred_et, kPredEtSource);
    containers.insert(containers.end(), pred_containers.begin(),
                      pred_containers.end());
    std::vector<CrContained> contained;
    std::set<std::tuple<std::string, BoundingBox, std::vector<int>>> seen_gt;
    std::set<std::tuple<std::string, BoundingBox, std::vector<int>>> seen_pred;
    for (const auto& p : pairs) {
      add_contained(contained, seen_gt, kAnnotationSource, p.study_id,
                    p.gt_box, p.sentence_indices);
    }
    for (const auto& p : pairs) {
      if (!p.pred_box) continue;
      add_contained(contained, seen_pred, kPredictionSource, p.study_id,
                    *p.pred_box, p.sentence_indices);
    }
    auto cr = cr_report(containers, contained);
    report.cr_table = std::move(cr.rows);
    report.warnings = std::move(cr.warnings);
  }
  return report;
}

std::string report_to_json(const MetricsReport& report, EvalMode mode) {
  nlohmann::ordered_json j;
  j["mode"] = mode == EvalMode::kPhraseGrounding ? "pg" : "od";
  j["pairs"] = report.pair_count;
  j["missing_predictions"] = report.missing_predictions;
  j["miou_per_box"] = report.miou_per_box;
  if (report.miou_per_class) {
    j["miou_per_class"] = *report.miou_per_class;
  } else {
    j["miou_per_class"] = nullptr;
  }
  nlohmann::ordered_json acc = nlohmann::ordered_json::object();
  for (const auto& [tau, value] : report.acc_at) acc[fixed(tau, 2)] = value;
  j["accuracy_at"] = acc;
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (const auto& [label, value] : report.per_class_iou) {
    classes[label] = {{"iou", value}, {"count", report.class_counts.at(label)}};
  }
  j["per_class"] = classes;
  nlohmann::ordered_json cr = nlohmann::ordered_json::array();
  for (const auto& row : report.cr_table) {
    cr.push_back({{"container", row.container_source},
                  {"contained", row.contained_source},
                  {"cr", row.mean_cr},
                  {"count", row.count}});
  }
  j["cr_table"] = cr;
  j["warnings"] = report.warnings.size();
  return j.dump(2) + "\n";
}

std::string report_to_table(const MetricsReport& report) {
  std::ostringstream out;
  if (!report.per_class_iou.empty()) {
    out << "Label                                   #Labels   IoU (%)\n";
    for (const auto& [label, value] : report.per_class_iou) {
      char line[160];
      std::snprintf(line, sizeof(line), "%-40s %7zu  %8s\n", label.c_str(),
                    report.class_counts.at(label),
                    fixed(100.0 * value, 2).c_str());
      out << line;
    }
    out << "mIoU (per class)                                 "
        << fixed(100.0 * report.miou_per_class.value_or(0.0), 2) << "\n";
  }
  out << "mIoU (per box)                                   "
      << fixed(100.0 * report.miou_per_box, 2) << "\n";
  for (const auto& [tau, value] : report.acc_at) {
    out << "Acc@" << fixed(tau, 1) << "                                          "
        << fixed(100.0 * value, 2) << "\n";
  }
  if (!report.cr_table.empty()) {
    out << "\nContaining BB (ET)  Contained BB (Abn.)          CR (%)   n\n";
    for (const auto& row : report.cr_table) {
      char line[200];
      std::snprintf(line, sizeof(line), "%-19s %-28s %6s  %zu\n",
                    row.container_source.c_str(),
                    row.contained_source.c_str(),
                    fixed(100.0 * row.mean_cr, 2).c_str(), row.count);
      out << line;
    }
  }
  return out.str();
}

}  // namespace etbox::io
