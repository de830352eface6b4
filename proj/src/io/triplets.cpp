#include "etbox/io/triplets.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "etbox/io/formats.hpp"

namespace etbox::io {

namespace {

using ordered_json = nlohmann::ordered_json;

int primary_sentence(const TripletRecord& r) {
  if (r.sentence_index) return *r.sentence_index;
  if (!r.sentence_indices.empty()) return r.sentence_indices.front();
  return -1;
}

}  // namespace

TripletRecord to_record(const GroundingTriplet& t,
                        const std::string& fingerprint) {
  TripletRecord r;
  r.study_id = t.study_id;
  r.box = t.box;
  r.statement = t.statement;
  r.source = source_name(t.source);
  r.sentence_index = t.sentence_index;
  r.sentence_indices = t.sentence_indices;
  r.labels = t.labels;
  r.certainty = t.certainty;
  r.config_fingerprint = fingerprint;
  return r;
}

TripletRecord to_record(const DetectionTriplet& t,
                        const std::string& fingerprint) {
  TripletRecord r;
  r.study_id = t.study_id;
  r.box = t.box;
  r.label = t.label;
  r.source = source_name(TripletSource::kAnnotation);
  r.sentence_indices = t.sentence_indices;
  r.certainty = t.certainty;
  r.config_fingerprint = fingerprint;
  return r;
}

void sort_records(std::vector<TripletRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const TripletRecord& a, const TripletRecord& b) {
                     const auto sa = primary_sentence(a);
                     const auto sb = primary_sentence(b);
                     const auto la = a.label.value_or("");
                     const auto lb = b.label.value_or("");
                     const auto ta = a.statement.value_or("");
                     const auto tb = b.statement.value_or("");
                     return std::tie(a.study_id, sa, la, ta, a.box, a.source) <
                            std::tie(b.study_id, sb, lb, tb, b.box, b.source);
                   });
}

std::string record_to_line(const TripletRecord& r) {
  ordered_json j;
  j["study_id"] = r.study_id;
  j["box"] = {r.box.x_min(), r.box.y_min(), r.box.x_max(), r.box.y_max()};
  if (r.statement) j["statement"] = *r.statement;
  if (r.label) j["label"] = *r.label;
  j["source"] = r.source;
  if (r.sentence_index) j["sentence_index"] = *r.sentence_index;
  if (!r.sentence_indices.empty()) j["sentence_indices"] = r.sentence_indices;
  if (!r.labels.empty()) {
    j["labels"] = std::vector<std::string>(r.labels.begin(), r.labels.end());
  }
  if (r.certainty) j["certainty"] = *r.certainty;
  if (r.score) j["score"] = *r.score;
  if (r.sigma_px) j["sigma_px"] = *r.sigma_px;
  if (!r.config_fingerprint.empty()) {
    j["config_fingerprint"] = r.config_fingerprint;
  }
  return j.dump();
}

TripletRecord record_from_line(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kRow, std::string("invalid JSON: ") + e.what());
  }
  try {
    TripletRecord r;
    r.study_id = j.at("study_id").get<std::string>();
    const auto box = j.at("box").get<std::vector<int>>();
    if (box.size() != 4) {
      throw Error(ErrorKind::kValidation, "box must have 4 coordinates",
                  "box");
    }
    r.box = BoundingBox(box[0], box[1], box[2], box[3]);
    if (j.contains("statement")) r.statement = j["statement"].get<std::string>();
    if (j.contains("label")) r.label = j["label"].get<std::string>();
    r.source = j.value("source", std::string());
    if (j.contains("sentence_index")) {
      r.sentence_index = j["sentence_index"].get<int>();
    }
    if (j.contains("sentence_indices")) {
      r.sentence_indices = j["sentence_indices"].get<std::vector<int>>();
    }
    if (j.contains("labels")) {
      const auto labels = j["labels"].get<std::vector<std::string>>();
      r.labels.insert(labels.begin(), labels.end());
    }
    if (j.contains("certainty")) r.certainty = j["certainty"].get<int>();
    if (j.contains("score")) r.score = j["score"].get<double>();
    if (j.contains("sigma_px")) r.sigma_px = j["sigma_px"].get<double>();
    r.config_fingerprint = j.value("config_fingerprint", std::string());
    if (r.study_id.empty()) {
      throw Error(ErrorKind::kValidation, "empty study_id", "study_id");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kRow, std::string("bad triplet record: ") + e.what());
  }
}

std::string format_triplets(std::vector<TripletRecord> records) {
  sort_records(records);
  std::string out;
  for (const auto& r : records) {
    out += record_to_line(r);
    out += '\n';
  }
  return out;
}

void write_triplets(std::vector<TripletRecord> records,
                    const std::string& path) {
  write_file(path, format_triplets(std::move(records)));
}

std::vector<TripletRecord> parse_triplets(const std::string& text) {
  std::vector<TripletRecord> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_line(line));
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what(),
                  e.field());
    }
  }
  return out;
}

std::vector<TripletRecord> read_triplets(const std::string& path) {
  return parse_triplets(read_file(path));
}

}  // namespace etbox::io
