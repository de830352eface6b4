#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "etbox/core.hpp"

namespace etbox::io {

// One line of a triplet file. Grounding, detection and prediction records
// share this shape; absent optionals are omitted from the serialized line.
struct TripletRecord {
  std::string study_id;
  BoundingBox box{0, 0, 1, 1};
  std::optional<std::string> statement;
  std::optional<std::string> label;
  std::string source;
  std::optional<int> sentence_index;
  std::vector<int> sentence_indices;
  std::set<std::string> labels;
  std::optional<int> certainty;
  std::optional<double> score;
  // Gaussian spread used for ET boxes.
  std::optional<double> sigma_px;
  std::string config_fingerprint;

  friend bool operator==(const TripletRecord&, const TripletRecord&) = default;
};

TripletRecord to_record(const GroundingTriplet& t,
                        const std::string& fingerprint);
TripletRecord to_record(const DetectionTriplet& t,
                        const std::string& fingerprint);

// Canonical order: study, sentence index (single or first of the list),
// label, statement, box, source.
void sort_records(std::vector<TripletRecord>& records);

std::string record_to_line(const TripletRecord& r);
TripletRecord record_from_line(const std::string& line);

// Sorts, then writes one JSON object per line.
void write_triplets(std::vector<TripletRecord> records,
                    const std::string& path);
std::string format_triplets(std::vector<TripletRecord> records);
std::vector<TripletRecord> read_triplets(const std::string& path);
std::vector<TripletRecord> parse_triplets(const std::string& text);

}  // namespace etbox::io
