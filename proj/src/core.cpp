#include "etbox/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace etbox {

namespace {

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) {
    throw Error(ErrorKind::kValidation, std::string(field) + ": " + message,
                field);
  }
}

bool finite(double v) { return std::isfinite(v); }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "ValidationError";
    case ErrorKind::kUnsortedInput: return "UnsortedInput";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kFixationOutsideImage: return "FixationOutsideImage";
    case ErrorKind::kEllipseOutsideImage: return "EllipseOutsideImage";
    case ErrorKind::kUnknownLabel: return "UnknownLabel";
    case ErrorKind::kEmptyEvalSet: return "EmptyEvalSet";
    case ErrorKind::kMissingLabel: return "MissingLabel";
    case ErrorKind::kSchema: return "SchemaError";
    case ErrorKind::kRow: return "RowError";
    case ErrorKind::kIo: return "IoError";
  }
  return "Error";
}

Error::Error(ErrorKind kind, const std::string& message, std::string field)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
      kind_(kind),
      field_(std::move(field)) {}

ImageMeta::ImageMeta(std::string study_id_in, int width, int height)
    : study_id(std::move(study_id_in)), width_px(width), height_px(height) {
  require(!study_id.empty(), "study_id", "must be non-empty");
  require(width_px >= 1, "width_px", "must be >= 1");
  require(height_px >= 1, "height_px", "must be >= 1");
}

Fixation::Fixation(double x, double y, double t_start, double t_end)
    : x_px(x), y_px(y), t_start_s(t_start), t_end_s(t_end) {
  require(finite(x_px), "x_px", "must be finite");
  require(finite(y_px), "y_px", "must be finite");
  require(finite(t_start_s), "t_start_s", "must be finite");
  require(finite(t_end_s) && t_end_s > t_start_s, "t_end_s",
          "must be greater than t_start_s");
}

SentenceSpan::SentenceSpan(int index, std::string text_in, double t_start,
                           double t_end)
    : sentence_index(index),
      text(std::move(text_in)),
      t_start_s(t_start),
      t_end_s(t_end) {
  require(sentence_index >= 0, "sentence_index", "must be >= 0");
  require(finite(t_start_s), "t_start_s", "must be finite");
  require(finite(t_end_s) && t_end_s > t_start_s, "t_end_s",
          "must be greater than t_start_s");
}

void validate_sentence_order(const std::vector<SentenceSpan>& sentences) {
  for (std::size_t i = 1; i < sentences.size(); ++i) {
    const auto& prev = sentences[i - 1];
    const auto& cur = sentences[i];
    if (cur.t_start_s < prev.t_start_s || cur.t_start_s < prev.t_end_s) {
      throw Error(ErrorKind::kUnsortedInput,
                  "sentence " + std::to_string(cur.sentence_index) +
                      " starts before sentence " +
                      std::to_string(prev.sentence_index) + " ends",
                  "t_start_s");
    }
  }
}

BoundingBox::BoundingBox(int x_min, int y_min, int x_max, int y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  require(x_min_ < x_max_, "x_max", "must be greater than x_min");
  require(y_min_ < y_max_, "y_max", "must be greater than y_min");
}

std::int64_t box_area(const BoundingBox& b) {
  return static_cast<std::int64_t>(b.width()) * b.height();
}

std::optional<BoundingBox> intersect(const BoundingBox& a,
                                     const BoundingBox& b) {
  const int x0 = std::max(a.x_min(), b.x_min());
  const int y0 = std::max(a.y_min(), b.y_min());
  const int x1 = std::min(a.x_max(), b.x_max());
  const int y1 = std::min(a.y_max(), b.y_max());
  if (x0 >= x1 || y0 >= y1) return std::nullopt;
  return BoundingBox(x0, y0, x1, y1);
}

std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const auto overlap = intersect(a, b);
  return overlap ? box_area(*overlap) : 0;
}

BoundingBox bind_to_image(const BoundingBox& b, const ImageMeta& meta) {
  require(b.x_min() >= 0, "x_min", "must be >= 0");
  require(b.y_min() >= 0, "y_min", "must be >= 0");
  require(b.x_max() <= meta.width_px, "x_max", "must be <= width_px");
  require(b.y_max() <= meta.height_px, "y_max", "must be <= height_px");
  return b;
}

Heatmap::Heatmap(int width_px, int height_px)
    : Heatmap(width_px, height_px,
              std::vector<double>(static_cast<std::size_t>(
                                      std::max(width_px, 0)) *
                                  static_cast<std::size_t>(
                                      std::max(height_px, 0)))) {}

Heatmap::Heatmap(int width_px, int height_px, std::vector<double> values)
    : width_(width_px), height_(height_px), values_(std::move(values)) {
  require(width_ >= 1, "width_px", "must be >= 1");
  require(height_ >= 1, "height_px", "must be >= 1");
  require(values_.size() == static_cast<std::size_t>(width_) * height_,
          "values", "size must equal width_px * height_px");
  for (double v : values_) {
    require(v >= 0.0 && finite(v), "values", "must be finite and >= 0");
  }
}

double Heatmap::max_value() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, v);
  return m;
}

AnnotatedEllipse::AnnotatedEllipse(double cx, double cy, double ax, double ay,
                                   std::set<std::string> labels_in,
                                   int certainty_in)
    : center_x_px(cx),
      center_y_px(cy),
      semi_axis_x_px(ax),
      semi_axis_y_px(ay),
      labels(std::move(labels_in)),
      certainty(certainty_in) {
  require(finite(center_x_px), "center_x_px", "must be finite");
  require(finite(center_y_px), "center_y_px", "must be finite");
  require(finite(semi_axis_x_px) && semi_axis_x_px > 0, "semi_axis_x_px",
          "must be > 0");
  require(finite(semi_axis_y_px) && semi_axis_y_px > 0, "semi_axis_y_px",
          "must be > 0");
  require(!labels.empty(), "labels", "must be non-empty");
  require(certainty >= 1 && certainty <= 5, "certainty", "must be in 1..5");
}

const char* source_name(TripletSource source) {
  return source == TripletSource::kEt ? "ET" : "ANNOTATION";
}

GroundingTriplet::GroundingTriplet(std::string study, BoundingBox b,
                                   std::string text, TripletSource src,
                                   std::optional<int> index)
    : study_id(std::move(study)),
      box(b),
      statement(std::move(text)),
      source(src),
      sentence_index(index) {
  require(!study_id.empty(), "study_id", "must be non-empty");
  require(!statement.empty(), "statement", "must be non-empty");
  require(sentence_index.has_value() == (source == TripletSource::kEt),
          "sentence_index", "present iff source is ET");
}

DetectionTriplet::DetectionTriplet(std::string study, BoundingBox b,
                                   std::string label_in)
    : study_id(std::move(study)), box(b), label(std::move(label_in)) {
  require(!study_id.empty(), "study_id", "must be non-empty");
  require(!label.empty(), "label", "must be non-empty");
}

void PipelineConfig::validate() const {
  require(finite(psi_s) && psi_s >= 0, "psi_s", "must be >= 0");
  require(!sigma_px || (finite(*sigma_px) && *sigma_px > 0), "sigma_px",
          "must be > 0");
  require(threshold_frac > 0 && threshold_frac < 1, "threshold_frac",
          "must be in (0,1)");
  require(min_area_frac > 0 && min_area_frac < 1, "min_area_frac",
          "must be in (0,1)");
}

double PipelineConfig::sigma_for(const ImageMeta& meta) const {
  return sigma_px ? *sigma_px : meta.width_px / 20.0;
}

std::string PipelineConfig::canonical_text() const {
  std::ostringstream out;
  out << "psi_s=" << format_double(psi_s) << "\n";
  out << "sigma_px=" << (sigma_px ? format_double(*sigma_px) : "width/20")
      << "\n";
  out << "threshold_frac=" << format_double(threshold_frac) << "\n";
  out << "min_area_frac=" << format_double(min_area_frac) << "\n";
  out << "connectivity="
      << (connectivity == Connectivity::kEight ? "eight" : "four") << "\n";
  out << "assignment_mode="
      << (assignment_mode == AssignmentMode::kContainment ? "containment"
                                                          : "overlap")
      << "\n";
  out << "seed=" << seed << "\n";
  return out.str();
}

std::string PipelineConfig::fingerprint() const {
  return hex64(stable_hash(canonical_text()));
}

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace etbox
