#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace etbox {

enum class ErrorKind {
  kValidation,
  kUnsortedInput,
  kDimensionMismatch,
  kFixationOutsideImage,
  kEllipseOutsideImage,
  kUnknownLabel,
  kEmptyEvalSet,
  kMissingLabel,
  kSchema,
  kRow,
  kIo,
};

const char* error_kind_name(ErrorKind kind);

// Single exception type for the library; `kind` distinguishes the failure and
// `field` names the offending field for validation errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string field = {});

  ErrorKind kind() const { return kind_; }
  const std::string& field() const { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

struct ImageMeta {
  std::string study_id;
  int width_px = 0;
  int height_px = 0;

  ImageMeta() = default;
  ImageMeta(std::string study_id, int width_px, int height_px);

  double area() const {
    return static_cast<double>(width_px) * static_cast<double>(height_px);
  }
  bool contains_point(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x < width_px && y < height_px;
  }

  friend bool operator==(const ImageMeta&, const ImageMeta&) = default;
};

struct Fixation {
  double x_px = 0.0;
  double y_px = 0.0;
  double t_start_s = 0.0;
  double t_end_s = 0.0;

  Fixation() = default;
  Fixation(double x_px, double y_px, double t_start_s, double t_end_s);

  double duration_s() const { return t_end_s - t_start_s; }

  friend bool operator==(const Fixation&, const Fixation&) = default;
};

struct SentenceSpan {
  int sentence_index = 0;
  std::string text;
  double t_start_s = 0.0;
  double t_end_s = 0.0;

  SentenceSpan() = default;
  SentenceSpan(int sentence_index, std::string text, double t_start_s,
               double t_end_s);

  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

// Spans must be ascending by start and pairwise non-overlapping.
void validate_sentence_order(const std::vector<SentenceSpan>& sentences);

// Half-open integer pixel rectangle: covers x_min <= x < x_max and
// y_min <= y < y_max. Never empty.
class BoundingBox {
 public:
  BoundingBox(int x_min, int y_min, int x_max, int y_max);

  int x_min() const { return x_min_; }
  int y_min() const { return y_min_; }
  int x_max() const { return x_max_; }
  int y_max() const { return y_max_; }
  int width() const { return x_max_ - x_min_; }
  int height() const { return y_max_ - y_min_; }

  bool contains_pixel(int x, int y) const {
    return x >= x_min_ && x < x_max_ && y >= y_min_ && y < y_max_;
  }
  bool contains(const BoundingBox& other) const {
    return other.x_min_ >= x_min_ && other.y_min_ >= y_min_ &&
           other.x_max_ <= x_max_ && other.y_max_ <= y_max_;
  }
  bool fits(const ImageMeta& meta) const {
    return x_min_ >= 0 && y_min_ >= 0 && x_max_ <= meta.width_px &&
           y_max_ <= meta.height_px;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
  friend auto operator<=>(const BoundingBox&, const BoundingBox&) = default;

 private:
  int x_min_;
  int y_min_;
  int x_max_;
  int y_max_;
};

std::int64_t box_area(const BoundingBox& b);

// Intersection of two boxes, or nothing when they share no pixel.
std::optional<BoundingBox> intersect(const BoundingBox& a,
                                     const BoundingBox& b);

std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b);

// Validates that `b` lies inside the image and returns it.
BoundingBox bind_to_image(const BoundingBox& b, const ImageMeta& meta);

// Dense row-major intensity grid. Values are non-negative reals.
class Heatmap {
 public:
  Heatmap() = default;
  Heatmap(int width_px, int height_px);
  Heatmap(int width_px, int height_px, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

  double at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  double& at(int x, int y) {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  double max_value() const;
  bool all_zero() const { return max_value() == 0.0; }

  friend bool operator==(const Heatmap&, const Heatmap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

struct AnnotatedEllipse {
  double center_x_px = 0.0;
  double center_y_px = 0.0;
  double semi_axis_x_px = 0.0;
  double semi_axis_y_px = 0.0;
  std::set<std::string> labels;
  int certainty = 1;

  AnnotatedEllipse() = default;
  AnnotatedEllipse(double center_x_px, double center_y_px,
                   double semi_axis_x_px, double semi_axis_y_px,
                   std::set<std::string> labels, int certainty);

  friend bool operator==(const AnnotatedEllipse&,
                         const AnnotatedEllipse&) = default;
};

enum class TripletSource { kEt, kAnnotation };

const char* source_name(TripletSource source);

struct GroundingTriplet {
  std::string study_id;
  BoundingBox box;
  std::string statement;
  TripletSource source = TripletSource::kEt;
  std::optional<int> sentence_index;
  // Report sentences the statement was assembled from.
  std::vector<int> sentence_indices;
  std::set<std::string> labels;
  std::optional<int> certainty;

  GroundingTriplet(std::string study_id, BoundingBox box,
                   std::string statement, TripletSource source,
                   std::optional<int> sentence_index);

  friend bool operator==(const GroundingTriplet&,
                         const GroundingTriplet&) = default;
};

struct DetectionTriplet {
  std::string study_id;
  BoundingBox box;
  std::string label;
  std::optional<int> certainty;
  std::vector<int> sentence_indices;

  DetectionTriplet(std::string study_id, BoundingBox box, std::string label);

  friend bool operator==(const DetectionTriplet&,
                         const DetectionTriplet&) = default;
};

enum class Connectivity { kFour, kEight };
enum class AssignmentMode { kContainment, kOverlap };

struct PipelineConfig {
  double psi_s = 1.5;
  // Unset means width_px / 20 of the image being processed.
  std::optional<double> sigma_px;
  double threshold_frac = 0.4;
  double min_area_frac = 1.0 / 400.0;
  Connectivity connectivity = Connectivity::kEight;
  AssignmentMode assignment_mode = AssignmentMode::kContainment;
  std::uint64_t seed = 0;

  void validate() const;
  double sigma_for(const ImageMeta& meta) const;
  // Canonical key=value rendering; the fingerprint hashes this text.
  std::string canonical_text() const;
  std::string fingerprint() const;

  friend bool operator==(const PipelineConfig&,
                         const PipelineConfig&) = default;
};

// 64-bit FNV-1a; stable across platforms.
std::uint64_t stable_hash(std::string_view text);

std::string hex64(std::uint64_t value);

}  // namespace etbox
