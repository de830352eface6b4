#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etbox/core.hpp"

namespace etbox {

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width_px, int height_px);

  int width() const { return width_; }
  int height() const { return height_; }
  bool get(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool on = true) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0;
  }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  // True when every set pixel of this mask is also set in `other`.
  bool subset_of(const BinaryMask& other) const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<unsigned char> bits_;
};

struct ComponentStats {
  int component_id = 0;
  std::int64_t pixel_count = 0;
  BoundingBox box{0, 0, 1, 1};
};

struct NormalizedHeatmap {
  Heatmap map;
  bool empty = false;
};

// Duration-weighted isotropic Gaussian sampled at pixel centers, truncated at
// the image border without renormalization.
Heatmap render_fixation(const Fixation& f, const ImageMeta& meta,
                        double sigma_px);

// Elementwise sum in list order. An empty list yields an all-zero map of the
// given dimensions.
Heatmap accumulate(std::span<const Heatmap> maps, int width_px,
                   int height_px);

// Equivalent to accumulate() over render_fixation() of each fixation, bit for
// bit, without materializing the per-fixation maps.
Heatmap render_accumulated(std::span<const Fixation> fixations,
                           const ImageMeta& meta, double sigma_px);

NormalizedHeatmap normalize(const Heatmap& m);

BinaryMask threshold_mask(const Heatmap& normalized, double threshold_frac);

// Labels connected components in row-major scan order.
std::vector<ComponentStats> label_components(const BinaryMask& mask,
                                             Connectivity connectivity,
                                             std::vector<int>* labels = nullptr);

// Drops components whose pixel count is strictly below
// min_area_frac * width * height.
BinaryMask filter_components(const BinaryMask& mask, const ImageMeta& meta,
                             double min_area_frac, Connectivity connectivity);

std::optional<BoundingBox> enclosing_box(const BinaryMask& mask);

enum class NoBoxReason { kNone, kNoFixations, kEmptyAfterFilter };

const char* no_box_reason_name(NoBoxReason reason);

struct SentenceBoxResult {
  int sentence_index = 0;
  std::optional<BoundingBox> box;
  NoBoxReason reason = NoBoxReason::kNone;
  std::size_t fixation_count = 0;
  std::size_t mask_pixels_before_filter = 0;
  std::size_t mask_pixels_after_filter = 0;
  double sigma_px = 0.0;
};

struct StudyInput {
  ImageMeta meta;
  std::vector<Fixation> fixations;
  std::vector<SentenceSpan> sentences;
};

std::vector<SentenceBoxResult> generate_et_boxes(const StudyInput& study,
                                                 const PipelineConfig& cfg);

}  // namespace etbox
