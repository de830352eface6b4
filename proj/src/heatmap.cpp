#include "etbox/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "etbox/align.hpp"

namespace etbox {

namespace {

// exp(-(k + 0.5 - center)^2 / (2 sigma^2)) for k in [0, n).
std::vector<double> gaussian_profile(int n, double center, double sigma_px) {
  std::vector<double> profile(static_cast<std::size_t>(n));
  const double denom = 2.0 * sigma_px * sigma_px;
  for (int k = 0; k < n; ++k) {
    const double d = k + 0.5 - center;
    profile[k] = std::exp(-(d * d) / denom);
  }
  return profile;
}

void check_fixation_inside(const Fixation& f, const ImageMeta& meta) {
  if (!meta.contains_point(f.x_px, f.y_px)) {
    throw Error(ErrorKind::kFixationOutsideImage,
                "fixation at (" + std::to_string(f.x_px) + ", " +
                    std::to_string(f.y_px) + ") outside " +
                    std::to_string(meta.width_px) + "x" +
                    std::to_string(meta.height_px) + " image");
  }
}

void check_sigma(double sigma_px) {
  if (!(sigma_px > 0) || !std::isfinite(sigma_px)) {
    throw Error(ErrorKind::kValidation, "sigma_px must be > 0", "sigma_px");
  }
}

}  // namespace

BinaryMask::BinaryMask(int width_px, int height_px)
    : width_(width_px),
      height_(height_px),
      bits_(static_cast<std::size_t>(width_px) * height_px, 0) {
  if (width_px < 1 || height_px < 1) {
    throw Error(ErrorKind::kValidation, "mask dimensions must be >= 1",
                "width_px");
  }
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
  if (width_ != other.width_ || height_ != other.height_) {
    throw Error(ErrorKind::kDimensionMismatch, "mask sizes differ");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

Heatmap render_fixation(const Fixation& f, const ImageMeta& meta,
                        double sigma_px) {
  const Fixation single[] = {f};
  return render_accumulated(single, meta, sigma_px);
}

Heatmap accumulate(std::span<const Heatmap> maps, int width_px,
                   int height_px) {
  Heatmap sum(width_px, height_px);
  auto& out = sum.mutable_values();
  for (const auto& m : maps) {
    if (m.width() != width_px || m.height() != height_px) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "heatmap " + std::to_string(m.width()) + "x" +
                      std::to_string(m.height()) + " does not match " +
                      std::to_string(width_px) + "x" +
                      std::to_string(height_px));
    }
    const auto& in = m.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += in[i];
  }
  return sum;
}

Heatmap render_accumulated(std::span<const Fixation> fixations,
                           const ImageMeta& meta, double sigma_px) {
  check_sigma(sigma_px);
  const int w = meta.width_px;
  const int h = meta.height_px;
  std::vector<std::vector<double>> col_profiles;
  std::vector<std::vector<double>> row_profiles;
  col_profiles.reserve(fixations.size());
  row_profiles.reserve(fixations.size());
  for (const auto& f : fixations) {
    check_fixation_inside(f, meta);
    col_profiles.push_back(gaussian_profile(w, f.x_px, sigma_px));
    row_profiles.push_back(gaussian_profile(h, f.y_px, sigma_px));
  }

  Heatmap sum(w, h);
  auto& out = sum.mutable_values();
  // Pixel value is (duration * gy[y]) * gx[x], summed in fixation order. A
  // zero row weight adds exactly +0.0 everywhere so it can be skipped.
  for (int y = 0; y < h; ++y) {
    double* row = out.data() + static_cast<std::size_t>(y) * w;
    for (std::size_t k = 0; k < fixations.size(); ++k) {
      const double weight = fixations[k].duration_s() * row_profiles[k][y];
      if (weight == 0.0) continue;
      const double* gx = col_profiles[k].data();
      for (int x = 0; x < w; ++x) row[x] += weight * gx[x];
    }
  }
  return sum;
}

NormalizedHeatmap normalize(const Heatmap& m) {
  const double peak = m.max_value();
  if (peak == 0.0) return {m, true};
  if (peak == 255.0) return {m, false};
  const double scale = 255.0 / peak;
  std::vector<double> values = m.values();
  for (double& v : values) v *= scale;
  // Rounding in the scale can leave the peak one ulp off 255.
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (m.values()[i] == peak) values[i] = 255.0;
  }
  return {Heatmap(m.width(), m.height(), std::move(values)), false};
}

BinaryMask threshold_mask(const Heatmap& normalized, double threshold_frac) {
  const double cutoff = threshold_frac * 255.0;
  BinaryMask mask(normalized.width(), normalized.height());
  for (int y = 0; y < normalized.height(); ++y) {
    for (int x = 0; x < normalized.width(); ++x) {
      if (normalized.at(x, y) >= cutoff) mask.set(x, y);
    }
  }
  return mask;
}

std::vector<ComponentStats> label_components(const BinaryMask& mask,
                                             Connectivity connectivity,
                                             std::vector<int>* labels) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<ComponentStats> stats;
  std::vector<std::pair<int, int>> stack;

  static constexpr int kDx[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int neighbors = connectivity == Connectivity::kEight ? 8 : 4;

  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t idx0 = static_cast<std::size_t>(y0) * w + x0;
      if (!mask.get(x0, y0) || label[idx0] >= 0) continue;
      const int id = static_cast<int>(stats.size());
      std::int64_t count = 0;
      int x_min = x0, x_max = x0, y_min = y0, y_max = y0;
      label[idx0] = id;
      stack.emplace_back(x0, y0);
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        ++count;
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
        for (int n = 0; n < neighbors; ++n) {
          const int nx = x + kDx[n];
          const int ny = y + kDy[n];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
          if (!mask.get(nx, ny) || label[nidx] >= 0) continue;
          label[nidx] = id;
          stack.emplace_back(nx, ny);
        }
      }
      stats.push_back(
          ComponentStats{id, count, BoundingBox(x_min, y_min, x_max + 1,
                                                y_max + 1)});
    }
  }
  if (labels) *labels = std::move(label);
  return stats;
}

BinaryMask filter_components(const BinaryMask& mask, const ImageMeta& meta,
                             double min_area_frac, Connectivity connectivity) {
  if (mask.width() != meta.width_px || mask.height() != meta.height_px) {
    throw Error(ErrorKind::kDimensionMismatch,
                "mask does not match image dimensions");
  }
  const double min_pixels = min_area_frac * meta.area();
  std::vector<int> labels;
  const auto stats = label_components(mask, connectivity, &labels);
  std::vector<bool> keep(stats.size());
  for (const auto& c : stats) {
    keep[c.component_id] = static_cast<double>(c.pixel_count) >= min_pixels;
  }
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const int id = labels[static_cast<std::size_t>(y) * mask.width() + x];
      if (id >= 0 && keep[id]) out.set(x, y);
    }
  }
  return out;
}

std::optional<BoundingBox> enclosing_box(const BinaryMask& mask) {
  int x_min = mask.width(), y_min = mask.height(), x_max = -1, y_max = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.get(x, y)) continue;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max < 0) return std::nullopt;
  return BoundingBox(x_min, y_min, x_max + 1, y_max + 1);
}

const char* no_box_reason_name(NoBoxReason reason) {
  switch (reason) {
    case NoBoxReason::kNone: return "NONE";
    case NoBoxReason::kNoFixations: return "NO_FIXATIONS";
    case NoBoxReason::kEmptyAfterFilter: return "EMPTY_AFTER_FILTER";
  }
  return "UNKNOWN";
}

std::vector<SentenceBoxResult> generate_et_boxes(const StudyInput& study,
                                                 const PipelineConfig& cfg) {
  cfg.validate();
  const double sigma = cfg.sigma_for(study.meta);
  const auto alignment =
      assign_fixations(study.fixations, study.sentences, cfg);

  std::vector<SentenceBoxResult> results;
  results.reserve(study.sentences.size());
  for (std::size_t k = 0; k < study.sentences.size(); ++k) {
    SentenceBoxResult r;
    r.sentence_index = study.sentences[k].sentence_index;
    r.sigma_px = sigma;
    const auto& assigned = alignment.per_sentence[k];
    r.fixation_count = assigned.size();
    if (assigned.empty()) {
      r.reason = NoBoxReason::kNoFixations;
      results.push_back(std::move(r));
      continue;
    }
    const auto normalized =
        normalize(render_accumulated(assigned, study.meta, sigma));
    const auto mask = threshold_mask(normalized.map, cfg.threshold_frac);
    r.mask_pixels_before_filter = mask.count();
    const auto filtered = filter_components(mask, study.meta,
                                            cfg.min_area_frac,
                                            cfg.connectivity);
    r.mask_pixels_after_filter = filtered.count();
    r.box = enclosing_box(filtered);
    if (!r.box) r.reason = NoBoxReason::kEmptyAfterFilter;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace etbox
