#include "etbox/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace etbox {

namespace {

struct FindingPhrase {
  const char* label;
  const char* phrase;
};

constexpr FindingPhrase kFindings[] = {
    {"Atelectasis", "atelectasis"},
    {"Consolidation", "consolidation"},
    {"Enlarged cardiac silhouette", "cardiomegaly"},
    {"Pleural abnormality", "pleural effusion"},
    {"Pulmonary edema", "pulmonary edema"},
    {"Lung nodule or mass", "a pulmonary nodule"},
    {"Groundglass opacity", "groundglass opacity"},
    {"Pneumothorax", "a pneumothorax"},
    {"Enlarged hilum", "hilar enlargement"},
    {"Acute fracture", "an acute rib fracture"},
};

// Position words by image thirds (image left/right, not patient side).
std::string region_name(const BoundingBox& b, int width_px, int height_px) {
  const double cx = 0.5 * (b.x_min() + b.x_max()) / width_px;
  const double cy = 0.5 * (b.y_min() + b.y_max()) / height_px;
  const char* vert = cy < 1.0 / 3 ? "upper" : cy < 2.0 / 3 ? "middle" : "lower";
  const char* horiz = cx < 1.0 / 3 ? "left" : cx < 2.0 / 3 ? "central" : "right";
  return std::string(vert) + " " + horiz;
}

double uniform_between(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller on our own uniforms keeps the stream platform independent.
  double u1 = uniform_unit(rng);
  while (u1 <= 0.0) u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Cell of point j when n points are spread over `rows` rows with balanced
// per-row counts: returns {row, column, points in that row}.
struct Cell {
  int row, col, count;
};

Cell stratum(int j, int n, int rows) {
  const auto first = [&](int r) {
    return static_cast<int>((static_cast<long long>(r) * n + rows - 1) / rows);
  };
  const int row = static_cast<int>(static_cast<long long>(j) * rows / n);
  const int start = first(row);
  return {row, j - start, first(row + 1) - start};
}

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) {
    throw Error(ErrorKind::kValidation, std::string(field) + ": " + message,
                field);
  }
}

}  // namespace

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void SynthSpec::validate() const {
  const ImageMeta meta(study_id, width_px, height_px);
  require(!sentences.empty(), "sentences", "need at least one sentence");
  for (const auto& s : sentences) {
    require(s.target.fits(meta), "target", "must lie inside the image");
    require(s.fixation_count >= 1, "fixation_count", "must be >= 1");
    require(s.min_duration_s > 0 && s.max_duration_s >= s.min_duration_s,
            "min_duration_s", "durations must be > 0 and ordered");
    require(s.sentence_duration_s > 0, "sentence_duration_s", "must be > 0");
    require(s.gap_before_s >= 0, "gap_before_s", "must be >= 0");
    require(s.min_duration_s * s.fixation_count < s.sentence_duration_s,
            "sentence_duration_s", "too short for the fixation count");
    require(s.jitter_sigma_px > 0, "jitter_sigma_px", "must be > 0");
    require(!s.label.empty(), "label", "must be non-empty");
    require(!s.text.empty(), "text", "must be non-empty");
    require(s.certainty >= 1 && s.certainty <= 5, "certainty",
            "must be in 1..5");
  }
}

SynthStudy synth_study(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(study_seed(spec.seed, spec.study_id));
  SynthStudy out;
  out.meta = ImageMeta(spec.study_id, spec.width_px, spec.height_px);

  double cursor = spec.start_offset_s;
  for (std::size_t k = 0; k < spec.sentences.size(); ++k) {
    const auto& s = spec.sentences[k];
    const double t_start = cursor + s.gap_before_s;
    const double t_end = t_start + s.sentence_duration_s;
    cursor = t_end;
    out.sentences.emplace_back(static_cast<int>(k), s.text, t_start, t_end);
    out.targets.push_back(s.target);

    const double slot = s.sentence_duration_s / s.fixation_count;
    const double max_dur = std::min(s.max_duration_s, slot * 0.9);
    const double min_dur = std::min(s.min_duration_s, max_dur);
    const double cx = 0.5 * (s.target.x_min() + s.target.x_max());
    const double cy = 0.5 * (s.target.y_min() + s.target.y_max());
    const int n = s.fixation_count;
    const int rows = std::clamp(
        static_cast<int>(std::lround(std::sqrt(
            n * static_cast<double>(s.target.height()) / s.target.width()))),
        1, n);
    // visit the cells in random order so the gaze path is not a raster scan
    std::vector<int> cells(n);
    for (int i = 0; i < n; ++i) cells[i] = i;
    if (s.jitter == JitterModel::kUniformInBox) {
      for (std::size_t i = cells.size(); i > 1; --i) {
        std::swap(cells[i - 1], cells[uniform_index(rng, i)]);
      }
    }
    for (int i = 0; i < n; ++i) {
      const double duration = uniform_between(rng, min_dur, max_dur);
      const double slot_start = t_start + slot * i;
      const double f_start =
          slot_start + uniform_between(rng, 0.0, slot - duration);
      const double f_end = std::min(f_start + duration, t_end);
      double x = 0.0, y = 0.0;
      if (s.jitter == JitterModel::kUniformInBox) {
        const Cell c = stratum(cells[i], n, rows);
        const double cw = static_cast<double>(s.target.width()) / c.count;
        const double ch = static_cast<double>(s.target.height()) / rows;
        x = s.target.x_min() + (c.col + uniform_unit(rng)) * cw;
        y = s.target.y_min() + (c.row + uniform_unit(rng)) * ch;
        // guard against rounding onto the far edge
        x = std::min(x, std::nextafter(double(s.target.x_max()), 0.0));
        y = std::min(y, std::nextafter(double(s.target.y_max()), 0.0));
      } else if (s.jitter == JitterModel::kUniformIid) {
        x = uniform_between(rng, s.target.x_min(), s.target.x_max());
        y = uniform_between(rng, s.target.y_min(), s.target.y_max());
      } else {
        do {
          x = cx + s.jitter_sigma_px * standard_normal(rng);
          y = cy + s.jitter_sigma_px * standard_normal(rng);
        } while (!(x >= s.target.x_min() && x < s.target.x_max() &&
                   y >= s.target.y_min() && y < s.target.y_max()));
      }
      out.fixations.emplace_back(x, y, f_start, f_end);
    }
    out.ellipses.emplace_back(cx, cy, 0.5 * s.target.width(),
                              0.5 * s.target.height(),
                              std::set<std::string>{s.label}, s.certainty);
  }
  return out;
}

SynthSpec random_synth_spec(const std::string& study_id,
                            const RandomSynthOptions& options,
                            std::uint64_t seed) {
  require(options.min_box_side >= 1 &&
              options.max_box_side >= options.min_box_side,
          "min_box_side", "box side range must be positive and ordered");
  require(options.max_box_side <= std::min(options.width_px,
                                           options.height_px),
          "max_box_side", "must fit inside the image");
  std::mt19937_64 rng(study_seed(seed ^ 0x9e3779b97f4a7c15ULL, study_id));
  SynthSpec spec;
  spec.study_id = study_id;
  spec.width_px = options.width_px;
  spec.height_px = options.height_px;
  spec.seed = seed;

  std::vector<std::size_t> finding_order(std::size(kFindings));
  for (std::size_t i = 0; i < finding_order.size(); ++i) finding_order[i] = i;
  for (std::size_t i = finding_order.size(); i > 1; --i) {
    std::swap(finding_order[i - 1], finding_order[uniform_index(rng, i)]);
  }

  std::vector<BoundingBox> placed;
  for (int k = 0; k < options.sentences; ++k) {
    std::optional<BoundingBox> box;
    for (int attempt = 0; attempt < 10000 && !box; ++attempt) {
      const int span = options.max_box_side - options.min_box_side + 1;
      const int w = options.min_box_side +
                    static_cast<int>(uniform_index(rng, span));
      const int h = options.min_box_side +
                    static_cast<int>(uniform_index(rng, span));
      const int x = static_cast<int>(uniform_index(rng, options.width_px - w + 1));
      const int y =
          static_cast<int>(uniform_index(rng, options.height_px - h + 1));
      BoundingBox candidate(x, y, x + w, y + h);
      const bool clear = std::none_of(
          placed.begin(), placed.end(), [&](const BoundingBox& other) {
            return intersection_area(candidate, other) > 0;
          });
      if (clear) box = candidate;
    }
    if (!box) {
      throw Error(ErrorKind::kValidation,
                  "could not place disjoint target boxes", "sentences");
    }
    placed.push_back(*box);

    const auto& finding =
        kFindings[finding_order[static_cast<std::size_t>(k) %
                                finding_order.size()]];
    SynthSentenceSpec s;
    s.target = *box;
    s.fixation_count = options.fixations_per_sentence;
    s.jitter = options.jitter;
    s.jitter_sigma_px = std::min(box->width(), box->height()) / 4.0;
    s.min_duration_s = options.min_duration_s;
    s.max_duration_s = options.max_duration_s;
    s.sentence_duration_s =
        std::max(15.0, 0.5 * options.fixations_per_sentence);
    s.label = finding.label;
    s.text = std::string("There is ") + finding.phrase + " in the " +
             region_name(*box, options.width_px, options.height_px) +
             " region.";
    s.certainty = 1 + static_cast<int>(uniform_index(rng, 5));
    spec.sentences.push_back(std::move(s));
  }
  return spec;
}

int min_target_side(const SynthStudy& study) {
  int side = std::numeric_limits<int>::max();
  for (const auto& t : study.targets) {
    side = std::min({side, t.width(), t.height()});
  }
  return side;
}

PixelMetrics oracle_pixel_metrics(const BoundingBox& a, const BoundingBox& b) {
  const int x0 = std::min(a.x_min(), b.x_min());
  const int y0 = std::min(a.y_min(), b.y_min());
  const int x1 = std::max(a.x_max(), b.x_max());
  const int y1 = std::max(a.y_max(), b.y_max());
  std::int64_t in_a = 0, in_b = 0, both = 0, either = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool pa = a.contains_pixel(x, y);
      const bool pb = b.contains_pixel(x, y);
      in_a += pa;
      in_b += pb;
      both += pa && pb;
      either += pa || pb;
    }
  }
  PixelMetrics m;
  m.intersection = both;
  m.union_pixels = either;
  m.iou = static_cast<double>(both) / static_cast<double>(either);
  m.cr_ab = static_cast<double>(both) / static_cast<double>(in_b);
  m.cr_ba = static_cast<double>(both) / static_cast<double>(in_a);
  return m;
}

}  // namespace etbox
