#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "etbox/core.hpp"
#include "etbox/repurpose.hpp"

namespace etbox {

// kUniformInBox draws one point per cell of a near-square grid over the box
// (jittered stratification): uniform over the box, but without the clumps
// and holes that 30 independent draws leave at small sigma. kUniformIid is
// plain independent sampling.
enum class JitterModel { kUniformInBox, kUniformIid, kGaussianAroundCenter };

struct SynthSentenceSpec {
  BoundingBox target{0, 0, 1, 1};
  int fixation_count = 30;
  double min_duration_s = 0.1;
  double max_duration_s = 0.4;
  JitterModel jitter = JitterModel::kUniformInBox;
  // Standard deviation for the Gaussian jitter model.
  double jitter_sigma_px = 10.0;
  double sentence_duration_s = 15.0;
  double gap_before_s = 0.5;
  std::string label;
  std::string text;
  int certainty = 3;
};

struct SynthSpec {
  std::string study_id = "synth-0000";
  int width_px = 512;
  int height_px = 512;
  double start_offset_s = 1.0;
  std::vector<SynthSentenceSpec> sentences;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthStudy {
  ImageMeta meta;
  std::vector<Fixation> fixations;
  std::vector<SentenceSpan> sentences;
  std::vector<BoundingBox> targets;
  std::vector<AnnotatedEllipse> ellipses;
};

// Fixations of sentence k fall inside target k and inside sentence k's own
// dictation interval, so they qualify for sentence k (and no earlier one)
// under either assignment mode.
SynthStudy synth_study(const SynthSpec& spec);

struct RandomSynthOptions {
  int width_px = 512;
  int height_px = 512;
  int sentences = 3;
  int fixations_per_sentence = 30;
  int min_box_side = 64;
  int max_box_side = 96;
  JitterModel jitter = JitterModel::kUniformInBox;
  // Equal dwell times by default; spread here makes the heatmap lumpier.
  double min_duration_s = 0.25;
  double max_duration_s = 0.25;
};

// Spec with pairwise disjoint targets and one finding label per sentence whose
// text the default lexicon recognizes.
SynthSpec random_synth_spec(const std::string& study_id,
                            const RandomSynthOptions& options,
                            std::uint64_t seed);

int min_target_side(const SynthStudy& study);

// [0, 1) with 53 random bits.
double uniform_unit(std::mt19937_64& rng);

struct PixelMetrics {
  double iou = 0.0;
  double cr_ab = 0.0;
  double cr_ba = 0.0;
  std::int64_t intersection = 0;
  std::int64_t union_pixels = 0;
};

// Brute-force reference: visits every pixel of the region spanned by both
// boxes and counts memberships.
PixelMetrics oracle_pixel_metrics(const BoundingBox& a, const BoundingBox& b);

}  // namespace etbox
