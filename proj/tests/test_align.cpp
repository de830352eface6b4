#include <doctest.h>

#include <algorithm>
#include <random>

#include "etbox/align.hpp"
#include "support.hpp"

using namespace etbox;
using testing::error_kind;

namespace {

Fixation at_time(double t0, double t1) { return Fixation(10, 10, t0, t1); }

std::vector<SentenceSpan> two_sentences() {
  return {SentenceSpan(0, "first", 10, 14), SentenceSpan(1, "second", 15, 18)};
}

}  // namespace

TEST_SUITE("align") {

TEST_CASE("collection window") {
  const SentenceSpan s(0, "x", 10.0, 14.0);
  auto w = collection_window(s, 1.5);
  CHECK(w.w_start_s == 8.5);
  CHECK(w.w_end_s == 14.0);
  w = collection_window(s, 0.0);
  CHECK(w.w_start_s == 10.0);
  // no clamping at zero
  w = collection_window(SentenceSpan(3, "x", 0.5, 2.0), 1.5);
  CHECK(w.w_start_s == -1.0);
  CHECK(w.w_end_s == 2.0);
  CHECK(w.sentence_index == 3);
}

TEST_CASE("qualifies") {
  const CollectionWindow w{0, 8.5, 14.0};
  CHECK(qualifies(at_time(13.6, 13.9), w, AssignmentMode::kContainment));
  CHECK_FALSE(qualifies(at_time(13.8, 14.2), w, AssignmentMode::kContainment));
  CHECK(qualifies(at_time(13.8, 14.2), w, AssignmentMode::kOverlap));
  CHECK_FALSE(qualifies(at_time(7.0, 8.0), w, AssignmentMode::kContainment));
  CHECK_FALSE(qualifies(at_time(7.0, 8.0), w, AssignmentMode::kOverlap));
  // window edges are inclusive for containment
  CHECK(qualifies(at_time(8.5, 14.0), w, AssignmentMode::kContainment));
  // touching at a single instant is not a positive-measure overlap
  CHECK_FALSE(qualifies(at_time(14.0, 15.0), w, AssignmentMode::kOverlap));
  CHECK_FALSE(qualifies(at_time(7.0, 8.5), w, AssignmentMode::kOverlap));
}

TEST_CASE("first qualifying sentence wins") {
  const PipelineConfig cfg;
  const std::vector<Fixation> fix{at_time(7.0, 8.0), at_time(13.6, 13.9),
                                  at_time(14.5, 15.0)};
  const auto r = assign_fixations(fix, two_sentences(), cfg);
  REQUIRE(r.per_sentence.size() == 2);
  REQUIRE(r.per_sentence[0].size() == 1);
  CHECK(r.per_sentence[0][0] == fix[1]);
  REQUIRE(r.per_sentence[1].size() == 1);
  CHECK(r.per_sentence[1][0] == fix[2]);
  REQUIRE(r.unassigned.size() == 1);
  CHECK(r.unassigned[0] == fix[0]);
  CHECK(r.assigned_count() == 2);
}

TEST_CASE("overlap mode picks up straddling fixations") {
  PipelineConfig cfg;
  const std::vector<Fixation> fix{at_time(8.0, 9.0), at_time(17.9, 18.3)};
  auto r = assign_fixations(fix, two_sentences(), cfg);
  CHECK(r.per_sentence[0].empty());
  CHECK(r.unassigned.size() == 2);
  cfg.assignment_mode = AssignmentMode::kOverlap;
  r = assign_fixations(fix, two_sentences(), cfg);
  CHECK(r.per_sentence[0].size() == 1);
  CHECK(r.per_sentence[1].size() == 1);
  CHECK(r.unassigned.empty());
}

TEST_CASE("no sentences leaves everything unassigned") {
  const std::vector<Fixation> fix{at_time(1, 2), at_time(3, 4)};
  const auto r = assign_fixations(fix, {}, PipelineConfig{});
  CHECK(r.per_sentence.empty());
  CHECK(r.unassigned == fix);
}

TEST_CASE("unsorted inputs are rejected") {
  const PipelineConfig cfg;
  const std::vector<Fixation> fix{at_time(5, 6), at_time(1, 2)};
  CHECK(error_kind([&] { assign_fixations(fix, two_sentences(), cfg); }) ==
        ErrorKind::kUnsortedInput);
  const std::vector<SentenceSpan> bad{SentenceSpan(0, "a", 10, 14),
                                      SentenceSpan(1, "b", 12, 18)};
  CHECK(error_kind([&] { assign_fixations({}, bad, cfg); }) ==
        ErrorKind::kUnsortedInput);
}

TEST_CASE("partition and psi monotonicity on random timelines") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> start(0.0, 60.0);
  std::uniform_real_distribution<double> len(0.05, 1.2);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Fixation> fix;
    for (int i = 0; i < 80; ++i) {
      const double t = start(rng);
      fix.emplace_back(5, 5, t, t + len(rng));
    }
    std::sort(fix.begin(), fix.end(), [](const auto& a, const auto& b) {
      return a.t_start_s < b.t_start_s;
    });
    std::vector<SentenceSpan> sentences;
    double t = 1.0;
    for (int k = 0; k < 6; ++k) {
      const double d = 2.0 + len(rng) * 5;
      sentences.emplace_back(k, "s", t, t + d);
      t += d + len(rng) * 3;
    }
    for (auto mode : {AssignmentMode::kContainment, AssignmentMode::kOverlap}) {
      std::size_t previous = 0;
      for (double psi : {0.0, 0.5, 1.5, 3.0}) {
        PipelineConfig cfg;
        cfg.psi_s = psi;
        cfg.assignment_mode = mode;
        const auto r = assign_fixations(fix, sentences, cfg);
        CHECK(r.assigned_count() + r.unassigned.size() == fix.size());
        for (const auto& list : r.per_sentence) {
          CHECK(std::is_sorted(list.begin(), list.end(),
                               [](const auto& a, const auto& b) {
                                 return a.t_start_s < b.t_start_s;
                               }));
        }
        CHECK(r.assigned_count() >= previous);
        previous = r.assigned_count();
      }
    }
  }
}

}  // TEST_SUITE
