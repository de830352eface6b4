#include <doctest.h>

#include <cmath>

#include "etbox/core.hpp"
#include "support.hpp"

using namespace etbox;
using testing::error_kind;

TEST_SUITE("core") {

TEST_CASE("box_area") {
  CHECK(box_area(BoundingBox(0, 0, 10, 10)) == 100);
  CHECK(box_area(BoundingBox(5, 5, 6, 6)) == 1);
  CHECK(box_area(BoundingBox(2, 3, 7, 4)) == 5);
}

TEST_CASE("empty or inverted boxes are rejected with the field named") {
  try {
    BoundingBox(3, 0, 3, 5);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kValidation);
    CHECK(e.field() == "x_max");
    CHECK(std::string(e.what()).find("ValidationError") != std::string::npos);
  }
  try {
    BoundingBox(0, 7, 5, 2);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.field() == "y_max");
  }
}

TEST_CASE("half-open pixel membership") {
  const BoundingBox b(2, 3, 5, 6);
  CHECK(b.contains_pixel(2, 3));
  CHECK(b.contains_pixel(4, 5));
  CHECK_FALSE(b.contains_pixel(5, 5));
  CHECK_FALSE(b.contains_pixel(4, 6));
  CHECK(b.contains(BoundingBox(3, 4, 5, 6)));
  CHECK_FALSE(b.contains(BoundingBox(3, 4, 6, 6)));
}

TEST_CASE("intersection") {
  const BoundingBox a(0, 0, 10, 10);
  CHECK(intersect(a, BoundingBox(5, 5, 15, 15)) == BoundingBox(5, 5, 10, 10));
  CHECK(intersection_area(a, BoundingBox(5, 5, 15, 15)) == 25);
  // touching edges share no pixel
  CHECK_FALSE(intersect(a, BoundingBox(10, 0, 20, 10)).has_value());
  CHECK(intersection_area(a, BoundingBox(10, 0, 20, 10)) == 0);
}

TEST_CASE("bind_to_image") {
  const ImageMeta meta("s", 100, 50);
  CHECK(bind_to_image(BoundingBox(0, 0, 100, 50), meta) ==
        BoundingBox(0, 0, 100, 50));
  CHECK(error_kind([&] { bind_to_image(BoundingBox(0, 0, 101, 50), meta); }) ==
        ErrorKind::kValidation);
  CHECK(error_kind([&] { bind_to_image(BoundingBox(-1, 0, 10, 10), meta); }) ==
        ErrorKind::kValidation);
}

TEST_CASE("image meta") {
  CHECK(ImageMeta("a", 1, 1).area() == 1.0);
  CHECK(error_kind([] { ImageMeta("", 10, 10); }) == ErrorKind::kValidation);
  CHECK(error_kind([] { ImageMeta("a", 0, 10); }) == ErrorKind::kValidation);
  CHECK(error_kind([] { ImageMeta("a", 10, -3); }) == ErrorKind::kValidation);
  const ImageMeta m("a", 100, 100);
  CHECK(m.contains_point(0.0, 0.0));
  CHECK(m.contains_point(99.999, 99.999));
  CHECK_FALSE(m.contains_point(100.0, 50.0));
  CHECK_FALSE(m.contains_point(-0.001, 50.0));
}

TEST_CASE("fixation and sentence durations must be positive") {
  CHECK(Fixation(1, 2, 3.0, 3.5).duration_s() == doctest::Approx(0.5));
  try {
    Fixation(1, 2, 3.0, 3.0);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.field() == "t_end_s");
  }
  CHECK(error_kind([] { Fixation(NAN, 2, 0, 1); }) == ErrorKind::kValidation);
  CHECK(error_kind([] { SentenceSpan(0, "x", 2.0, 1.0); }) ==
        ErrorKind::kValidation);
  CHECK(error_kind([] { SentenceSpan(-1, "x", 1.0, 2.0); }) ==
        ErrorKind::kValidation);
}

TEST_CASE("sentence ordering") {
  std::vector<SentenceSpan> ok{{0, "a", 0, 1}, {1, "b", 1, 2}, {2, "c", 5, 6}};
  CHECK_NOTHROW(validate_sentence_order(ok));
  std::vector<SentenceSpan> overlap{{0, "a", 0, 2}, {1, "b", 1.5, 3}};
  CHECK(error_kind([&] { validate_sentence_order(overlap); }) ==
        ErrorKind::kUnsortedInput);
  std::vector<SentenceSpan> reversed{{0, "a", 5, 6}, {1, "b", 0, 1}};
  CHECK(error_kind([&] { validate_sentence_order(reversed); }) ==
        ErrorKind::kUnsortedInput);
}

TEST_CASE("heatmap invariants") {
  Heatmap m(3, 2);
  CHECK(m.values().size() == 6);
  CHECK(m.all_zero());
  m.at(2, 1) = 4.0;
  CHECK(m.max_value() == 4.0);
  CHECK(m.values()[5] == 4.0);
  CHECK(error_kind([] { Heatmap(2, 2, {0, 1, -1, 0}); }) ==
        ErrorKind::kValidation);
  CHECK(error_kind([] { Heatmap(2, 2, {0, 1, 1}); }) ==
        ErrorKind::kValidation);
}

TEST_CASE("ellipse invariants") {
  CHECK_NOTHROW(AnnotatedEllipse(5, 5, 1, 2, {"Nodule"}, 3));
  CHECK(error_kind([] { AnnotatedEllipse(5, 5, 0, 2, {"Nodule"}, 3); }) ==
        ErrorKind::kValidation);
  CHECK(error_kind([] { AnnotatedEllipse(5, 5, 1, 2, {}, 3); }) ==
        ErrorKind::kValidation);
  CHECK(error_kind([] { AnnotatedEllipse(5, 5, 1, 2, {"Nodule"}, 6); }) ==
        ErrorKind::kValidation);
  CHECK(error_kind([] { AnnotatedEllipse(5, 5, 1, 2, {"Nodule"}, 0); }) ==
        ErrorKind::kValidation);
}

TEST_CASE("grounding triplet carries a sentence index exactly for ET") {
  const BoundingBox b(0, 0, 1, 1);
  CHECK_NOTHROW(GroundingTriplet("s", b, "text", TripletSource::kEt, 0));
  CHECK_NOTHROW(
      GroundingTriplet("s", b, "text", TripletSource::kAnnotation, {}));
  CHECK(error_kind([&] {
          GroundingTriplet("s", b, "text", TripletSource::kEt, {});
        }) == ErrorKind::kValidation);
  CHECK(error_kind([&] {
          GroundingTriplet("s", b, "text", TripletSource::kAnnotation, 2);
        }) == ErrorKind::kValidation);
  CHECK(error_kind([&] {
          GroundingTriplet("s", b, "", TripletSource::kEt, 0);
        }) == ErrorKind::kValidation);
  CHECK(error_kind([&] { DetectionTriplet("s", b, ""); }) ==
        ErrorKind::kValidation);
  CHECK(std::string(source_name(TripletSource::kEt)) == "ET");
  CHECK(std::string(source_name(TripletSource::kAnnotation)) == "ANNOTATION");
}

TEST_CASE("pipeline config defaults and validation") {
  PipelineConfig cfg;
  CHECK(cfg.psi_s == 1.5);
  CHECK(cfg.threshold_frac == 0.4);
  CHECK(cfg.min_area_frac == 0.0025);
  CHECK(cfg.connectivity == Connectivity::kEight);
  CHECK(cfg.assignment_mode == AssignmentMode::kContainment);
  CHECK(cfg.sigma_for(ImageMeta("a", 400, 300)) == 20.0);
  CHECK_NOTHROW(cfg.validate());

  auto bad = cfg;
  bad.threshold_frac = 1.0;
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::kValidation);
  bad = cfg;
  bad.min_area_frac = 0.0;
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::kValidation);
  bad = cfg;
  bad.psi_s = -0.1;
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::kValidation);
  bad = cfg;
  bad.sigma_px = 0.0;
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::kValidation);
}

TEST_CASE("config fingerprint tracks every parameter") {
  PipelineConfig a;
  const auto base = a.fingerprint();
  CHECK(base.size() == 16);
  CHECK(PipelineConfig{}.fingerprint() == base);
  a.sigma_px = 12.0;
  CHECK(a.fingerprint() != base);
  PipelineConfig b;
  b.seed = 1;
  CHECK(b.fingerprint() != base);
  PipelineConfig c;
  c.connectivity = Connectivity::kFour;
  CHECK(c.fingerprint() != base);
}

TEST_CASE("stable hash") {
  // FNV-1a reference values
  CHECK(stable_hash("") == 0xcbf29ce484222325ULL);
  CHECK(stable_hash("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

}  // TEST_SUITE
