#include <doctest.h>

#include <cmath>
#include <random>

#include "etbox/repurpose.hpp"
#include "support.hpp"

using namespace etbox;
using testing::error_kind;

namespace {

const ImageMeta kMeta("s", 100, 100);

AnnotatedEllipse ellipse(double cx, double cy, double ax, double ay,
                         std::set<std::string> labels = {"Atelectasis"},
                         int certainty = 3) {
  return AnnotatedEllipse(cx, cy, ax, ay, std::move(labels), certainty);
}

LabelLexicon ab_lexicon() {
  return LabelLexicon({{"A", {"alpha"}}, {"B", {"beta"}}, {"C", {"gamma"}}});
}

}  // namespace

TEST_SUITE("repurpose") {

TEST_CASE("ellipse to box") {
  CHECK(ellipse_to_box(ellipse(50, 50, 10, 5), kMeta) ==
        BoundingBox(40, 45, 60, 55));
  CHECK(ellipse_to_box(ellipse(2, 50, 10, 5), kMeta) ==
        BoundingBox(0, 45, 12, 55));
  CHECK(ellipse_to_box(ellipse(50.5, 50.5, 10, 10), kMeta) ==
        BoundingBox(40, 40, 61, 61));
  CHECK(ellipse_to_box(ellipse(95, 95, 10, 10), kMeta) ==
        BoundingBox(85, 85, 100, 100));
  CHECK(error_kind([] { ellipse_to_box(ellipse(-30, 50, 10, 5), kMeta); }) ==
        ErrorKind::kEllipseOutsideImage);
  CHECK(error_kind([] { ellipse_to_box(ellipse(50, 110, 5, 10), kMeta); }) ==
        ErrorKind::kEllipseOutsideImage);
}

TEST_CASE("ellipse box covers every pixel centered inside the ellipse") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> c(-10.0, 110.0), a(0.3, 30.0);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto e = ellipse(c(rng), c(rng), a(rng), a(rng));
    std::optional<BoundingBox> box;
    try {
      box = ellipse_to_box(e, kMeta);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    for (int y = 0; y < 100; ++y) {
      for (int x = 0; x < 100; ++x) {
        const double dx = (x + 0.5 - e.center_x_px) / e.semi_axis_x_px;
        const double dy = (y + 0.5 - e.center_y_px) / e.semi_axis_y_px;
        if (dx * dx + dy * dy <= 1.0) CHECK(box->contains_pixel(x, y));
      }
    }
    CHECK(box->fits(kMeta));
  }
  CHECK(checked > 100);
}

TEST_CASE("negative sentence filter") {
  const std::vector<std::string> in{
      "No acute fracture.", "Heart size is normal.",
      "Abnormal mediastinal contour.", "There is a nodule."};
  const auto out = filter_negative_sentences(in);
  CHECK(out == std::vector<std::string>{"Abnormal mediastinal contour.",
                                        "There is a nodule."});
  CHECK(filter_negative_sentences(out) == out);
}

TEST_CASE("negative sentence rule details") {
  CHECK(is_negative_sentence("NORMAL heart."));
  CHECK(is_negative_sentence("Lungs are within normal limits."));
  CHECK_FALSE(is_negative_sentence("Abnormal opacity, normal elsewhere"));
  CHECK(is_negative_sentence("There is no pneumothorax."));
  CHECK(is_negative_sentence("no effusion"));
  CHECK(is_negative_sentence("(no change)"));
  // literal rule: catches "no " in the middle of a sentence
  CHECK(is_negative_sentence("Small nodules no larger than 5 mm."));
  CHECK_FALSE(is_negative_sentence("There is a nodule."));
  CHECK_FALSE(is_negative_sentence("Piano wire sign."));  // "no" ends a word
  CHECK_FALSE(is_negative_sentence("Patient is not rotated."));
  CHECK_FALSE(is_negative_sentence(""));
}

TEST_CASE("filter keeps sentence indices") {
  const std::vector<ReportSentence> in{{0, "No effusion."},
                                       {1, "Left lower lobe atelectasis."},
                                       {2, "Heart size normal."},
                                       {3, "Small right pneumothorax."}};
  const auto out = filter_negative_sentences(in);
  REQUIRE(out.size() == 2);
  CHECK(out[0].sentence_index == 1);
  CHECK(out[1].sentence_index == 3);
}

TEST_CASE("label implication") {
  const auto lex = LabelLexicon::default_lexicon();
  CHECK(lex.labels().size() == 14);
  CHECK(sentence_implies_label("Bibasilar atelectasis is present.",
                               "Atelectasis", lex));
  CHECK_FALSE(sentence_implies_label("Lungs are clear.", "Pneumothorax", lex));
  CHECK_FALSE(sentence_implies_label("", "Pneumothorax", lex));
  CHECK(sentence_implies_label("SMALL LEFT PNEUMOTHORAX", "Pneumothorax", lex));
  CHECK(error_kind([&] {
          sentence_implies_label("x", "Not a label", lex);
        }) == ErrorKind::kUnknownLabel);
}

TEST_CASE("lexicon file format") {
  const auto lex = LabelLexicon::parse(
      "# comment\n"
      "Atelectasis: atelecta, Collapse\n"
      "\n"
      "Odd: label: weird\n");
  CHECK(lex.labels() == std::vector<std::string>{"Atelectasis", "Odd: label"});
  CHECK(lex.stems("Atelectasis") ==
        std::vector<std::string>{"atelecta", "collapse"});
  CHECK(lex.stems("Odd: label") == std::vector<std::string>{"weird"});
  CHECK(error_kind([] { LabelLexicon::parse("Empty:\n"); }) ==
        ErrorKind::kValidation);
  CHECK(error_kind([] { LabelLexicon::parse("no colon here\n"); }) ==
        ErrorKind::kRow);
}

TEST_CASE("build statement") {
  const auto lex = LabelLexicon::default_lexicon();
  const std::vector<ReportSentence> sentences{
      {0, "Mild pulmonary edema."},
      {1, "Lungs are hyperinflated."},
      {2, "Right lower lobe consolidation."}};

  auto one = build_statement({"Atelectasis"},
                             {{0, "Bibasilar atelectasis."}, {1, "Clear."}},
                             lex);
  REQUIRE(one);
  CHECK(one->text == "Bibasilar atelectasis.");
  CHECK(one->source_sentence_indices == std::vector<int>{0});

  auto two =
      build_statement({"Consolidation", "Pulmonary edema"}, sentences, lex);
  REQUIRE(two);
  CHECK(two->text == "Mild pulmonary edema. Right lower lobe consolidation.");
  CHECK(two->source_sentence_indices == std::vector<int>{0, 2});
  CHECK(two->implied_labels ==
        std::set<std::string>{"Consolidation", "Pulmonary edema"});

  CHECK_FALSE(build_statement({"Hiatal hernia"}, sentences, lex));
}

TEST_CASE("statement pairing by certainty") {
  std::mt19937_64 rng(1);
  const BoundingBox a(0, 0, 10, 10), b(20, 20, 30, 30), c(40, 40, 50, 50);
  CHECK(pair_statement_with_box({{a, 2}, {b, 4}}, rng) == 1);
  CHECK(pair_statement_with_box({{a, 1}}, rng) == 0);

  // unique maximum does not consume randomness
  std::mt19937_64 r1(7), r2(7);
  pair_statement_with_box({{a, 2}, {b, 4}}, r1);
  CHECK(r1() == r2());
}

TEST_CASE("tie-break is seeded and reproducible") {
  const BoundingBox a(0, 0, 10, 10), b(20, 20, 30, 30), c(40, 40, 50, 50);
  const std::vector<BoxCandidate> tied{{a, 5}, {b, 5}};
  std::vector<std::size_t> picks;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    std::mt19937_64 rng(seed);
    const auto first = pair_statement_with_box(tied, rng);
    std::mt19937_64 again(seed);
    CHECK(pair_statement_with_box(tied, again) == first);
    picks.push_back(first);
  }
  // both candidates get picked for some seed
  CHECK(std::count(picks.begin(), picks.end(), 0u) > 0);
  CHECK(std::count(picks.begin(), picks.end(), 1u) > 0);

  // golden values pinned from the seeded generator
  std::mt19937_64 rng(42);
  CHECK(pair_statement_with_box(tied, rng) == 0u);
  const std::vector<BoxCandidate> three{{a, 5}, {b, 3}, {c, 5}};
  std::mt19937_64 rng2(2024);
  CHECK(pair_statement_with_box(three, rng2) == 0u);
}

TEST_CASE("uniform index stays in range and covers it") {
  std::mt19937_64 rng(0);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = uniform_index(rng, 7);
    REQUIRE(k < 7);
    ++hits[k];
  }
  for (int h : hits) CHECK(h > 800);
  CHECK(uniform_index(rng, 1) == 0);
}

TEST_CASE("study seed mixes in the study id") {
  CHECK(study_seed(5, "a") != study_seed(5, "b"));
  CHECK(study_seed(5, "a") == study_seed(5, "a"));
  CHECK(study_seed(5, "a") != study_seed(6, "a"));
}

TEST_CASE("one two-label box: two detection triplets, one grounding triplet") {
  AnnotationStudy study{kMeta, {ellipse(50, 50, 10, 10, {"A", "B"}, 4)},
                        {{0, "Alpha and beta are seen."}}};
  const auto lex = ab_lexicon();
  const auto od = build_od_triplets(study, &lex);
  const auto pg = build_pg_triplets(study, lex, PipelineConfig{});
  REQUIRE(od.size() == 2);
  CHECK(od[0].label == "A");
  CHECK(od[1].label == "B");
  CHECK(od[0].box == od[1].box);
  CHECK(od[0].sentence_indices == std::vector<int>{0});
  REQUIRE(pg.size() == 1);
  CHECK(pg[0].statement == "Alpha and beta are seen.");
  CHECK(pg[0].source == TripletSource::kAnnotation);
  CHECK_FALSE(pg[0].sentence_index.has_value());
  CHECK(pg[0].box == BoundingBox(40, 40, 60, 60));
  CHECK(pg[0].certainty == 4);
}

TEST_CASE("grounding and detection triplet rules") {
  const auto lex = ab_lexicon();

  SUBCASE("box without an implying statement only yields detection") {
    AnnotationStudy study{kMeta, {ellipse(50, 50, 10, 10, {"C"}, 2)},
                          {{0, "Alpha present."}}};
    CHECK(build_od_triplets(study).size() == 1);
    CHECK(build_pg_triplets(study, lex, {}).empty());
  }

  SUBCASE("negative sentences do not form statements") {
    AnnotationStudy study{kMeta, {ellipse(50, 50, 10, 10, {"A"}, 2)},
                          {{0, "No alpha."}}};
    CHECK(build_pg_triplets(study, lex, {}).empty());
  }

  SUBCASE("shared statement pairs with the most certain box") {
    AnnotationStudy study{kMeta,
                          {ellipse(20, 20, 5, 5, {"A"}, 3),
                           ellipse(70, 70, 5, 5, {"A"}, 5)},
                          {{0, "Alpha in both lungs."}}};
    const auto pg = build_pg_triplets(study, lex, {});
    REQUIRE(pg.size() == 1);
    CHECK(pg[0].box == BoundingBox(65, 65, 75, 75));
    CHECK(build_od_triplets(study).size() == 2);
  }

  SUBCASE("distinct statements give distinct triplets") {
    AnnotationStudy study{kMeta,
                          {ellipse(20, 20, 5, 5, {"A"}, 3),
                           ellipse(70, 70, 5, 5, {"B"}, 5)},
                          {{0, "Alpha on the left."}, {1, "Beta on the right."}}};
    const auto pg = build_pg_triplets(study, lex, {});
    REQUIRE(pg.size() == 2);
    CHECK(pg[0].statement == "Alpha on the left.");
    CHECK(pg[1].statement == "Beta on the right.");
    CHECK(pg[1].sentence_indices == std::vector<int>{1});
  }

  SUBCASE("counting invariants on random studies") {
    std::mt19937_64 rng(8);
    const std::vector<std::string> labels{"A", "B", "C"};
    const std::vector<std::string> texts{"Alpha.", "Beta here.", "Gamma.",
                                         "No alpha.", "Nothing."};
    for (int trial = 0; trial < 50; ++trial) {
      AnnotationStudy study{kMeta, {}, {}};
      std::size_t label_count = 0;
      const int boxes = 1 + static_cast<int>(uniform_index(rng, 4));
      for (int i = 0; i < boxes; ++i) {
        std::set<std::string> ls;
        const int n = 1 + static_cast<int>(uniform_index(rng, 3));
        for (int j = 0; j < n; ++j) ls.insert(labels[uniform_index(rng, 3)]);
        label_count += ls.size();
        study.ellipses.push_back(
            ellipse(10.0 + 20 * i, 50, 5, 5, ls,
                    1 + static_cast<int>(uniform_index(rng, 5))));
      }
      for (int k = 0; k < 3; ++k) {
        study.sentences.push_back({k, texts[uniform_index(rng, texts.size())]});
      }
      PipelineConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(trial);
      const auto od = build_od_triplets(study);
      const auto pg = build_pg_triplets(study, lex, cfg);
      CHECK(od.size() == label_count);
      CHECK(pg.size() <= study.ellipses.size());
      std::set<std::string> statements;
      for (const auto& t : pg) statements.insert(t.statement);
      CHECK(statements.size() == pg.size());
      CHECK(build_pg_triplets(study, lex, cfg) == pg);
    }
  }
}

}  // TEST_SUITE
