#include <doctest.h>

#include <filesystem>
#include <json.hpp>

#include "cli.hpp"
#include "etbox/io/formats.hpp"
#include "etbox/io/triplets.hpp"
#include "support.hpp"

using namespace etbox;
using testing::TempDir;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "etbox");
  return cli::run(args);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
  CHECK(run({}) == cli::kExitUsage);
  CHECK(run({"frobnicate"}) == cli::kExitUsage);
  CHECK(run({"gen-et", "--meta", "x.csv"}) == cli::kExitUsage);
  CHECK(run({"split", "--meta", "m", "--ratio", "abc", "--train-out", "a",
             "--val-out", "b"}) == cli::kExitUsage);
  CHECK(run({"--help"}) == cli::kExitOk);
}

TEST_CASE("synthetic data through every stage") {
  TempDir dir("cli");
  const auto d = [&](const std::string& f) { return dir.file(f); };
  REQUIRE(run({"synth", "--out-dir", d("data"), "--studies", "4", "--seed",
               "3"}) == cli::kExitOk);
  CHECK(std::filesystem::exists(d("data/meta.csv")));
  CHECK(io::read_triplets(d("data/targets.jsonl")).size() == 12);

  REQUIRE(run({"gen-et", "--meta", d("data/meta.csv"), "--fixations",
               d("data/fixations.csv"), "--transcript",
               d("data/transcript.csv"), "--out", d("et.jsonl"),
               "--diagnostics", d("diag.txt"), "--workers", "2"}) ==
          cli::kExitOk);
  const auto et = io::read_triplets(d("et.jsonl"));
  CHECK(et.size() == 12);
  CHECK(et[0].sigma_px == 512.0 / 20.0);

  REQUIRE(run({"repurpose", "--meta", d("data/meta.csv"), "--annotations",
               d("data/annotations.csv"), "--transcript",
               d("data/transcript.csv"), "--pg-out", d("pg.jsonl"), "--od-out",
               d("od.jsonl")}) == cli::kExitOk);
  CHECK(io::read_triplets(d("od.jsonl")).size() == 12);

  REQUIRE(run({"eval", "--gt", d("pg.jsonl"), "--pred", d("pg.jsonl"), "--et",
               d("et.jsonl"), "--out", d("report.json")}) == cli::kExitOk);
  const auto report = nlohmann::json::parse(io::read_file(d("report.json")));
  CHECK(report["miou_per_box"] == 1.0);
  CHECK(report["cr_table"].size() == 2);

  REQUIRE(run({"render", "--meta", d("data/meta.csv"), "--study", "synth-0001",
               "--fixations", d("data/fixations.csv"), "--transcript",
               d("data/transcript.csv"), "--sentence", "0", "--et",
               d("et.jsonl"), "--gt", d("pg.jsonl"), "--out", d("o.png"),
               "--heatmap-out", d("h.png")}) == cli::kExitOk);
  CHECK(std::filesystem::file_size(d("o.png")) > 0);
  CHECK(std::filesystem::file_size(d("h.png")) > 0);

  REQUIRE(run({"split", "--meta", d("data/meta.csv"), "--ratio", "0.25",
               "--seed", "1", "--train-out", d("train.txt"), "--val-out",
               d("val.txt")}) == cli::kExitOk);
  CHECK(io::read_file(d("val.txt")).find("synth-") != std::string::npos);
}

TEST_CASE("validation failures exit with 1") {
  TempDir dir("clibad");
  io::write_file(dir.file("meta.csv"), "wrong,header\n");
  CHECK(run({"gen-et", "--meta", dir.file("meta.csv"), "--fixations",
             dir.file("meta.csv"), "--transcript", dir.file("meta.csv"),
             "--out", dir.file("o.jsonl")}) == cli::kExitValidation);
  CHECK(run({"eval", "--gt", dir.file("missing.jsonl")}) ==
        cli::kExitValidation);
  CHECK(run({"synth", "--out-dir", dir.file("s"), "--sigma", "-1"}) ==
        cli::kExitUsage);
  io::write_file(dir.file("m2.csv"), "study_id,width_px,height_px\na,10,10\n");
  CHECK(run({"split", "--meta", dir.file("m2.csv"), "--ratio", "2",
             "--train-out", dir.file("t"), "--val-out", dir.file("v")}) ==
        cli::kExitUsage);  // range checked while parsing
  CHECK(run({"split", "--meta", dir.file("nope.csv"), "--ratio", "0.5",
             "--train-out", dir.file("t"), "--val-out", dir.file("v")}) ==
        cli::kExitValidation);
}

}  // TEST_SUITE
