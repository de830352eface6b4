#include "etbox/io/reflacx.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>

#include "etbox/io/csv.hpp"

namespace etbox::io {

namespace fs = std::filesystem;

namespace {

struct Table {
  Header header;
  std::vector<std::vector<std::string>> rows;
};

Table read_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  CsvReader reader(in);
  Table t;
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw Error(ErrorKind::kSchema, path.string() + " is empty");
  }
  t.header = Header(fields);
  while (reader.next(fields)) {
    fields.resize(t.header.names().size());
    t.rows.push_back(fields);
  }
  return t;
}

const std::string& column(const Table& t, const std::vector<std::string>& row,
                          std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (t.header.has(name)) return row[t.header.index(name)];
  }
  throw Error(ErrorKind::kSchema,
              std::string("missing column '") + *names.begin() + "'");
}

bool truthy(const std::string& v) {
  const auto lower = to_lower(v);
  return lower == "true" || lower == "1" || lower == "1.0" || lower == "yes";
}

fs::path data_dir(const fs::path& root) {
  if (fs::is_directory(root / "main_data")) return root / "main_data";
  return root;
}

std::vector<fs::path> metadata_files(const fs::path& dir,
                                     const ReflacxOptions& options) {
  const std::regex pattern(R"(metadata_phase_(\d+)\.csv)");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const auto name = entry.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    if (options.phase && std::stoi(m[1]) != *options.phase) continue;
    out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

constexpr const char* kEllipseFixedColumns[] = {"id",   "xmin", "ymin",
                                                "xmax", "ymax", "certainty"};

StudyBundle load_study(const fs::path& dir, const ImageMeta& meta,
                       ReflacxImport& report) {
  StudyBundle b;
  b.meta = meta;

  const auto fix = read_table(dir / "fixations.csv");
  for (const auto& row : fix.rows) {
    Fixation f(parse_double(column(fix, row, {"x_position",
                                              "average_x_position"}),
                            "x_position"),
               parse_double(column(fix, row, {"y_position",
                                              "average_y_position"}),
                            "y_position"),
               parse_double(column(fix, row, {"timestamp_start_fixation"}),
                            "timestamp_start_fixation"),
               parse_double(column(fix, row, {"timestamp_end_fixation"}),
                            "timestamp_end_fixation"));
    if (!meta.contains_point(f.x_px, f.y_px)) {
      ++report.dropped_fixations;
      continue;
    }
    b.fixations.push_back(f);
  }
  std::stable_sort(b.fixations.begin(), b.fixations.end(),
                   [](const Fixation& a, const Fixation& c) {
                     return a.t_start_s < c.t_start_s;
                   });

  const auto words_table = read_table(dir / "timestamps_transcription.csv");
  std::vector<TimedWord> words;
  for (const auto& row : words_table.rows) {
    words.push_back(TimedWord{
        column(words_table, row, {"word"}),
        parse_double(column(words_table, row, {"timestamp_start_word"}),
                     "timestamp_start_word"),
        parse_double(column(words_table, row, {"timestamp_end_word"}),
                     "timestamp_end_word")});
  }
  b.sentences = segment_sentences(words);
  validate_sentence_order(b.sentences);

  const auto ellipse_path = dir / "anomaly_location_ellipses.csv";
  if (fs::exists(ellipse_path)) {
    const auto ell = read_table(ellipse_path);
    for (const auto& row : ell.rows) {
      const double x0 = parse_double(column(ell, row, {"xmin"}), "xmin");
      const double y0 = parse_double(column(ell, row, {"ymin"}), "ymin");
      const double x1 = parse_double(column(ell, row, {"xmax"}), "xmax");
      const double y1 = parse_double(column(ell, row, {"ymax"}), "ymax");
      std::set<std::string> labels;
      for (std::size_t c = 0; c < ell.header.names().size(); ++c) {
        const auto& name = ell.header.names()[c];
        const bool fixed =
            std::find_if(std::begin(kEllipseFixedColumns),
                         std::end(kEllipseFixedColumns),
                         [&](const char* n) { return name == n; }) !=
            std::end(kEllipseFixedColumns);
        if (!fixed && truthy(row[c])) labels.insert(name);
      }
      if (labels.empty()) {
        report.warnings.push_back(meta.study_id +
                                  ": ellipse without labels skipped");
        continue;
      }
      const int certainty = static_cast<int>(
          parse_double(column(ell, row, {"certainty"}), "certainty"));
      AnnotatedEllipse e(0.5 * (x0 + x1), 0.5 * (y0 + y1), 0.5 * (x1 - x0),
                         0.5 * (y1 - y0), std::move(labels), certainty);
      try {
        ellipse_to_box(e, meta);
      } catch (const Error& err) {
        report.warnings.push_back(meta.study_id + ": " + err.what());
        continue;
      }
      b.ellipses.push_back(std::move(e));
    }
  }
  return b;
}

}  // namespace

std::vector<SentenceSpan> segment_sentences(
    const std::vector<TimedWord>& words) {
  std::vector<SentenceSpan> out;
  std::string text;
  double start = 0.0, end = 0.0;
  bool open = false;
  auto flush = [&] {
    if (!open) return;
    open = false;
    if (end <= start) return;
    out.emplace_back(static_cast<int>(out.size()), text, start, end);
  };
  for (const auto& w : words) {
    std::string token = w.word;
    const auto b = token.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    token = token.substr(b, token.find_last_not_of(" \t") - b + 1);
    const bool punct_only = token.find_first_not_of(".,;:?!") ==
                            std::string::npos;
    if (!open) {
      if (punct_only) continue;
      open = true;
      text.clear();
      start = w.t_start_s;
    }
    if (!text.empty() && !punct_only) text += ' ';
    text += token;
    end = std::max(end, w.t_end_s);
    const char last = token.back();
    if (last == '.' || last == '?' || last == '!') flush();
  }
  flush();
  return out;
}

ReflacxImport import_reflacx(const std::string& root,
                             const ReflacxOptions& options) {
  const auto dir = data_dir(root);
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::kIo, root + " is not a directory");
  }
  ReflacxImport report;
  const auto meta_files = metadata_files(dir, options);
  if (meta_files.empty()) {
    throw Error(ErrorKind::kSchema,
                "no metadata_phase_<N>.csv under " + dir.string());
  }
  std::set<std::string> seen;
  for (const auto& path : meta_files) {
    const auto table = read_table(path);
    for (const auto& row : table.rows) {
      const auto& id = column(table, row, {"id"});
      if (!seen.insert(id).second) continue;
      if (!options.include_discarded &&
          table.header.has("eye_tracking_data_discarded") &&
          truthy(column(table, row, {"eye_tracking_data_discarded"}))) {
        ++report.skipped_studies;
        continue;
      }
      try {
        const ImageMeta meta(
            id,
            static_cast<int>(parse_int(column(table, row, {"image_size_x"}),
                                       "image_size_x")),
            static_cast<int>(parse_int(column(table, row, {"image_size_y"}),
                                       "image_size_y")));
        report.bundles.push_back(load_study(dir / id, meta, report));
      } catch (const Error& e) {
        ++report.skipped_studies;
        report.warnings.push_back(id + ": " + e.what() + "; study skipped");
      }
    }
  }
  std::sort(report.bundles.begin(), report.bundles.end(),
            [](const StudyBundle& a, const StudyBundle& b) {
              return a.meta.study_id < b.meta.study_id;
            });
  return report;
}

void write_bundles(const std::vector<StudyBundle>& bundles,
                   const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<ImageMeta> metas;
  std::vector<FixationRecord> fixations;
  std::vector<TranscriptRecord> transcript;
  std::vector<AnnotationRecord> annotations;
  for (const auto& b : bundles) {
    metas.push_back(b.meta);
    for (const auto& f : b.fixations) {
      fixations.push_back({b.meta.study_id, f});
    }
    for (const auto& s : b.sentences) {
      transcript.push_back({b.meta.study_id, s});
    }
    for (const auto& e : b.ellipses) {
      annotations.push_back({b.meta.study_id, e});
    }
  }
  const fs::path dir(out_dir);
  write_meta(metas, (dir / "meta.csv").string());
  write_fixations(fixations, (dir / "fixations.csv").string());
  write_transcript(transcript, (dir / "transcript.csv").string());
  write_annotations(annotations, (dir / "annotations.csv").string());
}

}  // namespace etbox::io
