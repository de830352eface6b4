#include "etbox/io/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "etbox/io/csv.hpp"

namespace etbox::io {

namespace {

template <std::size_t N>
Header read_header(CsvReader& reader, const char* const (&expected)[N]) {
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw Error(ErrorKind::kSchema, "empty file: missing header row");
  }
  Header header(fields);
  for (const char* name : expected) {
    if (!header.has(name)) {
      std::string want;
      for (const char* n : expected) want += (want.empty() ? "" : ",") + std::string(n);
      throw Error(ErrorKind::kSchema, "header must contain '" + want +
                                          "', got '" + join_csv(fields) + "'");
    }
  }
  return header;
}

// Runs `parse_row` on each data row, collecting failures as row errors.
template <typename T, typename Fn>
void for_each_row(CsvReader& reader, const Header& header,
                  const ParseOptions& options, ParseResult<T>& result,
                  Fn&& parse_row) {
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    try {
      if (fields.size() != header.names().size()) {
        throw Error(ErrorKind::kRow,
                    "expected " + std::to_string(header.names().size()) +
                        " fields, got " + std::to_string(fields.size()));
      }
      parse_row(fields);
    } catch (const Error& e) {
      result.errors.push_back(RowError{reader.line(), e.what()});
      if (result.errors.size() > options.max_row_errors) {
        throw Error(ErrorKind::kRow,
                    "too many malformed rows (" +
                        std::to_string(result.errors.size()) +
                        "); last at line " + std::to_string(reader.line()) +
                        ": " + e.what());
      }
    }
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  return out;
}

std::string field_at(const std::vector<std::string>& fields,
                     const Header& header, const char* name) {
  return fields[header.index(name)];
}

std::set<std::string> split_labels(const std::string& text) {
  std::set<std::string> labels;
  std::istringstream in(text);
  std::string label;
  while (std::getline(in, label, ';')) {
    const auto b = label.find_first_not_of(" \t");
    const auto e = label.find_last_not_of(" \t");
    if (b != std::string::npos) labels.insert(label.substr(b, e - b + 1));
  }
  return labels;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ParseResult<ImageMeta> parse_meta(std::istream& in,
                                  const ParseOptions& options) {
  CsvReader reader(in);
  const auto header = read_header(reader, kMetaColumns);
  ParseResult<ImageMeta> result;
  std::set<std::string> seen;
  for_each_row(reader, header, options, result, [&](const auto& f) {
    ImageMeta meta(field_at(f, header, "study_id"),
                   static_cast<int>(parse_int(field_at(f, header, "width_px"),
                                              "width_px")),
                   static_cast<int>(parse_int(field_at(f, header, "height_px"),
                                              "height_px")));
    if (!seen.insert(meta.study_id).second) {
      throw Error(ErrorKind::kValidation,
                  "duplicate study_id '" + meta.study_id + "'", "study_id");
    }
    result.records.push_back(std::move(meta));
  });
  return result;
}

MetaIndex index_meta(const std::vector<ImageMeta>& metas) {
  MetaIndex index;
  for (const auto& m : metas) index.emplace(m.study_id, m);
  return index;
}

ParseResult<FixationRecord> parse_fixations(std::istream& in,
                                            const MetaIndex& metas,
                                            const ParseOptions& options) {
  CsvReader reader(in);
  const auto header = read_header(reader, kFixationColumns);
  ParseResult<FixationRecord> result;
  for_each_row(reader, header, options, result, [&](const auto& f) {
    const auto study = field_at(f, header, "study_id");
    Fixation fix(parse_double(field_at(f, header, "x_px"), "x_px"),
                 parse_double(field_at(f, header, "y_px"), "y_px"),
                 parse_double(field_at(f, header, "t_start_s"), "t_start_s"),
                 parse_double(field_at(f, header, "t_end_s"), "t_end_s"));
    const auto it = metas.find(study);
    if (it == metas.end()) {
      throw Error(ErrorKind::kValidation,
                  "no image meta for study '" + study + "'", "study_id");
    }
    if (!it->second.contains_point(fix.x_px, fix.y_px)) {
      ++result.dropped_out_of_image;
      return;
    }
    result.records.push_back(FixationRecord{study, fix});
  });
  return result;
}

ParseResult<TranscriptRecord> parse_transcript(std::istream& in,
                                               const ParseOptions& options) {
  CsvReader reader(in);
  const auto header = read_header(reader, kTranscriptColumns);
  ParseResult<TranscriptRecord> result;
  for_each_row(reader, header, options, result, [&](const auto& f) {
    const auto study = field_at(f, header, "study_id");
    if (study.empty()) {
      throw Error(ErrorKind::kValidation, "empty study_id", "study_id");
    }
    SentenceSpan s(
        static_cast<int>(
            parse_int(field_at(f, header, "sentence_index"), "sentence_index")),
        field_at(f, header, "text"),
        parse_double(field_at(f, header, "t_start_s"), "t_start_s"),
        parse_double(field_at(f, header, "t_end_s"), "t_end_s"));
    result.records.push_back(TranscriptRecord{study, std::move(s)});
  });
  return result;
}

ParseResult<AnnotationRecord> parse_annotations(std::istream& in,
                                                const ParseOptions& options) {
  CsvReader reader(in);
  const auto header = read_header(reader, kAnnotationColumns);
  ParseResult<AnnotationRecord> result;
  for_each_row(reader, header, options, result, [&](const auto& f) {
    const auto study = field_at(f, header, "study_id");
    if (study.empty()) {
      throw Error(ErrorKind::kValidation, "empty study_id", "study_id");
    }
    AnnotatedEllipse e(
        parse_double(field_at(f, header, "center_x_px"), "center_x_px"),
        parse_double(field_at(f, header, "center_y_px"), "center_y_px"),
        parse_double(field_at(f, header, "semi_axis_x_px"), "semi_axis_x_px"),
        parse_double(field_at(f, header, "semi_axis_y_px"), "semi_axis_y_px"),
        split_labels(field_at(f, header, "labels")),
        static_cast<int>(
            parse_int(field_at(f, header, "certainty"), "certainty")));
    result.records.push_back(AnnotationRecord{study, std::move(e)});
  });
  return result;
}

ParseResult<ImageMeta> parse_meta(const std::string& path,
                                  const ParseOptions& options) {
  auto in = open_in(path);
  return parse_meta(in, options);
}

ParseResult<FixationRecord> parse_fixations(const std::string& path,
                                            const MetaIndex& metas,
                                            const ParseOptions& options) {
  auto in = open_in(path);
  return parse_fixations(in, metas, options);
}

ParseResult<TranscriptRecord> parse_transcript(const std::string& path,
                                               const ParseOptions& options) {
  auto in = open_in(path);
  return parse_transcript(in, options);
}

ParseResult<AnnotationRecord> parse_annotations(const std::string& path,
                                                const ParseOptions& options) {
  auto in = open_in(path);
  return parse_annotations(in, options);
}

void write_meta(const std::vector<ImageMeta>& metas, std::ostream& out) {
  out << "study_id,width_px,height_px\n";
  for (const auto& m : metas) {
    out << csv_field(m.study_id) << ',' << m.width_px << ',' << m.height_px
        << '\n';
  }
}

void write_fixations(const std::vector<FixationRecord>& records,
                     std::ostream& out) {
  out << "study_id,t_start_s,t_end_s,x_px,y_px\n";
  for (const auto& r : records) {
    out << csv_field(r.study_id) << ',' << format_real(r.fixation.t_start_s)
        << ',' << format_real(r.fixation.t_end_s) << ','
        << format_real(r.fixation.x_px) << ',' << format_real(r.fixation.y_px)
        << '\n';
  }
}

void write_transcript(const std::vector<TranscriptRecord>& records,
                      std::ostream& out) {
  out << "study_id,sentence_index,t_start_s,t_end_s,text\n";
  for (const auto& r : records) {
    out << csv_field(r.study_id) << ',' << r.sentence.sentence_index << ','
        << format_real(r.sentence.t_start_s) << ','
        << format_real(r.sentence.t_end_s) << ','
        << csv_field(r.sentence.text, true) << '\n';
  }
}

void write_annotations(const std::vector<AnnotationRecord>& records,
                       std::ostream& out) {
  out << "study_id,center_x_px,center_y_px,semi_axis_x_px,semi_axis_y_px,"
         "labels,certainty\n";
  for (const auto& r : records) {
    std::string labels;
    for (const auto& l : r.ellipse.labels) {
      labels += (labels.empty() ? "" : ";") + l;
    }
    out << csv_field(r.study_id) << ',' << format_real(r.ellipse.center_x_px)
        << ',' << format_real(r.ellipse.center_y_px) << ','
        << format_real(r.ellipse.semi_axis_x_px) << ','
        << format_real(r.ellipse.semi_axis_y_px) << ',' << csv_field(labels)
        << ',' << r.ellipse.certainty << '\n';
  }
}

void write_meta(const std::vector<ImageMeta>& metas, const std::string& path) {
  auto out = open_out(path);
  write_meta(metas, out);
}

void write_fixations(const std::vector<FixationRecord>& records,
                     const std::string& path) {
  auto out = open_out(path);
  write_fixations(records, out);
}

void write_transcript(const std::vector<TranscriptRecord>& records,
                      const std::string& path) {
  auto out = open_out(path);
  write_transcript(records, out);
}

void write_annotations(const std::vector<AnnotationRecord>& records,
                       const std::string& path) {
  auto out = open_out(path);
  write_annotations(records, out);
}

std::vector<StudyBundle> assemble_bundles(
    const std::vector<ImageMeta>& metas,
    const std::vector<FixationRecord>& fixations,
    const std::vector<TranscriptRecord>& transcript,
    const std::vector<AnnotationRecord>& annotations,
    std::vector<std::string>* warnings) {
  auto warn = [&](std::string message) {
    if (warnings) warnings->push_back(std::move(message));
  };
  std::map<std::string, StudyBundle> bundles;
  for (const auto& m : metas) {
    StudyBundle b;
    b.meta = m;
    bundles.emplace(m.study_id, std::move(b));
  }
  std::set<std::string> orphan_studies;
  auto find = [&](const std::string& study) -> StudyBundle* {
    const auto it = bundles.find(study);
    if (it == bundles.end()) {
      if (orphan_studies.insert(study).second) {
        warn("study '" + study + "' has records but no image meta; skipped");
      }
      return nullptr;
    }
    return &it->second;
  };
  for (const auto& r : fixations) {
    if (auto* b = find(r.study_id)) b->fixations.push_back(r.fixation);
  }
  for (const auto& r : transcript) {
    if (auto* b = find(r.study_id)) b->sentences.push_back(r.sentence);
  }
  for (const auto& r : annotations) {
    auto* b = find(r.study_id);
    if (!b) continue;
    try {
      ellipse_to_box(r.ellipse, b->meta);
      b->ellipses.push_back(r.ellipse);
    } catch (const Error& e) {
      warn("study '" + r.study_id + "': " + e.what() + "; ellipse skipped");
    }
  }

  std::vector<StudyBundle> out;
  for (auto& [study, b] : bundles) {
    std::stable_sort(b.fixations.begin(), b.fixations.end(),
                     [](const Fixation& a, const Fixation& c) {
                       return a.t_start_s < c.t_start_s;
                     });
    std::stable_sort(b.sentences.begin(), b.sentences.end(),
                     [](const SentenceSpan& a, const SentenceSpan& c) {
                       return a.t_start_s < c.t_start_s;
                     });
    try {
      validate_sentence_order(b.sentences);
    } catch (const Error& e) {
      warn("study '" + study + "': " + e.what() + "; study skipped");
      continue;
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::string read_file(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
}

void apply_config_value(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
  const auto lower = to_lower(value);
  if (key == "psi_s") {
    cfg.psi_s = parse_double(value, key);
  } else if (key == "sigma_px") {
    if (lower == "auto" || lower.empty()) {
      cfg.sigma_px.reset();
    } else {
      cfg.sigma_px = parse_double(value, key);
    }
  } else if (key == "threshold_frac") {
    cfg.threshold_frac = parse_double(value, key);
  } else if (key == "min_area_frac") {
    cfg.min_area_frac = parse_double(value, key);
  } else if (key == "connectivity") {
    if (lower == "8" || lower == "eight") {
      cfg.connectivity = Connectivity::kEight;
    } else if (lower == "4" || lower == "four") {
      cfg.connectivity = Connectivity::kFour;
    } else {
      throw Error(ErrorKind::kValidation,
                  "connectivity must be 4 or 8, got '" + value + "'", key);
    }
  } else if (key == "assignment_mode") {
    if (lower == "containment") {
      cfg.assignment_mode = AssignmentMode::kContainment;
    } else if (lower == "overlap") {
      cfg.assignment_mode = AssignmentMode::kOverlap;
    } else {
      throw Error(ErrorKind::kValidation,
                  "assignment_mode must be containment or overlap", key);
    }
  } else if (key == "seed") {
    const auto v = parse_int(value, key);
    if (v < 0) throw Error(ErrorKind::kValidation, "seed must be >= 0", key);
    cfg.seed = static_cast<std::uint64_t>(v);
  } else {
    throw Error(ErrorKind::kValidation, "unknown config key '" + key + "'",
                key);
  }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kRow, "config line " + std::to_string(line_no) +
                                       ": expected key=value");
    }
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_config_value(base, strip(line.substr(0, eq)),
                       strip(line.substr(eq + 1)));
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
  return parse_config(read_file(path), std::move(base));
}

SplitResult split_dataset(const std::vector<std::string>& study_ids,
                          double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw Error(ErrorKind::kValidation, "ratio must be in [0,1]", "ratio");
  }
  const std::size_t n = study_ids.size();
  const auto val_count =
      static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  std::vector<bool> is_val(n, false);
  for (std::size_t i = 0; i < val_count; ++i) is_val[order[i]] = true;
  SplitResult out;
  for (std::size_t i = 0; i < n; ++i) {
    (is_val[i] ? out.val : out.train).push_back(study_ids[i]);
  }
  return out;
}

}  // namespace etbox::io
