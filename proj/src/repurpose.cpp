#include "etbox/repurpose.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace etbox {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool has_no_token(const std::string& lower) {
  for (std::size_t pos = lower.find("no "); pos != std::string::npos;
       pos = lower.find("no ", pos + 1)) {
    if (pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]))) {
      return true;
    }
  }
  return false;
}

}  // namespace

LabelLexicon::LabelLexicon(
    std::map<std::string, std::vector<std::string>> stems)
    : stems_(std::move(stems)) {
  for (auto& [label, list] : stems_) {
    if (label.empty()) {
      throw Error(ErrorKind::kValidation, "lexicon label must be non-empty",
                  "label");
    }
    std::vector<std::string> cleaned;
    for (const auto& stem : list) {
      auto s = to_lower(trim(stem));
      if (!s.empty()) cleaned.push_back(std::move(s));
    }
    if (cleaned.empty()) {
      throw Error(ErrorKind::kValidation,
                  "lexicon entry '" + label + "' has no stems", "stems");
    }
    list = std::move(cleaned);
  }
}

LabelLexicon LabelLexicon::default_lexicon() {
  return LabelLexicon({
      {"Abnormal mediastinal contour",
       {"mediastinal contour", "mediastinum", "mediastinal widening",
        "mediastinal silhouette"}},
      {"Acute fracture", {"fractur"}},
      {"Atelectasis", {"atelecta"}},
      {"Consolidation",
       {"consolidat", "airspace disease", "airspace opacit", "pneumonia"}},
      {"Enlarged cardiac silhouette",
       {"cardiomegaly", "cardiac silhouette", "heart size", "enlarged heart",
        "heart is enlarged", "cardiac enlargement"}},
      {"Enlarged hilum", {"hilum", "hila", "hilar"}},
      {"Groundglass opacity", {"groundglass", "ground glass", "ground-glass"}},
      {"Hiatal hernia", {"hiatal", "hiatus hernia"}},
      {"High lung volume / emphysema",
       {"emphysema", "hyperinflat", "hyperexpan", "high lung volume",
        "lung volumes are high"}},
      {"Interstitial lung disease", {"interstitial", "fibrosis", "fibrotic"}},
      {"Lung nodule or mass", {"nodul", "mass"}},
      {"Pleural abnormality", {"pleura", "effusion"}},
      {"Pneumothorax", {"pneumothora"}},
      {"Pulmonary edema", {"edema", "oedema", "vascular congestion"}},
  });
}

LabelLexicon LabelLexicon::parse(std::string_view text) {
  std::map<std::string, std::vector<std::string>> stems;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto colon = stripped.rfind(':');
    if (colon == std::string::npos) {
      throw Error(ErrorKind::kRow,
                  "lexicon line " + std::to_string(line_no) +
                      ": expected 'label: stem, ...'");
    }
    const auto label = trim(std::string_view(stripped).substr(0, colon));
    auto& list = stems[label];
    std::istringstream stem_in(stripped.substr(colon + 1));
    std::string stem;
    while (std::getline(stem_in, stem, ',')) list.push_back(stem);
  }
  return LabelLexicon(std::move(stems));
}

LabelLexicon LabelLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open lexicon " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const std::vector<std::string>& LabelLexicon::stems(
    const std::string& label) const {
  const auto it = stems_.find(label);
  if (it == stems_.end()) {
    throw Error(ErrorKind::kUnknownLabel, "label '" + label + "'", "label");
  }
  return it->second;
}

std::vector<std::string> LabelLexicon::labels() const {
  std::vector<std::string> out;
  for (const auto& [label, _] : stems_) out.push_back(label);
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

BoundingBox ellipse_to_box(const AnnotatedEllipse& e, const ImageMeta& meta) {
  const double x0 = std::floor(e.center_x_px - e.semi_axis_x_px);
  const double y0 = std::floor(e.center_y_px - e.semi_axis_y_px);
  const double x1 = std::ceil(e.center_x_px + e.semi_axis_x_px);
  const double y1 = std::ceil(e.center_y_px + e.semi_axis_y_px);
  const double cx0 = std::max(x0, 0.0);
  const double cy0 = std::max(y0, 0.0);
  const double cx1 = std::min(x1, static_cast<double>(meta.width_px));
  const double cy1 = std::min(y1, static_cast<double>(meta.height_px));
  if (cx0 >= cx1 || cy0 >= cy1) {
    throw Error(ErrorKind::kEllipseOutsideImage,
                "ellipse centered at (" + std::to_string(e.center_x_px) +
                    ", " + std::to_string(e.center_y_px) +
                    ") does not intersect the image");
  }
  return BoundingBox(static_cast<int>(cx0), static_cast<int>(cy0),
                     static_cast<int>(cx1), static_cast<int>(cy1));
}

bool is_negative_sentence(std::string_view sentence) {
  const auto lower = to_lower(sentence);
  const bool normal = lower.find("normal") != std::string::npos &&
                      lower.find("abnormal") == std::string::npos;
  return normal || has_no_token(lower);
}

std::vector<std::string> filter_negative_sentences(
    const std::vector<std::string>& sentences) {
  std::vector<std::string> kept;
  for (const auto& s : sentences) {
    if (!is_negative_sentence(s)) kept.push_back(s);
  }
  return kept;
}

std::vector<ReportSentence> filter_negative_sentences(
    const std::vector<ReportSentence>& sentences) {
  std::vector<ReportSentence> kept;
  for (const auto& s : sentences) {
    if (!is_negative_sentence(s.text)) kept.push_back(s);
  }
  return kept;
}

bool sentence_implies_label(std::string_view sentence,
                            const std::string& label,
                            const LabelLexicon& lex) {
  const auto& stems = lex.stems(label);
  const auto lower = to_lower(sentence);
  return std::any_of(stems.begin(), stems.end(), [&](const std::string& s) {
    return lower.find(s) != std::string::npos;
  });
}

std::optional<Statement> build_statement(
    const std::set<std::string>& box_labels,
    const std::vector<ReportSentence>& retained_sentences,
    const LabelLexicon& lex) {
  Statement st;
  for (const auto& sentence : retained_sentences) {
    bool implies_any = false;
    for (const auto& label : box_labels) {
      if (sentence_implies_label(sentence.text, label, lex)) {
        st.implied_labels.insert(label);
        implies_any = true;
      }
    }
    if (!implies_any) continue;
    const auto text = trim(sentence.text);
    if (!st.text.empty()) st.text += ' ';
    st.text += text;
    st.source_sentence_indices.push_back(sentence.sentence_index);
  }
  if (st.implied_labels.empty() || st.text.empty()) return std::nullopt;
  return st;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  if (n == 0) {
    throw Error(ErrorKind::kValidation, "cannot draw from an empty range");
  }
  const std::uint64_t range = n;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % range);
}

std::size_t pair_statement_with_box(const std::vector<BoxCandidate>& candidates,
                                    std::mt19937_64& rng) {
  if (candidates.empty()) {
    throw Error(ErrorKind::kValidation, "no candidate boxes", "candidates");
  }
  int best = 0;
  for (const auto& c : candidates) best = std::max(best, c.certainty);
  std::vector<std::size_t> top;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].certainty == best) top.push_back(i);
  }
  if (top.size() == 1) return top.front();
  return top[uniform_index(rng, top.size())];
}

std::uint64_t study_seed(std::uint64_t seed, const std::string& study_id) {
  return seed ^ stable_hash(study_id);
}

std::vector<GroundingTriplet> build_pg_triplets(const AnnotationStudy& study,
                                                const LabelLexicon& lex,
                                                const PipelineConfig& cfg) {
  const auto retained = filter_negative_sentences(study.sentences);

  struct Group {
    Statement statement;
    std::vector<std::size_t> ellipse_indices;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < study.ellipses.size(); ++i) {
    auto st = build_statement(study.ellipses[i].labels, retained, lex);
    if (!st) continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.statement.text == st->text;
    });
    if (it == groups.end()) {
      groups.push_back(Group{std::move(*st), {i}});
    } else {
      it->statement.implied_labels.insert(st->implied_labels.begin(),
                                          st->implied_labels.end());
      it->ellipse_indices.push_back(i);
    }
  }

  std::mt19937_64 rng(study_seed(cfg.seed, study.meta.study_id));
  std::vector<GroundingTriplet> out;
  for (const auto& g : groups) {
    std::vector<BoxCandidate> candidates;
    for (auto idx : g.ellipse_indices) {
      const auto& e = study.ellipses[idx];
      candidates.push_back({ellipse_to_box(e, study.meta), e.certainty});
    }
    const auto chosen = pair_statement_with_box(candidates, rng);
    const auto& e = study.ellipses[g.ellipse_indices[chosen]];
    GroundingTriplet t(study.meta.study_id, candidates[chosen].box,
                       g.statement.text, TripletSource::kAnnotation,
                       std::nullopt);
    t.sentence_indices = g.statement.source_sentence_indices;
    t.labels = e.labels;
    t.certainty = e.certainty;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<DetectionTriplet> build_od_triplets(const AnnotationStudy& study,
                                                const LabelLexicon* lex) {
  std::vector<ReportSentence> retained;
  if (lex) retained = filter_negative_sentences(study.sentences);
  std::vector<DetectionTriplet> out;
  for (const auto& e : study.ellipses) {
    const auto box = ellipse_to_box(e, study.meta);
    std::vector<int> sentence_indices;
    if (lex) {
      if (auto st = build_statement(e.labels, retained, *lex)) {
        sentence_indices = st->source_sentence_indices;
      }
    }
    for (const auto& label : e.labels) {
      DetectionTriplet t(study.meta.study_id, box, label);
      t.certainty = e.certainty;
      t.sentence_indices = sentence_indices;
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace etbox
