#include "etbox/io/pipeline.hpp"

#include "etbox/heatmap.hpp"

namespace etbox::io {

unsigned default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

GenEtOutput run_gen_et(const std::vector<StudyBundle>& bundles,
                       const PipelineConfig& cfg, unsigned workers) {
  cfg.validate();
  const auto fingerprint = cfg.fingerprint();
  const auto runs = parallel_map<StudyRun>(
      bundles.size(), workers, [&](std::size_t i) {
        const auto& b = bundles[i];
        StudyRun run;
        const StudyInput input{b.meta, b.fixations, b.sentences};
        const auto results = generate_et_boxes(input, cfg);
        for (std::size_t k = 0; k < results.size(); ++k) {
          const auto& r = results[k];
          const auto& sentence = b.sentences[k];
          if (!r.box) {
            run.diagnostics.push_back(b.meta.study_id + " sentence " +
                                      std::to_string(r.sentence_index) + ": " +
                                      no_box_reason_name(r.reason));
            continue;
          }
          if (sentence.text.empty()) {
            run.diagnostics.push_back(b.meta.study_id + " sentence " +
                                      std::to_string(r.sentence_index) +
                                      ": EMPTY_TEXT");
            continue;
          }
          GroundingTriplet t(b.meta.study_id, *r.box, sentence.text,
                             TripletSource::kEt, r.sentence_index);
          auto record = to_record(t, fingerprint);
          record.sigma_px = r.sigma_px;
          run.records.push_back(std::move(record));
        }
        return run;
      });

  GenEtOutput out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out.sentences += bundles[i].sentences.size();
    out.boxes += runs[i].records.size();
    out.triplets.insert(out.triplets.end(), runs[i].records.begin(),
                        runs[i].records.end());
    out.diagnostics.insert(out.diagnostics.end(), runs[i].diagnostics.begin(),
                           runs[i].diagnostics.end());
  }
  sort_records(out.triplets);
  return out;
}

RepurposeOutput run_repurpose(const std::vector<StudyBundle>& bundles,
                              const LabelLexicon& lex,
                              const PipelineConfig& cfg, unsigned workers) {
  cfg.validate();
  const auto fingerprint = cfg.fingerprint();
  struct Run {
    std::vector<TripletRecord> pg;
    std::vector<TripletRecord> od;
    std::vector<std::string> diagnostics;
  };
  const auto runs =
      parallel_map<Run>(bundles.size(), workers, [&](std::size_t i) {
        const auto& b = bundles[i];
        Run run;
        AnnotationStudy study;
        study.meta = b.meta;
        for (const auto& s : b.sentences) {
          study.sentences.push_back({s.sentence_index, s.text});
        }
        for (const auto& e : b.ellipses) {
          std::set<std::string> known;
          for (const auto& label : e.labels) {
            if (lex.contains(label)) {
              known.insert(label);
            } else {
              run.diagnostics.push_back(b.meta.study_id + ": label '" + label +
                                        "' not in lexicon; ignored");
            }
          }
          if (known.empty()) continue;
          auto kept = e;
          kept.labels = std::move(known);
          study.ellipses.push_back(std::move(kept));
        }
        for (const auto& t : build_pg_triplets(study, lex, cfg)) {
          run.pg.push_back(to_record(t, fingerprint));
        }
        for (const auto& t : build_od_triplets(study, &lex)) {
          run.od.push_back(to_record(t, fingerprint));
        }
        return run;
      });

  RepurposeOutput out;
  for (const auto& r : runs) {
    out.pg.insert(out.pg.end(), r.pg.begin(), r.pg.end());
    out.od.insert(out.od.end(), r.od.begin(), r.od.end());
    out.diagnostics.insert(out.diagnostics.end(), r.diagnostics.begin(),
                           r.diagnostics.end());
  }
  sort_records(out.pg);
  sort_records(out.od);
  return out;
}

}  // namespace etbox::io
