#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "etbox/core.hpp"
#include "etbox/io/formats.hpp"
#include "etbox/io/triplets.hpp"
#include "etbox/repurpose.hpp"

namespace etbox::io {

unsigned default_workers();

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results land in slot
// i, so output never depends on scheduling. The first exception is rethrown.
template <typename T>
std::vector<T> parallel_map(std::size_t n, unsigned workers,
                            const std::function<T(std::size_t)>& fn) {
  std::vector<T> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(workers, 1u), n));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

struct StudyRun {
  std::vector<TripletRecord> records;
  std::vector<std::string> diagnostics;
};

struct GenEtOutput {
  std::vector<TripletRecord> triplets;
  std::vector<std::string> diagnostics;
  std::size_t sentences = 0;
  std::size_t boxes = 0;
};

GenEtOutput run_gen_et(const std::vector<StudyBundle>& bundles,
                       const PipelineConfig& cfg, unsigned workers);

struct RepurposeOutput {
  std::vector<TripletRecord> pg;
  std::vector<TripletRecord> od;
  std::vector<std::string> diagnostics;
};

RepurposeOutput run_repurpose(const std::vector<StudyBundle>& bundles,
                              const LabelLexicon& lex,
                              const PipelineConfig& cfg, unsigned workers);

}  // namespace etbox::io
