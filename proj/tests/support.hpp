#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "etbox/core.hpp"

namespace testing {

// Kind of the etbox::Error thrown by fn, or nothing if it returns normally.
template <typename Fn>
std::optional<etbox::ErrorKind> error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const etbox::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
