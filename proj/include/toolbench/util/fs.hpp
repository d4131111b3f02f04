#pragma once

#include <filesystem>
#include <string>

namespace toolbench::util {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// Creates a fresh directory under the system temp dir and removes it on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "toolbench");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  TempDir(TempDir&& other) noexcept;
  TempDir& operator=(TempDir&& other) noexcept;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace toolbench::util
