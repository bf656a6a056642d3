#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mpiv/errors.h"

namespace mpiv {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Writes via a temp file in the same directory, then renames into place.
inline void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot write file: " + tmp.string());
    out << content;
    if (!out) throw std::invalid_argument("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace mpiv
