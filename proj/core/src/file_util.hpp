#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "graphrqi/errors.hpp"

namespace graphrqi::detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed", path.string());
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("write failed", path.string());
}

}  // namespace graphrqi::detail
