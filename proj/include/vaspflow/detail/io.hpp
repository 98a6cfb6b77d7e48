#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "vaspflow/errors.hpp"

namespace vaspflow::detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad())
    throw Error(ErrorKind::IoError, "read failed for " + path.string());
  return buf.str();
}

inline void write_file(const std::filesystem::path& path,
                       std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace vaspflow::detail
