#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace beq::test {

inline std::string fixture_path(const std::string& rel) {
  return std::string(BEQ_FIXTURE_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace beq::test
