// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#ifndef DSTL_CORPUS_DIR
#define DSTL_CORPUS_DIR "corpus"
#endif

inline std::string corpus_path(const std::string& rel) {
  return std::string(DSTL_CORPUS_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
