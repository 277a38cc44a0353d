// Copyright 2026 The CrowdForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crowdforge/nn/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "crowdforge/errors.hpp"

namespace crowdforge::nn {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw ParseError("bad number '" + text + "'", line);
  return v;
}

}  // namespace

std::string Checkpoint::manifest_value(const std::string& key) const {
  for (const auto& [k, v] : manifest) {
    if (k == key) return v;
  }
  return {};
}

const Parameter* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  out << kCheckpointHeader << '\n';
  for (const auto& [key, value] : checkpoint.manifest) out << "# " << key << '=' << value << '\n';
  for (const auto& t : checkpoint.tensors) {
    out << t.name << " shape " << t.value.rows() << ',' << t.value.cols() << " values";
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) out << ' ' << format_double(t.value(r, c));
    }
    out << '\n';
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint checkpoint;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || line != kCheckpointHeader) {
    throw FormatError(std::string("checkpoint must start with '") + kCheckpointHeader + "'");
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      checkpoint.manifest.emplace_back(key, line.substr(eq + 1));
      continue;
    }
    std::istringstream fields(line);
    std::string name;
    std::string shape_kw;
    std::string dims;
    std::string values_kw;
    if (!(fields >> name >> shape_kw >> dims >> values_kw) || shape_kw != "shape" ||
        values_kw != "values") {
      throw ParseError("expected '<name> shape d1,d2 values ...'", line_no);
    }
    const auto comma = dims.find(',');
    if (comma == std::string::npos) throw ParseError("bad shape '" + dims + "'", line_no);
    long rows = 0;
    long cols = 0;
    try {
      rows = std::stol(dims.substr(0, comma));
      cols = std::stol(dims.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("bad shape '" + dims + "'", line_no);
    }
    if (rows < 0 || cols < 0) throw ParseError("negative shape", line_no);
    Parameter p{name, Tensor(rows, cols)};
    std::string token;
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) {
        if (!(fields >> token)) throw ParseError("too few values for '" + name + "'", line_no);
        p.value(r, c) = parse_double(token, line_no);
      }
    }
    if (fields >> token) throw ParseError("too many values for '" + name + "'", line_no);
    checkpoint.tensors.push_back(std::move(p));
  }
  return checkpoint;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  write_checkpoint(out, checkpoint);
  if (!out) throw DataError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace crowdforge::nn
