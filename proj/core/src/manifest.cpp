// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/manifest.hpp"

#include <sstream>

#include "slidegraph/binary_io.hpp"
#include "slidegraph/error.hpp"

namespace slidegraph {

std::string ManifestEntry::slide_id() const { return std::filesystem::path(path).stem().string(); }

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::vector<ManifestEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty())
      throw FormatError("manifest line " + std::to_string(lineno) + ": expected <path>\\t<label>[\\t<split>]");
    ManifestEntry e;
    e.path = fields[0];
    try {
      std::size_t used = 0;
      e.label = std::stoi(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": bad label '" + fields[1] + "'");
    }
    if (fields.size() == 3) e.split = fields[2];
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string format_manifest(const std::vector<ManifestEntry>& entries, const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) {
    std::istringstream lines(header_comment);
    std::string l;
    while (std::getline(lines, l)) out << "# " << l << '\n';
  }
  for (const auto& e : entries) {
    require(e.path.find('\t') == std::string::npos && e.path.find('\n') == std::string::npos,
            "manifest paths may not contain tabs or newlines");
    out << e.path << '\t' << e.label;
    if (!e.split.empty()) out << '\t' << e.split;
    out << '\n';
  }
  return out.str();
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  auto entries = parse_manifest(std::string(bytes.begin(), bytes.end()));
  for (auto& e : entries) {
    std::filesystem::path p(e.path);
    if (p.is_relative()) e.path = (path.parent_path() / p).lexically_normal().string();
  }
  return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries,
                    const std::string& header_comment) {
  io::write_file_atomic(path, format_manifest(entries, header_comment));
}

}  // namespace slidegraph
