// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace slidegraph {

/// One slide record. On disk one line per record, tab-separated:
///   <path>\t<label>[\t<split>]
/// Blank lines and lines starting with '#' are ignored. Relative paths are
/// resolved against the manifest's directory.
struct ManifestEntry {
  std::string path;
  int label = 0;
  std::string split;

  std::string slide_id() const;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries,
                    const std::string& header_comment = {});
std::vector<ManifestEntry> parse_manifest(const std::string& text);
std::string format_manifest(const std::vector<ManifestEntry>& entries, const std::string& header_comment = {});

}  // namespace slidegraph
