#include "paths.hpp"

#include <fnmatch.h>

#include <algorithm>

#include "ftvs/types.hpp"

namespace ftvs::cli {

namespace fs = std::filesystem;

namespace {

bool has_wildcard(const std::string& s) { return s.find_first_of("*?[") != std::string::npos; }

void append_matches(const fs::path& dir, const std::string& pattern, std::vector<fs::path>& out) {
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir.empty() ? fs::path(".") : dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (fnmatch(pattern.c_str(), name.c_str(), 0) == 0) {
      out.push_back(dir.empty() ? fs::path(name) : dir / name);
    }
  }
}

}  // namespace

std::vector<fs::path> expand_scenario_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    const std::size_t before = files.size();
    if (fs::is_directory(p)) {
      append_matches(p, "*.toml", files);
    } else if (has_wildcard(p.filename().string())) {
      if (has_wildcard(p.parent_path().string())) {
        throw ConfigError(in + ": wildcards are only supported in the final path component");
      }
      append_matches(p.parent_path(), p.filename().string(), files);
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw ConfigError(in + ": no such file or directory");
    }
    if (files.size() == before) throw ConfigError(in + ": matched no scenario files");
    std::sort(files.begin() + static_cast<std::ptrdiff_t>(before), files.end());
  }
  std::vector<fs::path> unique;
  for (const auto& f : files) {
    if (std::find(unique.begin(), unique.end(), f) == unique.end()) unique.push_back(f);
  }
  return unique;
}

}  // namespace ftvs::cli
