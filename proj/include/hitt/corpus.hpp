#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hitt/error.hpp"
#include "hitt/session.hpp"

namespace hitt {

/// Manifest: plain text, `[tier-N]` headers followed by file paths relative to
/// the manifest. Blank lines and `#` comments are ignored.
struct Manifest {
  std::filesystem::path dir;
  std::map<int, std::vector<std::string>> tiers;

  const std::vector<std::string>& tier(int n) const {
    static const std::vector<std::string> none;
    auto it = tiers.find(n);
    return it == tiers.end() ? none : it->second;
  }
};

inline Manifest parse_manifest(const std::string& text, std::filesystem::path dir) {
  Manifest m;
  m.dir = std::move(dir);
  int current = -1;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    if (line.front() == '[') {
      if (line.size() < 8 || line.rfind("[tier-", 0) != 0 || line.back() != ']')
        throw Error(ErrorKind::ParseError, "manifest line " + std::to_string(line_no) + ": bad header " + line);
      try {
        current = std::stoi(line.substr(6, line.size() - 7));
      } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "manifest line " + std::to_string(line_no) + ": bad tier " + line);
      }
      m.tiers[current];
      continue;
    }
    if (current < 0)
      throw Error(ErrorKind::ParseError, "manifest line " + std::to_string(line_no) + ": file before any tier header");
    m.tiers[current].push_back(line);
  }
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read manifest " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_manifest(text, path.parent_path());
}

struct CheckReport {
  std::string name;
  std::string status; // "ok" or the error kind
  double millis = 0;
  std::uint64_t steps = 0;
  std::size_t depth = 0;
  std::string message; // not serialized
};

inline nlohmann::json to_json(const CheckReport& r) {
  return {{"name", r.name}, {"status", r.status}, {"millis", r.millis}, {"steps", r.steps}, {"depth", r.depth}};
}

/// Checks one file in `session`, capturing failures in the report.
inline CheckReport check_one(Session& session, const std::filesystem::path& path, const std::string& name) {
  CheckReport r;
  r.name = name;
  session.reset_counters();
  auto t0 = std::chrono::steady_clock::now();
  try {
    session.check_file(path);
    r.status = "ok";
  } catch (const Error& e) {
    r.status = std::string(to_string(e.kind()));
    r.message = e.what();
  }
  r.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  r.steps = session.steps();
  r.depth = session.max_coh_depth();
  return r;
}

struct TierResult {
  std::vector<CheckReport> reports;
  bool ok() const {
    for (const auto& r : reports)
      if (r.status != "ok") return false;
    return true;
  }
};

/// Runs every file of a tier in order in one session. Missing files are
/// reported before anything is checked.
inline TierResult run_tier(const Manifest& m, int tier, CheckOptions opts = {}) {
  const auto& files = m.tier(tier);
  for (const auto& f : files)
    if (!std::filesystem::exists(m.dir / f)) throw Error(ErrorKind::Io, "manifest lists missing file " + f);
  if (opts.root.empty()) opts.root = m.dir;
  Session session(opts);
  TierResult out;
  for (const auto& f : files) out.reports.push_back(check_one(session, m.dir / f, f));
  return out;
}

} // namespace hitt
