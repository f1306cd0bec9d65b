#pragma once

// On-disk layout under a data directory:
//
//   sessions/<hash>-<n>/extracted.study    graph the session started from
//   sessions/<hash>-<n>/session.events     append-only event log, one JSON per line
//   studies/<study>/extracted.study        written on finalize
//   studies/<study>/corrected.study
//   studies/<study>/corrections.events
//   studies/<study>/ratings.table
//
// <hash> is the FNV-1a hash of the extracted document, <n> a counter that
// keeps repeated sessions on the same graph apart.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "repro/corrections.hpp"
#include "repro/likert.hpp"
#include "repro/report.hpp"
#include "repro/session.hpp"
#include "repro/study_io.hpp"

namespace repro {

namespace fs = std::filesystem;

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Directory-safe form of a study id: [A-Za-z0-9._-] kept, the rest becomes '_'.
inline std::string study_dir_name(std::string_view study_id) {
  std::string out;
  for (char c : study_id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-' ||
              c == '_';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

inline constexpr const char* kExtractedFile = "extracted.study";
inline constexpr const char* kCorrectedFile = "corrected.study";
inline constexpr const char* kEventsFile = "corrections.events";
inline constexpr const char* kRatingsFile = "ratings.table";
inline constexpr const char* kSessionEventsFile = "session.events";

/// Appends one line and flushes it to the OS before returning.
inline void append_line(const fs::path& path, std::string_view line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot append to '" + path.string() + "'");
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw std::runtime_error("append failed for '" + path.string() + "'");
}

struct StudyRecord {
  std::string name;
  StudyGraph extracted;
  StudyGraph corrected;
  std::vector<LikertRating> ratings;
};

/// Writes one finalized study directory. Refuses graphs with error-level
/// violations.
inline fs::path write_study(const fs::path& studies_root, const StudyGraph& extracted, const FinalizedOutputs& out,
                            const std::vector<SessionEvent>& events) {
  for (const StudyGraph* g : {&extracted, &out.corrected})
    if (!validate_graph(*g).clean()) throw InvalidGraph(validate_graph(*g));
  fs::path dir = studies_root / study_dir_name(out.corrected.metadata.source_id);
  fs::create_directories(dir);
  write_text_file((dir / kExtractedFile).string(), serialize_graph(extracted));
  write_text_file((dir / kCorrectedFile).string(), serialize_graph(out.corrected));
  std::string log;
  for (const auto& ev : events) log += serialize_event_line(ev);
  write_text_file((dir / kEventsFile).string(), log);
  write_text_file((dir / kRatingsFile).string(), format_ratings_table(out.ratings));
  return dir;
}

/// Loads every study directory under `<data_dir>/studies` (or `data_dir`
/// itself when it has no `studies` child), sorted by name.
inline std::vector<StudyRecord> load_dataset(const fs::path& data_dir) {
  fs::path root = fs::is_directory(data_dir / "studies") ? data_dir / "studies" : data_dir;
  if (!fs::is_directory(root)) throw std::runtime_error("dataset directory '" + root.string() + "' does not exist");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && fs::exists(entry.path() / kExtractedFile) && fs::exists(entry.path() / kCorrectedFile))
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());

  std::vector<StudyRecord> out;
  for (const auto& d : dirs) {
    StudyRecord rec;
    rec.name = d.filename().string();
    rec.extracted = load_study((d / kExtractedFile).string());
    rec.corrected = load_study((d / kCorrectedFile).string());
    if (fs::exists(d / kRatingsFile)) rec.ratings = parse_ratings_table(read_text_file((d / kRatingsFile).string()));
    out.push_back(std::move(rec));
  }
  return out;
}

struct DatasetReport {
  std::vector<CorrectionSet> corrections;
  Populations populations;
  ErrorReport errors;
  std::vector<LikertDistribution> likert;
};

/// Recomputes the error table from extracted/corrected pairs.
inline DatasetReport report_dataset(const std::vector<StudyRecord>& studies, const CompareOptions& options = {}) {
  DatasetReport out;
  std::vector<StudyGraph> corrected;
  std::vector<LikertRating> ratings;
  for (const auto& s : studies) {
    out.corrections.push_back(compare_graphs(s.extracted, s.corrected, options));
    corrected.push_back(s.corrected);
    ratings.insert(ratings.end(), s.ratings.begin(), s.ratings.end());
  }
  out.populations = populations_of(corrected);
  out.errors = aggregate_reports(out.corrections, out.populations);
  out.likert = likert_summary(ratings);
  return out;
}

}  // namespace repro
