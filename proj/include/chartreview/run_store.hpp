#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chartreview/pipeline.hpp"
#include "chartreview/report.hpp"
#include "chartreview/scoring.hpp"

namespace chartreview {

// Exclusive <file>.lock created with O_EXCL; LockHeld when another writer has it.
class FileLock {
 public:
  explicit FileLock(std::filesystem::path target);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  std::filesystem::path lock_;
};

struct StoredRun {
  ReviewRun run;
  std::vector<AdjudicationOverride> overrides;
  std::vector<std::string> warnings;
};

// One append-only JSON-lines file per run: header, call*, result, adjudication*.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const std::string& run_id) const;

  // DuplicateId when the run file exists.
  void save(const ReviewRun& run);
  // UnknownId when the run is not stored.
  void append_adjudication(const std::string& run_id, const AdjudicationOverride& o);

  bool contains(const std::string& run_id) const;
  StoredRun load(const std::string& run_id) const;
  std::vector<std::string> list() const;  // sorted
  std::vector<StoredRun> load_all() const;

 private:
  std::filesystem::path dir_;
};

// A torn final line is dropped with a warning and marks the run Incomplete;
// any other unreadable line is CorruptStore.
StoredRun read_run_file(const std::filesystem::path& path);

// Complete and parse-failed runs; others are skipped with a warning.
std::vector<EvalItem> eval_items(const std::vector<StoredRun>& runs, std::vector<std::string>& warnings);

}  // namespace chartreview
