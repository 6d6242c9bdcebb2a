#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chartreview/casefile.hpp"
#include "chartreview/corpus.hpp"
#include "chartreview/llm_backend.hpp"

namespace testsupport {

std::filesystem::path source_dir();
std::filesystem::path data_dir();
std::filesystem::path cli_path();

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the chartreview binary with args (each shell-quoted) in cwd.
CliResult run_cli(const std::vector<std::string>& args, const std::filesystem::path& cwd);

void write(const std::filesystem::path& path, const std::string& text);

std::string monograph_md(const std::string& id, const std::string& name, const std::vector<std::string>& aliases,
                         const std::string& adverse, const std::string& mech, const std::string& interactions,
                         const std::string& dosing);

// Three fictional drugs, one guideline, two cases with planted problems and a
// scripted mock that reports exactly those problems.
struct SyntheticSet {
  std::filesystem::path root;  // root/corpus, root/cases, root/groundtruth
  std::filesystem::path script;
  chartreview::Corpus corpus;
  chartreview::Dataset dataset;
};

SyntheticSet write_synthetic_set(const std::filesystem::path& root);

}  // namespace testsupport
