#pragma once

// Fixture manifest: one line per check, `file command [flags...] -> exit`.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tsorobust {

struct Fixture {
  std::string file;
  std::vector<std::string> args;  // command and flags, without the file
  int expected_exit = 0;
  int line = 0;
  std::string text;  // the line as written, without the expectation
};

// Blank lines and `#` comments are skipped; double quotes group words.
std::vector<Fixture> parse_manifest(std::string_view text);

struct FixtureResult {
  Fixture fixture;
  int exit_code = -1;
  bool passed = false;
  std::string output;
};

// Runs every fixture of dir/manifest.txt; results keep manifest order.
std::vector<FixtureResult> run_corpus(const std::filesystem::path& dir, unsigned jobs = 1);

}  // namespace tsorobust
