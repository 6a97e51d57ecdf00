#include "tsorobust/corpus.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tsorobust/cli.hpp"

namespace tsorobust {

namespace {

std::vector<std::string> split_words(std::string_view s, int line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false, any = false;
  for (char c : s) {
    if (c == '"') {
      quoted = !quoted;
      any = true;
    } else if (!quoted && (c == ' ' || c == '\t')) {
      if (any) out.push_back(std::move(cur));
      cur.clear();
      any = false;
    } else {
      cur += c;
      any = true;
    }
  }
  if (quoted) throw std::runtime_error("manifest line " + std::to_string(line) + ": unbalanced quote");
  if (any) out.push_back(std::move(cur));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<Fixture> parse_manifest(std::string_view text) {
  std::vector<Fixture> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string l = trim(raw);
    if (l.empty() || l[0] == '#') continue;
    const auto arrow = l.rfind("->");
    if (arrow == std::string::npos)
      throw std::runtime_error("manifest line " + std::to_string(line) + ": missing '-> exit'");
    Fixture f;
    f.line = line;
    f.text = trim(std::string_view(l).substr(0, arrow));
    const std::string code = trim(std::string_view(l).substr(arrow + 2));
    try {
      std::size_t used = 0;
      f.expected_exit = std::stoi(code, &used);
      if (used != code.size()) throw std::invalid_argument(code);
    } catch (const std::logic_error&) {
      throw std::runtime_error("manifest line " + std::to_string(line) + ": bad exit code");
    }
    auto words = split_words(f.text, line);
    if (words.size() < 2)
      throw std::runtime_error("manifest line " + std::to_string(line) + ": need file and command");
    f.file = words[0];
    f.args.assign(words.begin() + 1, words.end());
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FixtureResult> run_corpus(const std::filesystem::path& dir, unsigned jobs) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw std::runtime_error("cannot open " + (dir / "manifest.txt").string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto fixtures = parse_manifest(ss.str());
  std::vector<FixtureResult> results(fixtures.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < fixtures.size(); i = next++) {
      FixtureResult& r = results[i];
      r.fixture = fixtures[i];
      std::vector<std::string> args{r.fixture.args[0], (dir / r.fixture.file).string()};
      args.insert(args.end(), r.fixture.args.begin() + 1, r.fixture.args.end());
      std::ostringstream out, err;
      r.exit_code = run_cli(args, out, err);
      r.output = out.str() + err.str();
      r.passed = r.exit_code == r.fixture.expected_exit;
    }
  };
  const unsigned n = std::max(1u, jobs);
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace tsorobust
