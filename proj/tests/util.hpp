#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tsorobust/lang.hpp"
#include "tsorobust/semantics.hpp"

inline std::string corpus_path(const std::string& file) {
  return std::string(TSOROBUST_CORPUS_DIR) + "/" + file;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline tsorobust::Program load_corpus(const std::string& file) {
  return tsorobust::parse_program(read_file(corpus_path(file)));
}

inline const char* const kCorpus[] = {"mp.prog",   "sb.prog",       "wsq.prog", "wsq_abs.prog",
                                      "spin.prog", "spin_abs.prog", "sb0.prog", "gap.prog"};

// One scheduling step: the thread's `choice`-th instruction successor, or the
// commit of its oldest buffered write.
struct Step {
  int thread;
  bool commit = false;
  int choice = 0;
};

inline tsorobust::Execution drive(const tsorobust::Program& p, tsorobust::Model m,
                                  const std::vector<Step>& steps, std::size_t cap = 4) {
  using namespace tsorobust;
  State s = initial_state(p);
  Execution e;
  for (const Step& st : steps) {
    const auto out = thread_enabled(p, s, st.thread, m, cap);
    int k = 0;
    const Successor* pick = nullptr;
    for (const auto& succ : out.list) {
      const bool com = succ.actions.size() == 1 && succ.actions[0].kind == ActionKind::Com;
      if (com != st.commit) continue;
      if (k++ == st.choice) {
        pick = &succ;
        break;
      }
    }
    if (!pick) throw std::logic_error("drive: step not enabled");
    e.actions.insert(e.actions.end(), pick->actions.begin(), pick->actions.end());
    s = pick->state;
  }
  return e;
}
