#pragma once

// Semantic mover classification over bounded SC executions, buffer-free
// reachability, and the write-atomicity check.

#include <cstddef>
#include <optional>
#include <set>
#include <vector>

#include "tsorobust/semantics.hpp"

namespace tsorobust {

struct MoverWitness {
  Execution execution;
  std::size_t position = 0;  // 0-based index of the first action of the unit
};

struct MoverClass {
  InstrRef instr;
  bool right_mover = true;
  bool left_mover = true;
  std::optional<MoverWitness> right_witness;  // present iff !right_mover
  std::optional<MoverWitness> left_witness;   // present iff !left_mover
  bool executed = false;                      // occurs in some bounded execution
};

struct MoverAnalysis {
  std::vector<MoverClass> classes;  // one per instruction, in program order
  bool exhaustive = true;           // no state or pair was cut by the bound
  std::size_t states = 0;

  const MoverClass& at(const InstrRef& r) const;
};

// Checks every pair of adjacent units of different threads in every SC
// execution of at most max_steps actions. A write (isu, com) is one unit.
MoverAnalysis classify_movers(const Program& p, std::size_t max_steps);

// Positions are 0-based. The unit containing e[i] is swapped with the next
// (resp. previous) unit; same-thread or missing neighbours pass vacuously.
// Invalid input executions throw std::invalid_argument.
bool moves_right(const Program& p, const Execution& e, std::size_t i);
bool moves_left(const Program& p, const Execution& e, std::size_t i);

// Executes `e` with the unit containing e[i] swapped with its neighbour;
// nullopt when the neighbour is missing or the swap is not a valid SC run.
std::optional<Execution> swap_units(const Program& p, const Execution& e, std::size_t i,
                                    bool rightwards);

struct ReachableReads {
  std::set<InstrRef> reads;  // read and havoc instructions
  bool truncated = false;
};

// Reads of w's thread reachable from an occurrence of w with no fence or cas
// of that thread in between and no write of that thread to the read's
// variable since w (w's own variable included).
ReachableReads buffer_free_reads(const Program& p, const InstrRef& w, std::size_t max_steps);
bool buffer_free_reachable(const Program& p, const InstrRef& w, const InstrRef& r,
                           std::size_t max_steps);

// Control-flow over-approximation of buffer_free_reads.
std::set<InstrRef> buffer_free_reads_cfg(const Program& p, const InstrRef& w);

enum class AtomicVia { LeftMover, AllReadsRightMover, NotAtomic };
const char* via_name(AtomicVia v);

struct WriteAtomicity {
  InstrRef write;
  bool atomic = false;
  AtomicVia via = AtomicVia::NotAtomic;
  std::set<InstrRef> reachable_reads;
  std::set<InstrRef> cfg_reads;
  std::set<InstrRef> offending_reads;
};

struct AtomicityReport {
  std::vector<WriteAtomicity> writes;
  bool atomic = true;
  // Mover checks and reachability searches all completed within the bound;
  // only then does `atomic` certify robustness.
  bool exhaustive = true;
  MoverAnalysis movers;
};

AtomicityReport check_write_atomicity(const Program& p, std::size_t max_steps);

}  // namespace tsorobust
