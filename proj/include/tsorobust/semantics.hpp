#pragma once

// Small-step SC and TSO interpreters over the goto language.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "tsorobust/lang.hpp"

namespace tsorobust {

enum class ActionKind { Isu, Com, Rd, Tau, Hvc };

// One transition label. Isu carries the enqueued (var, value) internally;
// it is printed as (t, isu). Hvc stores the value assigned to the
// register in `value` and the instantiated predicate in `pred`.
struct Action {
  int thread = -1;
  ActionKind kind = ActionKind::Tau;
  int var = -1;
  Value value = 0;
  ValueSet pred = 0;
  InstrRef instr;

  bool operator==(const Action&) const = default;
};

struct BufferEntry {
  int var = -1;
  Value value = 0;
  bool operator==(const BufferEntry&) const = default;
};

// Machine configuration. Under SC every buffer stays empty.
struct State {
  std::vector<int> pc;
  std::vector<Value> mem;
  std::vector<std::vector<BufferEntry>> buf;

  bool buffers_empty() const;
  bool operator==(const State&) const = default;
};

struct StateHash {
  std::size_t operator()(const State& s) const;
};

struct Successor {
  std::vector<Action> actions;
  State state;
};

struct Successors {
  std::vector<Successor> list;
  bool stuck = false;   // an array index was out of range
  bool capped = false;  // an issue was refused by the buffer capacity
};

State initial_state(const Program& p);
inline State sc_initial(const Program& p) { return initial_state(p); }

// SC successors: writes and successful cas emit [isu, com] at once.
Successors sc_enabled(const Program& p, const State& s);

// TSO successors per the store-buffer rules; buf_cap bounds each buffer.
Successors tso_enabled(const Program& p, const State& s, std::size_t buf_cap);

enum class Model { SC, TSO };
const char* model_name(Model m);

// Successors of one thread only, in the same order as the full functions.
Successors thread_enabled(const Program& p, const State& s, int thread, Model m,
                          std::size_t buf_cap);

// Value of x visible to thread t: its newest buffered write, else memory.
Value visible_value(const State& s, int thread, int var);

struct Execution {
  std::vector<Action> actions;
  bool operator==(const Execution&) const = default;
};

struct EnumerationStats {
  std::size_t executions = 0;
  std::size_t truncated = 0;  // paths cut by the step bound
  std::size_t stuck = 0;      // paths ending in an out-of-range array access
};

// Visitor returns false to stop the enumeration early.
using ExecutionVisitor = std::function<bool(const Execution&)>;

// Depth-first enumeration of SC executions that are maximal or cut by the
// step bound (threads by index, instructions by source order, havoc values
// ascending).
EnumerationStats sc_executions(const Program& p, std::size_t max_steps,
                               const ExecutionVisitor& visit);

// Same discipline for TSO. Only executions ending with empty buffers are
// yielded; bound-cut paths with pending writes are counted as truncated.
EnumerationStats tso_executions(const Program& p, std::size_t max_steps, std::size_t buf_cap,
                                const ExecutionVisitor& visit);

// Replays an action sequence from the initial state; returns the final
// state, or nullopt when some action is not enabled.
std::optional<State> replay(const Program& p, const std::vector<Action>& actions, Model m,
                            std::size_t buf_cap = 64);

std::string format_action(const Program& p, const Action& a);
std::string format_execution(const Program& p, const Execution& e);
std::string format_value_set(const Domain& d, ValueSet s);

}  // namespace tsorobust
