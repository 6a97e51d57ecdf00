#pragma once

// Bounded robustness analyses: trace-space exploration under SC and TSO,
// trace-robustness verdicts, the minimal-violation search and reachable
// shared-memory valuations.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tsorobust/semantics.hpp"
#include "tsorobust/trace.hpp"

namespace tsorobust {

struct Bounds {
  std::size_t max_steps = 16;
  std::size_t buf_cap = 4;
  // Explored (state, trace) classes beyond which a search gives up.
  std::size_t max_nodes = 4'000'000;
};

// Every execution prefix of length <= max_steps, up to equivalence: two
// prefixes are merged when they reach the same machine state with the same
// trace (including pending writes), since then every extension also has
// equal traces. Executions (empty buffers) are classified per trace.
struct TraceSpace {
  struct Node {
    int parent = -1;
    std::vector<Action> actions;  // from parent
    std::size_t depth = 0;
  };
  struct ExecutionClass {
    int node = -1;
    std::string standard_key;
    std::string extended_key;
    bool standard_acyclic = true;
    bool extended_acyclic = true;
  };

  Model model = Model::SC;
  std::vector<Node> nodes;
  std::vector<ExecutionClass> executions;  // in exploration order
  bool truncated = false;        // some prefix was cut by the step bound
  bool budget_exceeded = false;  // max_nodes reached
  bool stuck = false;            // an out-of-range array access occurred

  Execution execution(int node) const;
};

TraceSpace explore_traces(const Program& p, Model m, const Bounds& b);

enum class RobustnessStatus { Robust, NotRobust, Unknown };
const char* status_name(RobustnessStatus s);

struct RobustnessVerdict {
  RobustnessStatus status = RobustnessStatus::Unknown;
  std::optional<Execution> witness;  // present iff NotRobust
  std::string reason;                // why the witness is not SC-equivalent
  Variant variant = Variant::Extended;
  Bounds bounds;
  std::size_t tso_classes = 0;
  std::size_t sc_traces = 0;
  bool truncated = false;  // verdict holds up to the bounds only
};

// Checks every bounded TSO execution for a trace-equal SC execution. The
// standard variant decides by hb acyclicity; the extended variant uses
// acyclicity as a necessary condition and otherwise searches the SC traces.
// `jobs` > 1 runs the two explorations and the matching concurrently.
RobustnessVerdict check_robustness(const Program& p, const Bounds& b, Variant v,
                                   unsigned jobs = 1);

struct MinimalViolation {
  Execution execution;
  int thread = -1;           // the thread delaying its commits
  std::size_t issue = 0;     // position of the first delayed issue
  std::size_t read = 0;      // position of the read overtaking it
  std::size_t commit = 0;    // position of the delayed commit
  std::size_t cost = 0;      // summed delay, in trace nodes of the thread
};

// Searches for a TSO execution of the minimal-violation shape; returns the
// one with least delay (first in exploration order on ties).
std::optional<MinimalViolation> find_minimal_violation(const Program& p, const Bounds& b,
                                                       Variant v = Variant::Extended);

using Valuation = std::vector<Value>;  // shared variables only

struct Valuations {
  std::set<Valuation> values;
  bool truncated = false;
  // A shortest execution reaching each valuation.
  std::vector<std::pair<Valuation, Execution>> witnesses;
};

// Shared-variable valuations of all states visited within the bound;
// TSO states count only when every buffer is empty.
Valuations reachable_valuations(const Program& p, Model m, const Bounds& b);

}  // namespace tsorobust
