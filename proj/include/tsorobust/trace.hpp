#pragma once

// Happens-before traces of executions: nodes are shared-memory actions
// (an issue and its commit form one write node), edges are po/so/rf/fr.

#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsorobust/semantics.hpp"

namespace tsorobust {

// Standard: so orders every pair of same-variable commits.
// Extended: so only relates commits writing different values.
enum class Variant { Standard, Extended };
const char* variant_name(Variant v);

enum class NodeKind { Write, Read, Havoc };
enum class EdgeKind { Po, So, Rf, Fr };
const char* edge_name(EdgeKind k);

struct TraceNode {
  int thread = -1;
  NodeKind kind = NodeKind::Read;
  int var = -1;
  Value value = 0;     // written or read value; unused for havoc nodes
  ValueSet pred = 0;   // havoc nodes only
  int po_index = 0;    // position among the thread's nodes
  InstrRef origin;     // generating instruction
  int occurrence = 0;  // per-thread occurrence index of that instruction
  bool committed = true;

  bool same_label(const TraceNode& o) const {
    return thread == o.thread && kind == o.kind && var == o.var &&
           (kind == NodeKind::Havoc ? pred == o.pred : value == o.value) &&
           po_index == o.po_index;
  }
};

struct Edge {
  int from = -1;
  int to = -1;
  EdgeKind kind = EdgeKind::Po;
  auto operator<=>(const Edge&) const = default;
};

// Nodes are ordered by (thread, po_index); edges index into nodes and are
// sorted, so structural comparison is trace equality.
struct Trace {
  Variant variant = Variant::Extended;
  std::vector<TraceNode> nodes;
  std::vector<Edge> edges;

  int find(int thread, int po_index) const;  // -1 when absent
};

class MalformedExecution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incremental trace construction; append actions one at a time.
class TraceBuilder {
 public:
  explicit TraceBuilder(const Program& p);

  void append(const Action& a);
  void append(const std::vector<Action>& acts) {
    for (const auto& a : acts) append(a);
  }

  Trace build(Variant v) const;
  // Canonical string; equal keys iff equal traces of the given variant.
  std::string key(Variant v) const;
  // Key that also pins pending writes and commit order, identifying the
  // future of an execution prefix together with its machine state.
  std::string prefix_key() const;

  std::size_t size() const { return nodes_.size(); }
  // Canonical index (as in build()) of the node produced last.
  int last_node_canonical() const;
  // Canonical index of the write node of thread t's pending head write.
  int pending_head_canonical(int thread) const;

 private:
  struct Rec {
    TraceNode node;
    int source = -1;      // rf source (insertion id), -1 = initial value
    int commit_pos = -1;  // position in commits_[var]
  };

  std::vector<Edge> edges(Variant v) const;
  int rf_source(const Rec& r, ValueSet accepted) const;
  std::vector<int> canonical_ids() const;

  const Program* prog_;
  std::vector<Rec> nodes_;
  std::vector<std::vector<int>> po_;
  std::vector<std::deque<int>> pending_;
  std::vector<std::vector<int>> commits_;
  std::vector<std::vector<int>> occurrences_;  // per thread: instr -> count
};

Trace build_trace(const Program& p, const Execution& e, Variant v);

// Throws std::invalid_argument on a variant mismatch.
bool traces_equal(const Trace& a, const Trace& b);

bool hb_acyclic(const Trace& t);

// Nodes reachable from `from` along one or more hb edges.
std::vector<bool> hb_successors(const Trace& t, int from);

// Graphviz rendering; transitive reduction applies to display only.
std::string trace_to_dot(const Program& p, const Trace& t, bool reduce = true);
std::string node_label(const Program& p, const TraceNode& n);

}  // namespace tsorobust
