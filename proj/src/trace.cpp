#include "tsorobust/trace.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace tsorobust {

const char* variant_name(Variant v) { return v == Variant::Standard ? "standard" : "extended"; }

const char* edge_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::Po: return "po";
    case EdgeKind::So: return "so";
    case EdgeKind::Rf: return "rf";
    case EdgeKind::Fr: return "fr";
  }
  return "?";
}

int Trace::find(int thread, int po_index) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].thread == thread && nodes[i].po_index == po_index) return static_cast<int>(i);
  return -1;
}

TraceBuilder::TraceBuilder(const Program& p)
    : prog_(&p),
      po_(p.threads.size()),
      pending_(p.threads.size()),
      commits_(p.shared.size()),
      occurrences_(p.threads.size()) {}

void TraceBuilder::append(const Action& a) {
  if (a.thread < 0 || a.thread >= static_cast<int>(po_.size()))
    throw MalformedExecution("action of unknown thread");
  auto new_node = [&](NodeKind k) -> Rec& {
    Rec r;
    r.node.thread = a.thread;
    r.node.kind = k;
    r.node.var = a.var;
    r.node.value = a.value;
    r.node.po_index = static_cast<int>(po_[a.thread].size());
    r.node.origin = a.instr;
    // Occurrence count per generating instruction within the thread.
    const Thread& th = prog_->threads[a.thread];
    int flat = 0;
    for (int l = 0; l < a.instr.label; ++l) flat += static_cast<int>(th.body[l].size());
    flat += a.instr.index;
    auto& occ = occurrences_[a.thread];
    if (static_cast<int>(occ.size()) <= flat) occ.resize(flat + 1, 0);
    r.node.occurrence = occ[flat]++;
    po_[a.thread].push_back(static_cast<int>(nodes_.size()));
    nodes_.push_back(r);
    return nodes_.back();
  };
  // rf source as the thread sees it: newest own pending write, else memory.
  auto source_of = [&](int var) {
    const auto& pend = pending_[a.thread];
    for (auto it = pend.rbegin(); it != pend.rend(); ++it)
      if (nodes_[*it].node.var == var) return *it;
    return commits_[var].empty() ? -1 : commits_[var].back();
  };
  auto source_value = [&](int src) { return src < 0 ? 0 : nodes_[src].node.value; };

  switch (a.kind) {
    case ActionKind::Tau:
      return;
    case ActionKind::Isu: {
      Rec& r = new_node(NodeKind::Write);
      r.node.committed = false;
      pending_[a.thread].push_back(static_cast<int>(nodes_.size()) - 1);
      return;
    }
    case ActionKind::Com: {
      auto& pend = pending_[a.thread];
      if (pend.empty()) throw MalformedExecution("commit without a pending issue");
      const int id = pend.front();
      Rec& r = nodes_[id];
      if (r.node.var != a.var || r.node.value != a.value)
        throw MalformedExecution("commit does not match the oldest pending write");
      pend.pop_front();
      r.node.committed = true;
      r.commit_pos = static_cast<int>(commits_[a.var].size());
      commits_[a.var].push_back(id);
      return;
    }
    case ActionKind::Rd: {
      const int src = source_of(a.var);
      if (source_value(src) != a.value)
        throw MalformedExecution("read value has no matching write source");
      Rec& r = new_node(NodeKind::Read);
      r.source = src;
      return;
    }
    case ActionKind::Hvc: {
      const int src = source_of(a.var);
      Rec& r = new_node(NodeKind::Havoc);
      r.node.pred = a.pred;
      r.node.value = 0;
      r.source = src;
      return;
    }
  }
}

std::vector<int> TraceBuilder::canonical_ids() const {
  // insertion id -> canonical index ordered by (thread, po_index)
  std::vector<int> ids(nodes_.size());
  int next = 0;
  for (const auto& list : po_)
    for (int id : list) ids[id] = next++;
  return ids;
}

int TraceBuilder::last_node_canonical() const {
  if (nodes_.empty()) return -1;
  return canonical_ids()[nodes_.size() - 1];
}

int TraceBuilder::pending_head_canonical(int thread) const {
  if (pending_[thread].empty()) return -1;
  return canonical_ids()[pending_[thread].front()];
}

// With `accepted` the set of values the node is content with, the rf edge
// comes from the first commit of the run of accepted values ending at the
// actual source (or from the initial value). The run stops at the reader's
// own writes, and reads of pending own writes keep their source.
int TraceBuilder::rf_source(const Rec& r, ValueSet accepted) const {
  if (r.source < 0) return -1;
  const Rec& src = nodes_[r.source];
  if (src.commit_pos < 0 || src.node.thread == r.node.thread) return r.source;
  const Domain& dom = prog_->domain;
  auto holds = [&](Value w) { return dom.contains(w) && (accepted >> dom.offset(w) & 1); };
  const auto& list = commits_[r.node.var];
  int k = src.commit_pos;
  while (k > 0) {
    const TraceNode& prev = nodes_[list[k - 1]].node;
    if (!holds(prev.value)) return list[k];
    if (prev.thread == r.node.thread) return list[k - 1];
    --k;
  }
  return holds(0) ? -1 : list[0];
}

std::vector<Edge> TraceBuilder::edges(Variant v) const {
  const std::vector<int> cid = canonical_ids();
  std::vector<Edge> out;
  auto value_of = [&](int id) { return id < 0 ? 0 : nodes_[id].node.value; };
  auto so = [&](int a, int b) {  // a may be -1 (initial value)
    return v == Variant::Standard || value_of(a) != value_of(b);
  };

  for (const auto& list : po_)
    for (std::size_t i = 1; i < list.size(); ++i)
      out.push_back({cid[list[i - 1]], cid[list[i]], EdgeKind::Po});

  for (const auto& list : commits_)
    for (std::size_t i = 0; i < list.size(); ++i)
      for (std::size_t j = i + 1; j < list.size(); ++j)
        if (so(list[i], list[j])) out.push_back({cid[list[i]], cid[list[j]], EdgeKind::So});

  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Rec& r = nodes_[id];
    if (r.node.kind == NodeKind::Write) continue;
    const Domain& dom = prog_->domain;
    int rf = r.source;
    if (r.node.kind == NodeKind::Havoc)
      rf = rf_source(r, r.node.pred);
    else if (v == Variant::Extended && dom.contains(r.node.value))
      rf = rf_source(r, ValueSet{1} << dom.offset(r.node.value));
    if (rf >= 0) out.push_back({cid[rf], cid[id], EdgeKind::Rf});
    // fr needs the source's place in the commit order.
    int start = 0;
    if (r.source >= 0) {
      if (nodes_[r.source].commit_pos < 0) continue;
      start = nodes_[r.source].commit_pos + 1;
    }
    const auto& list = commits_[r.node.var];
    if (r.node.kind == NodeKind::Read) {
      for (std::size_t j = start; j < list.size(); ++j)
        if (so(r.source, list[j])) out.push_back({cid[id], cid[list[j]], EdgeKind::Fr});
      continue;
    }
    // Havoc: only commits falsifying the predicate, closed under so.
    std::vector<bool> fr(list.size(), false);
    for (std::size_t j = start; j < list.size(); ++j) {
      const Value w = nodes_[list[j]].node.value;
      const bool holds = dom.contains(w) && (r.node.pred >> dom.offset(w) & 1);
      if (so(r.source, list[j]) && !holds) fr[j] = true;
    }
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = start; i < list.size(); ++i) {
        if (!fr[i]) continue;
        for (std::size_t j = i + 1; j < list.size(); ++j) {
          if (!fr[j] && so(list[i], list[j])) {
            fr[j] = true;
            changed = true;
          }
        }
      }
    }
    for (std::size_t j = start; j < list.size(); ++j)
      if (fr[j]) out.push_back({cid[id], cid[list[j]], EdgeKind::Fr});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Trace TraceBuilder::build(Variant v) const {
  Trace t;
  t.variant = v;
  for (const auto& list : po_)
    for (int id : list) t.nodes.push_back(nodes_[id].node);
  t.edges = edges(v);
  return t;
}

std::string TraceBuilder::key(Variant v) const {
  std::string s;
  s.reserve(nodes_.size() * 8);
  for (std::size_t t = 0; t < po_.size(); ++t) {
    s += '|';
    for (int id : po_[t]) {
      const TraceNode& n = nodes_[id].node;
      s += static_cast<char>('a' + static_cast<int>(n.kind));
      s += std::to_string(n.var);
      s += ':';
      s += std::to_string(n.kind == NodeKind::Havoc ? static_cast<long long>(n.pred) : n.value);
      s += ',';
    }
  }
  s += '#';
  for (const Edge& e : edges(v)) {
    s += std::to_string(e.from);
    s += static_cast<char>('p' + static_cast<int>(e.kind));
    s += std::to_string(e.to);
    s += ' ';
  }
  return s;
}

std::string TraceBuilder::prefix_key() const {
  std::string s = key(Variant::Standard);
  const std::vector<int> cid = canonical_ids();
  s += '@';
  for (const auto& pend : pending_) {
    for (int id : pend) s += std::to_string(cid[id]) + ",";
    s += ';';
  }
  return s;
}

Trace build_trace(const Program& p, const Execution& e, Variant v) {
  TraceBuilder b(p);
  b.append(e.actions);
  return b.build(v);
}

bool traces_equal(const Trace& a, const Trace& b) {
  if (a.variant != b.variant) throw std::invalid_argument("traces_equal: variant mismatch");
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
    if (!a.nodes[i].same_label(b.nodes[i])) return false;
  return a.edges == b.edges;
}

bool hb_acyclic(const Trace& t) {
  const std::size_t n = t.nodes.size();
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> out(n);
  for (const Edge& e : t.edges) {
    out[e.from].push_back(e.to);
    ++indeg[e.to];
  }
  std::vector<int> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
  std::size_t seen = 0;
  while (!ready.empty()) {
    const int u = ready.back();
    ready.pop_back();
    ++seen;
    for (int v : out[u])
      if (--indeg[v] == 0) ready.push_back(v);
  }
  return seen == n;
}

std::vector<bool> hb_successors(const Trace& t, int from) {
  std::vector<std::vector<int>> out(t.nodes.size());
  for (const Edge& e : t.edges) out[e.from].push_back(e.to);
  std::vector<bool> seen(t.nodes.size(), false);
  std::vector<int> stack = out[from];
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (seen[u]) continue;
    seen[u] = true;
    for (int v : out[u]) stack.push_back(v);
  }
  return seen;
}

std::string node_label(const Program& p, const TraceNode& n) {
  const std::string t = p.threads.at(n.thread).name;
  switch (n.kind) {
    case NodeKind::Write:
      return t + ":wr " + p.shared.at(n.var) + "=" + std::to_string(n.value);
    case NodeKind::Read:
      return t + ":rd " + p.shared.at(n.var) + "=" + std::to_string(n.value);
    case NodeKind::Havoc:
      return t + ":hvc " + p.shared.at(n.var) + "=" + format_value_set(p.domain, n.pred);
  }
  return "?";
}

std::string trace_to_dot(const Program& p, const Trace& t, bool reduce) {
  const std::size_t n = t.nodes.size();
  // Collapse parallel edges of different kinds into one labelled edge.
  std::vector<std::vector<std::string>> kinds(n * n);
  for (const Edge& e : t.edges) kinds[e.from * n + e.to].push_back(edge_name(e.kind));

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (!kinds[u * n + v].empty()) pairs.emplace_back(static_cast<int>(u), static_cast<int>(v));

  if (reduce && hb_acyclic(t)) {
    std::vector<std::vector<int>> out(n);
    for (auto [u, v] : pairs) out[u].push_back(v);
    std::vector<std::pair<int, int>> kept;
    for (auto [u, v] : pairs) {
      // Drop (u,v) when v is reachable from u through another successor.
      std::vector<bool> seen(n, false);
      std::vector<int> stack;
      for (int w : out[u])
        if (w != v) stack.push_back(w);
      bool redundant = false;
      while (!stack.empty() && !redundant) {
        const int w = stack.back();
        stack.pop_back();
        if (w == v) redundant = true;
        if (seen[w]) continue;
        seen[w] = true;
        for (int x : out[w]) stack.push_back(x);
      }
      if (!redundant) kept.emplace_back(u, v);
    }
    pairs = std::move(kept);
  }

  std::ostringstream os;
  os << "digraph trace {\n";
  for (std::size_t i = 0; i < n; ++i)
    os << "  n" << i << " [label=\"" << node_label(p, t.nodes[i]) << "\"];\n";
  for (auto [u, v] : pairs) {
    std::string label;
    for (const auto& k : kinds[u * n + v]) label += (label.empty() ? "" : "|") + k;
    os << "  n" << u << " -> n" << v << " [label=\"" << label << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace tsorobust
