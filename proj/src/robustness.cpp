#include "tsorobust/robustness.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace tsorobust {

namespace {

std::string state_key(const State& s) {
  std::string k;
  k.reserve(s.pc.size() + s.mem.size() * 2 + 8);
  for (int v : s.pc) k += std::to_string(v) + ",";
  k += '/';
  for (Value v : s.mem) k += std::to_string(v) + ",";
  for (const auto& b : s.buf) {
    k += '/';
    for (const auto& e : b) k += std::to_string(e.var) + "=" + std::to_string(e.value) + ",";
  }
  return k;
}

Successors successors(const Program& p, const State& s, Model m, std::size_t buf_cap) {
  return m == Model::SC ? sc_enabled(p, s) : tso_enabled(p, s, buf_cap);
}

// Bucket queue by depth: entries are expanded in order of increasing depth,
// so the first expansion of a key happens at its minimal depth.
template <typename Work>
class DepthQueue {
 public:
  explicit DepthQueue(std::size_t max_depth) : buckets_(max_depth + 1) {}
  void push(std::size_t depth, Work w) { buckets_[depth].push_back(std::move(w)); }
  bool pop(std::size_t& depth, Work& w) {
    while (cur_ < buckets_.size()) {
      auto& b = buckets_[cur_];
      if (idx_ < b.size()) {
        depth = cur_;
        w = std::move(b[idx_++]);
        return true;
      }
      b.clear();
      b.shrink_to_fit();
      ++cur_;
      idx_ = 0;
    }
    return false;
  }

 private:
  std::vector<std::vector<Work>> buckets_;
  std::size_t cur_ = 0;
  std::size_t idx_ = 0;
};

}  // namespace

const char* status_name(RobustnessStatus s) {
  switch (s) {
    case RobustnessStatus::Robust: return "robust";
    case RobustnessStatus::NotRobust: return "not-robust";
    case RobustnessStatus::Unknown: return "unknown";
  }
  return "?";
}

Execution TraceSpace::execution(int node) const {
  std::vector<int> chain;
  for (int n = node; n > 0; n = nodes[n].parent) chain.push_back(n);
  Execution e;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    e.actions.insert(e.actions.end(), nodes[*it].actions.begin(), nodes[*it].actions.end());
  return e;
}

TraceSpace explore_traces(const Program& p, Model m, const Bounds& b) {
  struct Work {
    int parent = -1;
    std::vector<Action> actions;
    State state;
    TraceBuilder trace;
    std::string key;
  };
  TraceSpace space;
  space.model = m;
  std::unordered_map<std::string, std::size_t> best;  // key -> least depth pushed
  std::unordered_set<std::string> expanded;
  DepthQueue<std::optional<Work>> queue(b.max_steps);

  {
    Work root{-1, {}, initial_state(p), TraceBuilder(p), {}};
    root.key = state_key(root.state) + root.trace.prefix_key();
    best[root.key] = 0;
    queue.push(0, std::move(root));
  }
  std::size_t depth = 0;
  std::optional<Work> item;
  while (queue.pop(depth, item)) {
    Work w = std::move(*item);
    if (!expanded.insert(w.key).second) continue;
    if (space.nodes.size() >= b.max_nodes) {
      space.budget_exceeded = true;
      break;
    }
    const int id = static_cast<int>(space.nodes.size());
    space.nodes.push_back({w.parent, std::move(w.actions), depth});

    if (w.state.buffers_empty()) {
      TraceSpace::ExecutionClass c;
      c.node = id;
      c.standard_key = w.trace.key(Variant::Standard);
      c.extended_key = w.trace.key(Variant::Extended);
      c.standard_acyclic = hb_acyclic(w.trace.build(Variant::Standard));
      c.extended_acyclic = c.standard_acyclic || hb_acyclic(w.trace.build(Variant::Extended));
      space.executions.push_back(std::move(c));
    }

    Successors succ = successors(p, w.state, m, b.buf_cap);
    if (succ.stuck) space.stuck = true;
    for (auto& n : succ.list) {
      const std::size_t d = depth + n.actions.size();
      if (d > b.max_steps) {
        space.truncated = true;
        continue;
      }
      Work next{id, n.actions, std::move(n.state), w.trace, {}};
      next.trace.append(next.actions);
      next.key = state_key(next.state) + next.trace.prefix_key();
      auto [it, fresh] = best.try_emplace(next.key, d);
      if (!fresh) {
        if (it->second <= d) continue;
        it->second = d;
      }
      queue.push(d, std::move(next));
    }
  }
  return space;
}

RobustnessVerdict check_robustness(const Program& p, const Bounds& b, Variant v, unsigned jobs) {
  RobustnessVerdict verdict;
  verdict.variant = v;
  verdict.bounds = b;

  TraceSpace tso, sc;
  if (jobs > 1) {
    auto sc_future = std::async(std::launch::async, [&] {
      return v == Variant::Extended ? explore_traces(p, Model::SC, b) : TraceSpace{};
    });
    tso = explore_traces(p, Model::TSO, b);
    sc = sc_future.get();
  } else {
    tso = explore_traces(p, Model::TSO, b);
    if (v == Variant::Extended) sc = explore_traces(p, Model::SC, b);
  }
  verdict.tso_classes = tso.executions.size();
  verdict.truncated = tso.truncated;

  std::unordered_set<std::string> sc_keys;
  for (const auto& c : sc.executions) sc_keys.insert(c.extended_key);
  verdict.sc_traces = sc_keys.size();

  // First failing class in exploration order; a parallel scan keeps the
  // least index so the witness does not depend on the job count.
  auto fails = [&](const TraceSpace::ExecutionClass& c) -> int {
    if (v == Variant::Standard) return c.standard_acyclic ? 0 : 1;
    if (!c.extended_acyclic) return 1;
    return sc_keys.contains(c.extended_key) ? 0 : 2;
  };
  const std::size_t n = tso.executions.size();
  std::size_t first = n;
  int why = 0;
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, 16));
  if (workers == 1 || n < 1024) {
    for (std::size_t i = 0; i < n && first == n; ++i)
      if (int f = fails(tso.executions[i])) {
        first = i;
        why = f;
      }
  } else {
    std::vector<std::pair<std::size_t, int>> found(workers, {n, 0});
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) {
          if (int f = fails(tso.executions[i])) {
            found[w] = {i, f};
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto [i, f] : found)
      if (i < first) {
        first = i;
        why = f;
      }
  }

  if (first < n) {
    verdict.status = RobustnessStatus::NotRobust;
    verdict.witness = tso.execution(tso.executions[first].node);
    verdict.reason = why == 1 ? std::string("cyclic ") + variant_name(v) + " happens-before"
                              : "acyclic extended happens-before but no trace-equal SC execution";
  } else if (tso.budget_exceeded || sc.budget_exceeded) {
    verdict.status = RobustnessStatus::Unknown;
    verdict.reason = "exploration budget exceeded";
  } else {
    verdict.status = RobustnessStatus::Robust;
  }
  return verdict;
}

namespace {

// Depth-first search over TSO prefixes shaped as
//   pi1 (t,isu) pi2 (t,rd,y,*) pi3 (t,com,x,*) pi4
// with only `t` delaying commits.
class ViolationSearch {
 public:
  ViolationSearch(const Program& p, const Bounds& b, Variant v, int t)
      : p_(p), b_(b), v_(v), t_(t) {}

  std::optional<MinimalViolation> best;

  void run() {
    Frame f{initial_state(p_), TraceBuilder(p_), 0, -1, -1, -1};
    dfs(f);
  }

 private:
  struct Frame {
    State state;
    TraceBuilder trace;
    int phase;
    int alpha_po;   // po index of the delayed write node
    int theta_po;   // po index of the overtaking read
    int theta_var;
  };

  void dfs(Frame& f) {
    if (budget_exhausted_) return;
    const std::size_t depth = exec_.actions.size();
    std::string key = std::to_string(f.phase) + "|" + std::to_string(f.alpha_po) + "|" +
                      std::to_string(f.theta_po) + "|" + state_key(f.state) +
                      f.trace.prefix_key();
    auto [it, fresh] = seen_.try_emplace(std::move(key), depth);
    if (!fresh) {
      if (it->second <= depth) return;
      it->second = depth;
    }
    if (seen_.size() > b_.max_nodes) {
      budget_exhausted_ = true;
      return;
    }

    if (f.phase == 3 && f.state.buf[t_].empty()) {
      record(f);
      return;
    }

    const std::size_t pending = f.state.buf[t_].size();
    for (std::size_t u = 0; u < p_.threads.size(); ++u) {
      const int th = static_cast<int>(u);
      if (th == t_) {
        expand_delaying(f, depth, pending);
      } else if (f.phase <= 2) {
        Successors succ = thread_enabled(p_, f.state, th, Model::SC, 0);
        for (auto& n : succ.list) {
          if (depth + n.actions.size() + pending > b_.max_steps) continue;
          Frame g{std::move(n.state), f.trace, f.phase, f.alpha_po, f.theta_po, f.theta_var};
          const std::size_t before = g.trace.size();
          g.trace.append(n.actions);
          if (f.phase == 2 && g.trace.size() > before && !after_theta(g, th)) continue;
          descend(g, n.actions);
        }
      }
    }
  }

  void expand_delaying(Frame& f, std::size_t depth, std::size_t pending) {
    if (f.phase == 0) {
      // SC-like steps, or the first delayed issue.
      Successors sc = thread_enabled(p_, f.state, t_, Model::SC, 0);
      for (auto& n : sc.list) {
        if (depth + n.actions.size() > b_.max_steps) continue;
        Frame g{std::move(n.state), f.trace, 0, -1, -1, -1};
        g.trace.append(n.actions);
        descend(g, n.actions);
      }
      Successors tso = thread_enabled(p_, f.state, t_, Model::TSO, b_.buf_cap);
      for (auto& n : tso.list) {
        if (n.actions.size() != 1 || n.actions[0].kind != ActionKind::Isu) continue;
        if (depth + 2 > b_.max_steps) continue;
        Frame g{std::move(n.state), f.trace, 1, 0, -1, -1};
        g.trace.append(n.actions);
        g.alpha_po = po_count(g) - 1;
        descend(g, n.actions);
      }
    } else if (f.phase == 1) {
      Successors tso = thread_enabled(p_, f.state, t_, Model::TSO, b_.buf_cap);
      for (auto& n : tso.list) {
        const Action& a = n.actions.front();
        if (a.kind == ActionKind::Com) continue;
        const std::size_t extra = a.kind == ActionKind::Isu ? 1 : 0;
        if (depth + n.actions.size() + pending + extra > b_.max_steps) continue;
        const bool from_memory =
            (a.kind == ActionKind::Rd || a.kind == ActionKind::Hvc) &&
            std::none_of(f.state.buf[t_].begin(), f.state.buf[t_].end(),
                         [&](const BufferEntry& e) { return e.var == a.var; });
        Frame g{n.state, f.trace, 1, f.alpha_po, -1, -1};
        g.trace.append(n.actions);
        descend(g, n.actions);
        if (from_memory) {
          Frame h{std::move(n.state), f.trace, 2, f.alpha_po, -1, a.var};
          h.trace.append(n.actions);
          h.theta_po = po_count(h) - 1;
          descend(h, n.actions);
        }
      }
    } else {
      // Phase 2 ends with the delayed commit; phase 3 drains the rest.
      Successors tso = thread_enabled(p_, f.state, t_, Model::TSO, b_.buf_cap);
      for (auto& n : tso.list) {
        if (n.actions.front().kind != ActionKind::Com) continue;
        if (depth + pending > b_.max_steps) continue;
        Frame g{std::move(n.state), f.trace, 3, f.alpha_po, f.theta_po, f.theta_var};
        g.trace.append(n.actions);
        if (f.phase == 2) {
          Trace tr = g.trace.build(v_);
          const auto reach = hb_successors(tr, tr.find(t_, f.theta_po));
          if (!reach[tr.find(t_, f.alpha_po)]) continue;
        }
        descend(g, n.actions);
      }
    }
  }

  int po_count(const Frame& f) const {
    Trace tr = f.trace.build(Variant::Standard);
    int n = 0;
    for (const auto& node : tr.nodes)
      if (node.thread == t_) ++n;
    return n;
  }

  // The newest node of thread `th` must be hb+-after the overtaking read.
  bool after_theta(const Frame& g, int th) const {
    Trace tr = g.trace.build(v_);
    int last = -1;
    for (std::size_t i = 0; i < tr.nodes.size(); ++i)
      if (tr.nodes[i].thread == th) last = static_cast<int>(i);
    const auto reach = hb_successors(tr, tr.find(t_, g.theta_po));
    return last >= 0 && reach[last];
  }

  void descend(Frame& g, const std::vector<Action>& acts) {
    const std::size_t depth = exec_.actions.size();
    exec_.actions.insert(exec_.actions.end(), acts.begin(), acts.end());
    dfs(g);
    exec_.actions.resize(depth);
  }

  void record(const Frame& f) {
    MinimalViolation mv;
    mv.execution = exec_;
    mv.thread = t_;
    // Locate the landmarks and the delay cost in trace nodes of t.
    std::vector<std::size_t> issue_node_pos;  // t node count at each delayed issue
    std::size_t t_nodes = 0, commits = 0;
    bool delaying = false;
    std::vector<std::size_t> delayed_issue_nodes;
    for (std::size_t i = 0; i < exec_.actions.size(); ++i) {
      const Action& a = exec_.actions[i];
      if (a.thread != t_) continue;
      const bool node = a.kind == ActionKind::Isu || a.kind == ActionKind::Rd ||
                        a.kind == ActionKind::Hvc;
      if (a.kind == ActionKind::Isu) {
        const bool immediate = i + 1 < exec_.actions.size() &&
                               exec_.actions[i + 1].kind == ActionKind::Com &&
                               exec_.actions[i + 1].thread == t_;
        if (!immediate || delaying) {
          if (!delaying) mv.issue = i;
          delaying = true;
          delayed_issue_nodes.push_back(t_nodes);
        }
      }
      if (node) {
        if (static_cast<int>(t_nodes) == f.theta_po) mv.read = i;
        ++t_nodes;
      }
      if (a.kind == ActionKind::Com && delaying && i > mv.read && mv.read > 0) {
        if (commits == 0) mv.commit = i;
        ++commits;
      }
    }
    // A delayed write waits for the later t nodes up to the read, plus the
    // commits drained before its own.
    std::size_t cost = 0;
    for (std::size_t k = 0; k < delayed_issue_nodes.size(); ++k)
      cost += static_cast<std::size_t>(f.theta_po) - delayed_issue_nodes[k] + k;
    mv.cost = cost;
    if (!best || mv.cost < best->cost) best = std::move(mv);
  }

  const Program& p_;
  Bounds b_;
  Variant v_;
  int t_;
  Execution exec_;
  std::unordered_map<std::string, std::size_t> seen_;
  bool budget_exhausted_ = false;
};

}  // namespace

std::optional<MinimalViolation> find_minimal_violation(const Program& p, const Bounds& b,
                                                       Variant v) {
  std::optional<MinimalViolation> best;
  for (std::size_t t = 0; t < p.threads.size(); ++t) {
    ViolationSearch search(p, b, v, static_cast<int>(t));
    search.run();
    if (search.best && (!best || search.best->cost < best->cost)) best = search.best;
  }
  return best;
}

Valuations reachable_valuations(const Program& p, Model m, const Bounds& b) {
  struct Node {
    int parent;
    std::vector<Action> actions;
  };
  struct Work {
    int parent = -1;
    std::vector<Action> actions;
    State state;
  };
  Valuations out;
  std::vector<Node> nodes;
  std::unordered_map<State, std::size_t, StateHash> best;
  std::unordered_set<State, StateHash> expanded;
  std::map<Valuation, int> first_node;
  DepthQueue<std::optional<Work>> queue(b.max_steps);
  {
    Work root{-1, {}, initial_state(p)};
    best[root.state] = 0;
    queue.push(0, std::move(root));
  }
  std::size_t depth = 0;
  std::optional<Work> item;
  while (queue.pop(depth, item)) {
    Work w = std::move(*item);
    if (!expanded.insert(w.state).second) continue;
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({w.parent, std::move(w.actions)});
    if (w.state.buffers_empty()) {
      Valuation val(w.state.mem.begin(), w.state.mem.begin() + p.num_shared());
      if (out.values.insert(val).second) first_node.emplace(std::move(val), id);
    }
    for (auto& n : successors(p, w.state, m, b.buf_cap).list) {
      const std::size_t d = depth + n.actions.size();
      if (d > b.max_steps) {
        out.truncated = true;
        continue;
      }
      auto [it, fresh] = best.try_emplace(n.state, d);
      if (!fresh) {
        if (it->second <= d) continue;
        it->second = d;
      }
      queue.push(d, Work{id, std::move(n.actions), std::move(n.state)});
    }
  }
  for (const auto& [val, node] : first_node) {
    std::vector<int> chain;
    for (int n = node; n > 0; n = nodes[n].parent) chain.push_back(n);
    Execution e;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
      e.actions.insert(e.actions.end(), nodes[*it].actions.begin(), nodes[*it].actions.end());
    out.witnesses.emplace_back(val, std::move(e));
  }
  return out;
}

}  // namespace tsorobust
