#include "tsorobust/mover.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace tsorobust {

const MoverClass& MoverAnalysis::at(const InstrRef& r) const {
  for (const auto& c : classes)
    if (c.instr == r) return c;
  throw std::out_of_range("no mover class for instruction");
}

const char* via_name(AtomicVia v) {
  switch (v) {
    case AtomicVia::LeftMover: return "left-mover";
    case AtomicVia::AllReadsRightMover: return "reads-right-movers";
    case AtomicVia::NotAtomic: return "not-atomic";
  }
  return "?";
}

namespace {

struct Unit {
  std::size_t start;
  std::size_t length;
  int thread;
};

std::vector<Unit> split_units(const Program& p, const Execution& e) {
  std::vector<Unit> units;
  State s = initial_state(p);
  std::size_t i = 0;
  while (i < e.actions.size()) {
    const int t = e.actions[i].thread;
    if (t < 0 || t >= static_cast<int>(p.threads.size()))
      throw std::invalid_argument("action of unknown thread");
    bool found = false;
    for (auto& n : thread_enabled(p, s, t, Model::SC, 0).list) {
      if (i + n.actions.size() > e.actions.size()) continue;
      if (!std::equal(n.actions.begin(), n.actions.end(), e.actions.begin() + i)) continue;
      units.push_back({i, n.actions.size(), t});
      i += n.actions.size();
      s = std::move(n.state);
      found = true;
      break;
    }
    if (!found) throw std::invalid_argument("not a valid SC execution");
  }
  return units;
}

std::size_t unit_of(const std::vector<Unit>& units, std::size_t i) {
  for (std::size_t k = 0; k < units.size(); ++k)
    if (i < units[k].start + units[k].length) return k;
  throw std::invalid_argument("position out of range");
}

Execution swapped(const Execution& e, const Unit& first, const Unit& second) {
  Execution out;
  auto copy = [&](std::size_t from, std::size_t len) {
    out.actions.insert(out.actions.end(), e.actions.begin() + from,
                       e.actions.begin() + from + len);
  };
  copy(0, first.start);
  copy(second.start, second.length);
  copy(first.start, first.length);
  const std::size_t rest = second.start + second.length;
  copy(rest, e.actions.size() - rest);
  return out;
}

bool moves(const Program& p, const Execution& e, std::size_t i, bool rightwards) {
  const auto units = split_units(p, e);
  const std::size_t k = unit_of(units, i);
  const std::size_t n = rightwards ? k + 1 : k - 1;
  if ((rightwards && n >= units.size()) || (!rightwards && k == 0)) return true;
  if (units[n].thread == units[k].thread) return true;
  const Execution other =
      rightwards ? swapped(e, units[k], units[n]) : swapped(e, units[n], units[k]);
  const auto end = replay(p, e.actions, Model::SC, 0);
  const auto end2 = replay(p, other.actions, Model::SC, 0);
  return end2 && *end2 == *end;
}

// Successor of s by thread t producing exactly `acts`.
std::optional<State> step_as(const Program& p, const State& s, int t,
                             const std::vector<Action>& acts) {
  for (auto& n : thread_enabled(p, s, t, Model::SC, 0).list)
    if (n.actions == acts) return std::move(n.state);
  return std::nullopt;
}

}  // namespace

std::optional<Execution> swap_units(const Program& p, const Execution& e, std::size_t i,
                                    bool rightwards) {
  const auto units = split_units(p, e);
  const std::size_t k = unit_of(units, i);
  if ((rightwards && k + 1 >= units.size()) || (!rightwards && k == 0)) return std::nullopt;
  Execution other = rightwards ? swapped(e, units[k], units[k + 1])
                               : swapped(e, units[k - 1], units[k]);
  if (!replay(p, other.actions, Model::SC, 0)) return std::nullopt;
  return other;
}

bool moves_right(const Program& p, const Execution& e, std::size_t i) {
  return moves(p, e, i, true);
}

bool moves_left(const Program& p, const Execution& e, std::size_t i) {
  return moves(p, e, i, false);
}

MoverAnalysis classify_movers(const Program& p, std::size_t max_steps) {
  MoverAnalysis out;
  std::map<InstrRef, std::size_t> index;
  for (const InstrRef& r : p.all_instructions()) {
    index[r] = out.classes.size();
    MoverClass c;
    c.instr = r;
    out.classes.push_back(std::move(c));
  }

  struct Node {
    State state;
    int parent;
    std::vector<Action> actions;
    std::size_t depth;
  };
  std::vector<Node> nodes;
  std::unordered_map<State, int, StateHash> seen;
  std::vector<std::vector<int>> buckets(max_steps + 1);
  nodes.push_back({initial_state(p), -1, {}, 0});
  seen.emplace(nodes[0].state, 0);
  buckets[0].push_back(0);

  auto path_to = [&](int id) {
    std::vector<int> chain;
    for (int n = id; n > 0; n = nodes[n].parent) chain.push_back(n);
    Execution e;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
      e.actions.insert(e.actions.end(), nodes[*it].actions.begin(), nodes[*it].actions.end());
    return e;
  };

  for (std::size_t d = 0; d <= max_steps; ++d) {
    for (std::size_t q = 0; q < buckets[d].size(); ++q) {
      const int id = buckets[d][q];
      if (nodes[id].depth != d) continue;  // re-queued at a smaller depth
      ++out.states;
      const State s = nodes[id].state;
      const Successors first = sc_enabled(p, s);
      for (const auto& a : first.list) {
        const std::size_t da = d + a.actions.size();
        if (da > max_steps) {
          if (!seen.contains(a.state)) out.exhaustive = false;
          continue;
        }
        MoverClass& ca = out.classes[index.at(a.actions[0].instr)];
        ca.executed = true;
        const int ta = a.actions[0].thread;
        for (const auto& b : sc_enabled(p, a.state).list) {
          const int tb = b.actions[0].thread;
          if (tb == ta) continue;
          if (da + b.actions.size() > max_steps) {
            out.exhaustive = false;
            continue;
          }
          bool commutes = false;
          if (auto sb = step_as(p, s, tb, b.actions))
            if (auto sab = step_as(p, *sb, ta, a.actions)) commutes = *sab == b.state;
          if (commutes) continue;
          MoverClass& cb = out.classes[index.at(b.actions[0].instr)];
          if (ca.right_mover || cb.left_mover) {
            Execution w = path_to(id);
            w.actions.insert(w.actions.end(), a.actions.begin(), a.actions.end());
            w.actions.insert(w.actions.end(), b.actions.begin(), b.actions.end());
            if (ca.right_mover) {
              ca.right_mover = false;
              ca.right_witness = MoverWitness{w, d};
            }
            if (cb.left_mover) {
              cb.left_mover = false;
              cb.left_witness = MoverWitness{w, da};
            }
          }
        }
        auto [it, fresh] = seen.try_emplace(a.state, static_cast<int>(nodes.size()));
        if (fresh) {
          nodes.push_back({a.state, id, a.actions, da});
          buckets[da].push_back(it->second);
        } else if (nodes[it->second].depth > da) {
          nodes[it->second].parent = id;
          nodes[it->second].actions = a.actions;
          nodes[it->second].depth = da;
          buckets[da].push_back(it->second);
        }
      }
    }
  }
  return out;
}

namespace {

struct ReachKey {
  State state;
  bool active;
  std::uint64_t mask;
  bool operator==(const ReachKey&) const = default;
};

struct ReachKeyHash {
  std::size_t operator()(const ReachKey& k) const {
    return StateHash{}(k.state) * 31 + (k.active ? k.mask * 2 + 1 : 0);
  }
};

std::uint64_t bit(int var) { return std::uint64_t{1} << var; }

}  // namespace

ReachableReads buffer_free_reads(const Program& p, const InstrRef& w, std::size_t max_steps) {
  ReachableReads out;
  const int t = w.thread;
  std::unordered_map<ReachKey, std::size_t, ReachKeyHash> best;
  std::vector<std::vector<ReachKey>> buckets(max_steps + 1);
  ReachKey root{initial_state(p), false, 0};
  best.emplace(root, 0);
  buckets[0].push_back(std::move(root));

  for (std::size_t d = 0; d <= max_steps; ++d) {
    for (std::size_t q = 0; q < buckets[d].size(); ++q) {
      const ReachKey k = buckets[d][q];
      if (best.at(k) != d) continue;
      for (auto& u : sc_enabled(p, k.state).list) {
        const std::size_t du = d + u.actions.size();
        const Action& a = u.actions[0];
        ReachKey next{std::move(u.state), k.active, k.mask};
        if (a.thread == t) {
          const Instruction& ins = p.at(a.instr);
          if (a.instr == w) {
            next.active = true;
            next.mask = bit(a.var);
          } else if (k.active) {
            switch (ins.kind) {
              case InstrKind::Fence:
              case InstrKind::Cas:
                next.active = false;
                next.mask = 0;
                break;
              case InstrKind::Write:
                next.mask |= bit(a.var);
                break;
              case InstrKind::Read:
              case InstrKind::Havoc:
                if (!(k.mask & bit(a.var))) out.reads.insert(a.instr);
                break;
              default:
                break;
            }
          }
        }
        if (du > max_steps) {
          if (!best.contains(next)) out.truncated = true;
          continue;
        }
        auto [it, fresh] = best.try_emplace(next, du);
        if (!fresh) {
          if (it->second <= du) continue;
          it->second = du;
        }
        buckets[du].push_back(std::move(next));
      }
    }
  }
  return out;
}

bool buffer_free_reachable(const Program& p, const InstrRef& w, const InstrRef& r,
                           std::size_t max_steps) {
  if (w.thread != r.thread) return false;
  return buffer_free_reads(p, w, max_steps).reads.contains(r);
}

std::set<InstrRef> buffer_free_reads_cfg(const Program& p, const InstrRef& w) {
  std::set<InstrRef> out;
  const Thread& th = p.threads.at(w.thread);
  const Instruction& wi = p.at(w);
  const std::uint64_t start = wi.loc.is_array() ? 0 : bit(wi.loc.base);
  std::set<std::pair<int, std::uint64_t>> seen;
  std::vector<std::pair<int, std::uint64_t>> stack{{wi.target, start}};
  while (!stack.empty()) {
    auto [label, mask] = stack.back();
    stack.pop_back();
    if (!seen.insert({label, mask}).second) continue;
    const auto& body = th.body[label];
    for (std::size_t i = 0; i < body.size(); ++i) {
      const Instruction& ins = body[i];
      const InstrRef ref{w.thread, label, static_cast<int>(i)};
      std::uint64_t next = mask;
      switch (ins.kind) {
        case InstrKind::Fence:
        case InstrKind::Cas:
          continue;
        case InstrKind::Write:
          if (ref == w) next = start;
          else if (!ins.loc.is_array()) next |= bit(ins.loc.base);
          break;
        case InstrKind::Read:
        case InstrKind::Havoc:
          if (ins.loc.is_array() || !(mask & bit(ins.loc.base))) out.insert(ref);
          break;
        default:
          break;
      }
      stack.push_back({ins.target, next});
    }
  }
  return out;
}

AtomicityReport check_write_atomicity(const Program& p, std::size_t max_steps) {
  AtomicityReport report;
  report.movers = classify_movers(p, max_steps);
  report.exhaustive = report.movers.exhaustive;
  for (const InstrRef& r : p.all_instructions()) {
    if (p.at(r).kind != InstrKind::Write) continue;
    WriteAtomicity wa;
    wa.write = r;
    wa.cfg_reads = buffer_free_reads_cfg(p, r);
    ReachableReads reach = buffer_free_reads(p, r, max_steps);
    if (reach.truncated) report.exhaustive = false;
    wa.reachable_reads = std::move(reach.reads);
    if (report.movers.at(r).left_mover) {
      wa.via = AtomicVia::LeftMover;
    } else {
      for (const InstrRef& rd : wa.reachable_reads)
        if (!report.movers.at(rd).right_mover) wa.offending_reads.insert(rd);
      wa.via = wa.offending_reads.empty() ? AtomicVia::AllReadsRightMover : AtomicVia::NotAtomic;
    }
    wa.atomic = wa.via != AtomicVia::NotAtomic;
    report.atomic = report.atomic && wa.atomic;
    report.writes.push_back(std::move(wa));
  }
  return report;
}

}  // namespace tsorobust
