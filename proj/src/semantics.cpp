#include "tsorobust/semantics.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace tsorobust {

bool State::buffers_empty() const {
  for (const auto& b : buf)
    if (!b.empty()) return false;
  return true;
}

std::size_t StateHash::operator()(const State& s) const {
  std::size_t h = 0xcbf29ce484222325ull;
  auto mix = [&](std::size_t v) { h = (h ^ v) * 0x100000001b3ull; };
  for (int v : s.pc) mix(static_cast<std::size_t>(v));
  mix(0xfe);
  for (Value v : s.mem) mix(static_cast<std::size_t>(v));
  for (const auto& b : s.buf) {
    mix(0xff);
    for (const auto& e : b) {
      mix(static_cast<std::size_t>(e.var));
      mix(static_cast<std::size_t>(e.value));
    }
  }
  return h;
}

State initial_state(const Program& p) {
  State s;
  for (const Thread& t : p.threads) s.pc.push_back(t.init);
  s.mem.assign(p.num_slots(), 0);
  s.buf.resize(p.threads.size());
  return s;
}

const char* model_name(Model m) { return m == Model::SC ? "sc" : "tso"; }

Value visible_value(const State& s, int thread, int var) {
  const auto& b = s.buf[thread];
  for (auto it = b.rbegin(); it != b.rend(); ++it)
    if (it->var == var) return it->value;
  return s.mem[var];
}

namespace {

ValueSet instantiate(const Program& p, const Expr& pred, const std::vector<Value>& mem,
                     int var) {
  ValueSet set = 0;
  for (int k = 0; k < p.domain.size(); ++k)
    if (eval_bool(pred, mem, p.domain, VarBinding{var, p.domain.at(k)}))
      set |= ValueSet{1} << k;
  return set;
}

void step_thread(const Program& p, const State& s, int t, Model model, std::size_t buf_cap,
                 Successors& out) {
  const Thread& th = p.threads[t];
  const int label = s.pc[t];
  const auto& body = th.body[label];
  const bool empty_buf = s.buf[t].empty();
  const Domain& dom = p.domain;

  for (std::size_t i = 0; i < body.size(); ++i) {
    const Instruction& ins = body[i];
    const InstrRef ref{t, label, static_cast<int>(i)};
    auto make = [&](std::vector<Action> acts) {
      Successor succ{std::move(acts), s};
      succ.state.pc[t] = ins.target;
      return succ;
    };
    auto act = [&](ActionKind k, int var = -1, Value v = 0) {
      Action a;
      a.thread = t;
      a.kind = k;
      a.var = var;
      a.value = v;
      a.instr = ref;
      return a;
    };
    // Commits carry no instruction, as in the TSO commit rule.
    auto commit = [&](int x, Value v) {
      Action a;
      a.thread = t;
      a.kind = ActionKind::Com;
      a.var = x;
      a.value = v;
      return a;
    };
    std::optional<int> var;
    if (ins.kind == InstrKind::Write || ins.kind == InstrKind::Read ||
        ins.kind == InstrKind::Cas) {
      var = ins.loc.resolve(s.mem, dom);
      if (!var) {
        out.stuck = true;
        continue;
      }
    }
    switch (ins.kind) {
      case InstrKind::Write: {
        const Value v = eval(ins.expr, s.mem, dom);
        if (model == Model::SC) {
          Successor succ = make({act(ActionKind::Isu, *var, v), commit(*var, v)});
          succ.state.mem[*var] = v;
          out.list.push_back(std::move(succ));
        } else {
          if (s.buf[t].size() >= buf_cap) {
            out.capped = true;
            break;
          }
          Successor succ = make({act(ActionKind::Isu, *var, v)});
          succ.state.buf[t].push_back({*var, v});
          out.list.push_back(std::move(succ));
        }
        break;
      }
      case InstrKind::Assign: {
        Successor succ = make({act(ActionKind::Tau)});
        succ.state.mem[ins.reg] = eval(ins.expr, s.mem, dom);
        out.list.push_back(std::move(succ));
        break;
      }
      case InstrKind::Read: {
        const Value v = visible_value(s, t, *var);
        Successor succ = make({act(ActionKind::Rd, *var, v)});
        succ.state.mem[ins.reg] = v;
        out.list.push_back(std::move(succ));
        break;
      }
      case InstrKind::Fence:
        if (empty_buf) out.list.push_back(make({act(ActionKind::Tau)}));
        break;
      case InstrKind::Cas: {
        if (!empty_buf) break;
        const Value cur = s.mem[*var];
        if (cur == eval(ins.expr, s.mem, dom)) {
          const Value nv = eval(ins.expr2, s.mem, dom);
          Successor succ = make({act(ActionKind::Isu, *var, nv), commit(*var, nv)});
          succ.state.mem[*var] = nv;
          succ.state.mem[ins.reg] = dom.wrap(1);
          out.list.push_back(std::move(succ));
        } else {
          Successor succ = make({act(ActionKind::Rd, *var, cur)});
          succ.state.mem[ins.reg] = 0;
          out.list.push_back(std::move(succ));
        }
        break;
      }
      case InstrKind::Skip:
        out.list.push_back(make({act(ActionKind::Tau)}));
        break;
      case InstrKind::Assume:
        if (eval_bool(ins.expr, s.mem, dom)) out.list.push_back(make({act(ActionKind::Tau)}));
        break;
      case InstrKind::Havoc: {
        const int x = ins.loc.base;
        const Value seen = visible_value(s, t, x);
        std::vector<Value> mem = s.mem;
        for (int k = 0; k < dom.size(); ++k) {
          const Value choice = dom.at(k);
          mem[ins.reg] = choice;
          if (!eval_bool(ins.expr, mem, dom, VarBinding{x, seen})) continue;
          Action a = act(ActionKind::Hvc, x, choice);
          a.pred = instantiate(p, ins.expr, mem, x);
          Successor succ = make({a});
          succ.state.mem[ins.reg] = choice;
          out.list.push_back(std::move(succ));
        }
        break;
      }
    }
  }

  if (model == Model::TSO && !empty_buf) {
    const BufferEntry head = s.buf[t].front();
    Action a;
    a.thread = t;
    a.kind = ActionKind::Com;
    a.var = head.var;
    a.value = head.value;
    Successor succ{{a}, s};
    succ.state.buf[t].erase(succ.state.buf[t].begin());
    succ.state.mem[head.var] = head.value;
    out.list.push_back(std::move(succ));
  }
}

}  // namespace

Successors thread_enabled(const Program& p, const State& s, int thread, Model m,
                          std::size_t buf_cap) {
  Successors out;
  step_thread(p, s, thread, m, buf_cap, out);
  return out;
}

Successors sc_enabled(const Program& p, const State& s) {
  Successors out;
  for (std::size_t t = 0; t < p.threads.size(); ++t)
    step_thread(p, s, static_cast<int>(t), Model::SC, 0, out);
  return out;
}

Successors tso_enabled(const Program& p, const State& s, std::size_t buf_cap) {
  Successors out;
  for (std::size_t t = 0; t < p.threads.size(); ++t)
    step_thread(p, s, static_cast<int>(t), Model::TSO, buf_cap, out);
  return out;
}

namespace {

struct Enumerator {
  const Program& p;
  Model model;
  std::size_t max_steps;
  std::size_t buf_cap;
  const ExecutionVisitor& visit;
  EnumerationStats stats;
  Execution current;
  bool stopped = false;

  void emit() {
    ++stats.executions;
    if (!visit(current)) stopped = true;
  }

  void run(const State& s) {
    if (stopped) return;
    Successors succ = model == Model::SC ? sc_enabled(p, s) : tso_enabled(p, s, buf_cap);
    const std::size_t depth = current.actions.size();
    bool extended = false;
    bool cut = false;
    for (auto& n : succ.list) {
      if (depth + n.actions.size() > max_steps) {
        cut = true;
        continue;
      }
      extended = true;
      current.actions.insert(current.actions.end(), n.actions.begin(), n.actions.end());
      run(n.state);
      current.actions.resize(depth);
      if (stopped) return;
    }
    if (extended) return;
    if (cut) {
      ++stats.truncated;
      if (s.buffers_empty()) emit();
      return;
    }
    if (succ.stuck) ++stats.stuck;
    if (s.buffers_empty()) emit();
  }
};

}  // namespace

EnumerationStats sc_executions(const Program& p, std::size_t max_steps,
                               const ExecutionVisitor& visit) {
  Enumerator e{p, Model::SC, max_steps, 0, visit, {}, {}, false};
  e.run(initial_state(p));
  return e.stats;
}

EnumerationStats tso_executions(const Program& p, std::size_t max_steps, std::size_t buf_cap,
                                const ExecutionVisitor& visit) {
  Enumerator e{p, Model::TSO, max_steps, buf_cap, visit, {}, {}, false};
  e.run(initial_state(p));
  return e.stats;
}

std::optional<State> replay(const Program& p, const std::vector<Action>& actions, Model m,
                            std::size_t buf_cap) {
  State s = initial_state(p);
  std::size_t i = 0;
  while (i < actions.size()) {
    const int t = actions[i].thread;
    if (t < 0 || t >= static_cast<int>(p.threads.size())) return std::nullopt;
    Successors succ = thread_enabled(p, s, t, m, buf_cap);
    bool found = false;
    for (auto& n : succ.list) {
      if (i + n.actions.size() > actions.size()) continue;
      if (!std::equal(n.actions.begin(), n.actions.end(), actions.begin() + i)) continue;
      i += n.actions.size();
      s = std::move(n.state);
      found = true;
      break;
    }
    if (!found) return std::nullopt;
  }
  return s;
}

std::string format_value_set(const Domain& d, ValueSet s) {
  std::string out = "{";
  bool first = true;
  for (int k = 0; k < d.size(); ++k) {
    if (!(s >> k & 1)) continue;
    if (!first) out += ",";
    out += std::to_string(d.at(k));
    first = false;
  }
  return out + "}";
}

std::string format_action(const Program& p, const Action& a) {
  const std::string t = p.threads.at(a.thread).name;
  switch (a.kind) {
    case ActionKind::Isu:
      return "(" + t + ", isu)";
    case ActionKind::Com:
      return "(" + t + ", com, " + p.shared.at(a.var) + ", " + std::to_string(a.value) + ")";
    case ActionKind::Rd:
      return "(" + t + ", rd, " + p.shared.at(a.var) + ", " + std::to_string(a.value) + ")";
    case ActionKind::Tau:
      return "(" + t + ", tau)";
    case ActionKind::Hvc:
      return "(" + t + ", hvc, " + p.shared.at(a.var) + ", " +
             format_value_set(p.domain, a.pred) + ")";
  }
  return "?";
}

std::string format_execution(const Program& p, const Execution& e) {
  std::ostringstream os;
  for (const Action& a : e.actions) os << format_action(p, a) << "\n";
  return os.str();
}

}  // namespace tsorobust
