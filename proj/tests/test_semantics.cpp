#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "tsorobust/semantics.hpp"
#include "util.hpp"

using namespace tsorobust;

namespace {

// Thread t runs one labelled rule at a time; u is an idle second thread.
const char* kRules = R"(
program rules;
domain 0..3;
vars x y a[2];
thread t regs r s i;
init W
begin
  W: x := 1; goto end;
  WE: x := r + 1; goto end;
  WW: x := 1; goto WW2;
  WW2: y := 2; goto end;
  RD: r := x; goto end;
  AS: r := s + 2; goto end;
  F: fence; goto end;
  C: r := cas(x, s, 3); goto end;
  A: assume r == 1; goto end;
  K: skip; goto end;
  H: havoc(r, r <= x); goto end;
  H6: havoc(r, x != 0 ? (r = x || r = 0) : r = 0); goto end;
  N: r := 1; goto end;
  N: r := 2; goto end;
  AW: a[i] := 2; goto end;
  AR: r := a[i]; goto end;
end
thread u regs q;
init U
begin
  U: q := x; goto end;
end
)";

const Program& prog() {
  static const Program p = parse_program(kRules);
  return p;
}

int slot(const char* name) {
  const auto& n = prog().slot_names;
  return static_cast<int>(std::find(n.begin(), n.end(), name) - n.begin());
}
int var(const char* name) { return prog().shared_index(name); }
int label(const char* name) { return prog().threads[0].label_index(name); }

State at(const char* l) {
  State s = initial_state(prog());
  s.pc[0] = label(l);
  s.pc[1] = prog().threads[1].label_index("end");
  return s;
}

Action act(ActionKind k, const char* l = nullptr, int v = -1, Value val = 0, int index = 0) {
  Action a;
  a.thread = 0;
  a.kind = k;
  a.var = v;
  a.value = val;
  if (l) a.instr = InstrRef{0, label(l), index};
  return a;
}

Successors tso(const State& s, std::size_t cap = 4) {
  return thread_enabled(prog(), s, 0, Model::TSO, cap);
}
Successors sc(const State& s) { return thread_enabled(prog(), s, 0, Model::SC, 0); }

int end_label() { return label("end"); }

}  // namespace

TEST_CASE("issue appends to the store buffer and emits isu") {
  const auto out = tso(at("W"));
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions == std::vector{act(ActionKind::Isu, "W", var("x"), 1)});
  const State& n = out.list[0].state;
  CHECK(n.buf[0] == std::vector<BufferEntry>{{var("x"), 1}});
  CHECK(n.mem[var("x")] == 0);
  CHECK(n.pc[0] == end_label());
}

TEST_CASE("issue evaluates the value from registers") {
  State s = at("WE");
  s.mem[slot("r")] = 2;
  const auto out = tso(s);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].state.buf[0] == std::vector<BufferEntry>{{var("x"), 3}});
}

TEST_CASE("successive issues keep program order in the buffer") {
  State s = tso(at("WW")).list[0].state;
  const auto out = tso(s);
  // issue of y := 2, then the commit of x
  REQUIRE(out.list.size() == 2);
  CHECK(out.list[0].actions[0].kind == ActionKind::Isu);
  CHECK(out.list[0].state.buf[0] == std::vector<BufferEntry>{{var("x"), 1}, {var("y"), 2}});
}

TEST_CASE("commit pops the head of the buffer") {
  State s = at("end");
  s.buf[0] = {{var("x"), 1}, {var("y"), 2}};
  const auto out = tso(s);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions == std::vector{act(ActionKind::Com, nullptr, var("x"), 1)});
  const State& n = out.list[0].state;
  CHECK(n.mem[var("x")] == 1);
  CHECK(n.mem[var("y")] == 0);
  CHECK(n.buf[0] == std::vector<BufferEntry>{{var("y"), 2}});
  CHECK(n.pc[0] == s.pc[0]);
}

TEST_CASE("commits drain in FIFO order") {
  State s = at("end");
  s.buf[0] = {{var("x"), 1}, {var("x"), 2}};
  State n = tso(s).list[0].state;
  CHECK(n.mem[var("x")] == 1);
  const auto out = tso(n);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions[0] == act(ActionKind::Com, nullptr, var("x"), 2));
  CHECK(out.list[0].state.buf[0].empty());
}

TEST_CASE("no commit with an empty buffer") {
  CHECK(tso(at("end")).list.empty());
}

TEST_CASE("commit is offered after the thread's instructions") {
  State s = at("K");
  s.buf[0] = {{var("y"), 1}};
  const auto out = tso(s);
  REQUIRE(out.list.size() == 2);
  CHECK(out.list[0].actions[0].kind == ActionKind::Tau);
  CHECK(out.list[1].actions[0].kind == ActionKind::Com);
}

TEST_CASE("read from memory when the variable is not buffered") {
  State s = at("RD");
  s.mem[var("x")] = 2;
  const auto out = tso(s);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions == std::vector{act(ActionKind::Rd, "RD", var("x"), 2)});
  CHECK(out.list[0].state.mem[slot("r")] == 2);
  CHECK(out.list[0].state.pc[0] == end_label());
}

TEST_CASE("read forwards the newest buffered write") {
  State s = at("RD");
  s.mem[var("x")] = 3;
  s.buf[0] = {{var("x"), 1}, {var("y"), 0}, {var("x"), 2}};
  const auto out = tso(s);
  REQUIRE(out.list.size() == 2);
  CHECK(out.list[0].actions == std::vector{act(ActionKind::Rd, "RD", var("x"), 2)});
  CHECK(out.list[0].state.mem[slot("r")] == 2);
  CHECK(out.list[0].state.buf[0] == s.buf[0]);
}

TEST_CASE("buffered writes to other variables do not affect a read") {
  State s = at("RD");
  s.mem[var("x")] = 3;
  s.buf[0] = {{var("y"), 1}};
  CHECK(tso(s).list[0].actions == std::vector{act(ActionKind::Rd, "RD", var("x"), 3)});
}

TEST_CASE("another thread's buffer is invisible") {
  State s = at("RD");
  s.buf[1] = {{var("x"), 2}};
  CHECK(tso(s).list[0].actions == std::vector{act(ActionKind::Rd, "RD", var("x"), 0)});
}

TEST_CASE("local assignment is a tau step") {
  State s = at("AS");
  s.mem[slot("s")] = 1;
  const auto out = tso(s);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions == std::vector{act(ActionKind::Tau, "AS")});
  CHECK(out.list[0].state.mem[slot("r")] == 3);
}

TEST_CASE("fence blocks while the buffer is non-empty") {
  State s = at("F");
  s.buf[0] = {{var("x"), 1}};
  const auto out = tso(s);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions[0].kind == ActionKind::Com);
}

TEST_CASE("fence with an empty buffer is a tau step") {
  const auto out = tso(at("F"));
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions == std::vector{act(ActionKind::Tau, "F")});
  CHECK(out.list[0].state.pc[0] == end_label());
}

TEST_CASE("cas success writes through atomically") {
  State s = at("C");
  s.mem[var("x")] = 2;
  s.mem[slot("s")] = 2;
  const auto out = tso(s);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions ==
        std::vector{act(ActionKind::Isu, "C", var("x"), 3), act(ActionKind::Com, nullptr, var("x"), 3)});
  const State& n = out.list[0].state;
  CHECK(n.mem[var("x")] == 3);
  CHECK(n.mem[slot("r")] == 1);
  CHECK(n.buf[0].empty());
}

TEST_CASE("cas failure is a read of the current value") {
  State s = at("C");
  s.mem[var("x")] = 1;
  s.mem[slot("s")] = 2;
  const auto out = tso(s);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions == std::vector{act(ActionKind::Rd, "C", var("x"), 1)});
  CHECK(out.list[0].state.mem[slot("r")] == 0);
  CHECK(out.list[0].state.mem[var("x")] == 1);
}

TEST_CASE("cas needs an empty buffer") {
  State s = at("C");
  s.buf[0] = {{var("y"), 1}};
  const auto out = tso(s);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions[0].kind == ActionKind::Com);
}

TEST_CASE("cas is enabled again once the buffer drains") {
  State s = at("C");
  s.buf[0] = {{var("x"), 0}};
  s.mem[var("x")] = 2;
  State n = tso(s).list[0].state;  // commit x = 0
  const auto out = tso(n);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions.size() == 2);  // s = 0 matches
}

TEST_CASE("assume passes when true") {
  State s = at("A");
  s.mem[slot("r")] = 1;
  const auto out = tso(s);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions == std::vector{act(ActionKind::Tau, "A")});
}

TEST_CASE("assume blocks when false") {
  CHECK(tso(at("A")).list.empty());
  CHECK(sc(at("A")).list.empty());
}

TEST_CASE("skip is a tau step") {
  const auto out = tso(at("K"));
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions == std::vector{act(ActionKind::Tau, "K")});
}

TEST_CASE("havoc picks every value satisfying the predicate at memory") {
  State s = at("H");
  s.mem[var("x")] = 1;
  const auto out = tso(s);
  REQUIRE(out.list.size() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(out.list[k].state.mem[slot("r")] == k);
    CHECK(out.list[k].actions[0].kind == ActionKind::Hvc);
    CHECK(out.list[k].actions[0].var == var("x"));
  }
  // r = 0: 0 <= x holds everywhere; r = 1 needs x >= 1
  CHECK(out.list[0].actions[0].pred == 0b1111);
  CHECK(out.list[1].actions[0].pred == 0b1110);
}

TEST_CASE("havoc instantiates at the buffered value") {
  State s = at("H");
  s.buf[0] = {{var("x"), 2}};
  const auto out = tso(s);
  REQUIRE(out.list.size() == 4);  // r in {0,1,2}, then the commit
  CHECK(out.list[2].state.mem[slot("r")] == 2);
  CHECK(out.list[3].actions[0].kind == ActionKind::Com);
}

TEST_CASE("relaxed read of x may return zero once x is set") {
  State s = at("H6");
  s.mem[var("x")] = 1;
  const auto out = tso(s);
  REQUIRE(out.list.size() == 2);
  CHECK(out.list[0].state.mem[slot("r")] == 0);
  CHECK(out.list[1].state.mem[slot("r")] == 1);
  s.mem[var("x")] = 0;
  const auto zero = tso(s);
  REQUIRE(zero.list.size() == 1);
  CHECK(zero.list[0].state.mem[slot("r")] == 0);
  CHECK(format_action(prog(), zero.list[0].actions[0]) == "(t, hvc, x, {0,1,2,3})");
}

TEST_CASE("nondeterministic label yields one successor per instruction") {
  const auto out = tso(at("N"));
  REQUIRE(out.list.size() == 2);
  CHECK(out.list[0].state.mem[slot("r")] == 1);
  CHECK(out.list[1].state.mem[slot("r")] == 2);
  CHECK(out.list[1].actions[0].instr.index == 1);
}

TEST_CASE("buffer capacity refuses further issues") {
  State s = at("W");
  s.buf[0] = {{var("y"), 1}};
  const auto out = tso(s, 1);
  CHECK(out.capped);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions[0].kind == ActionKind::Com);
}

TEST_CASE("array write resolves its index at issue") {
  State s = at("AW");
  s.mem[slot("i")] = 1;
  const auto out = tso(s);
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].state.buf[0] == std::vector<BufferEntry>{{var("a_1"), 2}});
}

TEST_CASE("out-of-range array access is stuck") {
  State s = at("AR");
  s.mem[slot("i")] = 3;
  const auto out = tso(s);
  CHECK(out.stuck);
  CHECK(out.list.empty());
}

TEST_CASE("array read forwards from the buffer") {
  State s = at("AR");
  s.buf[0] = {{var("a_0"), 3}};
  CHECK(tso(s).list[0].actions == std::vector{act(ActionKind::Rd, "AR", var("a_0"), 3)});
}

TEST_CASE("sc write is an isu immediately followed by its commit") {
  const auto out = sc(at("W"));
  REQUIRE(out.list.size() == 1);
  CHECK(out.list[0].actions ==
        std::vector{act(ActionKind::Isu, "W", var("x"), 1), act(ActionKind::Com, nullptr, var("x"), 1)});
  CHECK(out.list[0].state.mem[var("x")] == 1);
  CHECK(out.list[0].state.buf[0].empty());
}

TEST_CASE("sc read and fence") {
  State s = at("RD");
  s.mem[var("x")] = 3;
  CHECK(sc(s).list[0].actions == std::vector{act(ActionKind::Rd, "RD", var("x"), 3)});
  CHECK(sc(at("F")).list[0].actions == std::vector{act(ActionKind::Tau, "F")});
}

TEST_CASE("sc havoc reads memory") {
  State s = at("H");
  s.mem[var("x")] = 3;
  CHECK(sc(s).list.size() == 4);
}

TEST_CASE("thread order in the global successor function") {
  State s = initial_state(prog());
  s.pc[0] = label("K");
  s.buf[0] = {{var("x"), 1}};
  const auto out = tso_enabled(prog(), s, 4);
  REQUIRE(out.list.size() == 3);
  CHECK(out.list[0].actions[0].thread == 0);
  CHECK(out.list[1].actions[0].kind == ActionKind::Com);
  CHECK(out.list[2].actions == std::vector{Action{1, ActionKind::Rd, var("x"), 0, 0, InstrRef{1, 0, 0}}});
}

TEST_CASE("replay accepts executions and rejects impossible ones") {
  const Program p = load_corpus("sb.prog");
  const int foo = 0;
  Execution e;
  State s = initial_state(p);
  for (int k = 0; k < 3; ++k) {
    auto out = thread_enabled(p, s, foo, Model::TSO, 4);
    e.actions.insert(e.actions.end(), out.list[0].actions.begin(), out.list[0].actions.end());
    s = out.list[0].state;
  }
  auto r = replay(p, e.actions, Model::TSO);
  REQUIRE(r.has_value());
  CHECK(*r == s);
  e.actions.back().value = 3;
  CHECK_FALSE(replay(p, e.actions, Model::TSO).has_value());
}

TEST_CASE("store buffering outcome is TSO only") {
  const Program p = parse_program(R"(program sbl; vars x y;
    thread a regs r1; init a0 begin a0: x := 1; goto a1; a1: r1 := y; goto end; end
    thread b regs r2; init b0 begin b0: y := 1; goto b1; b1: r2 := x; goto end; end)");
  auto both_zero = [&](Model m) {
    bool found = false;
    auto visit = [&](const Execution& e) {
      int zeros = 0;
      for (const auto& a : e.actions)
        if (a.kind == ActionKind::Rd && a.value == 0) ++zeros;
      found = found || zeros == 2;
      return true;
    };
    if (m == Model::SC) sc_executions(p, 20, visit);
    else tso_executions(p, 20, 2, visit);
    return found;
  };
  CHECK_FALSE(both_zero(Model::SC));
  CHECK(both_zero(Model::TSO));
}

TEST_CASE("enumerated executions replay to their end state") {
  const Program p = load_corpus("mp.prog");
  std::size_t n = 0;
  const auto stats = tso_executions(p, 12, 2, [&](const Execution& e) {
    auto s = replay(p, e.actions, Model::TSO, 2);
    CHECK(s.has_value());
    CHECK(s->buffers_empty());
    ++n;
    return true;
  });
  CHECK(stats.executions == n);
  CHECK(n > 0);
}

TEST_CASE("action formatting") {
  const Program& p = prog();
  CHECK(format_action(p, act(ActionKind::Isu, "W", var("x"), 1)) == "(t, isu)");
  CHECK(format_action(p, act(ActionKind::Com, nullptr, var("x"), 1)) == "(t, com, x, 1)");
  CHECK(format_action(p, act(ActionKind::Rd, "RD", var("y"), 0)) == "(t, rd, y, 0)");
  CHECK(format_action(p, act(ActionKind::Tau, "K")) == "(t, tau)");
}
