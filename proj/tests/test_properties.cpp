#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "gen.hpp"
#include "tsorobust/abstraction.hpp"
#include "tsorobust/mover.hpp"
#include "tsorobust/robustness.hpp"
#include "util.hpp"

using namespace tsorobust;

namespace {

Bounds bounds(std::size_t steps, std::size_t buf = 2) {
  Bounds b;
  b.max_steps = steps;
  b.buf_cap = buf;
  return b;
}

// Random programs, each with its source for failure messages.
template <typename F>
void for_random(unsigned seed, int count, const gen::Options& o, F&& check) {
  std::mt19937 rng(seed);
  for (int i = 0; i < count; ++i) {
    const std::string src = gen::program(rng, o);
    CAPTURE(src);
    check(parse_program(src));
  }
}

gen::Options looping() {
  gen::Options o;
  o.loops = true;
  o.havoc = true;
  return o;
}

}  // namespace

TEST_CASE("standard hb acyclicity iff an SC execution has the same trace") {
  auto check = [](const Program& p) {
    const TraceSpace tso = explore_traces(p, Model::TSO, bounds(10));
    const TraceSpace sc = explore_traces(p, Model::SC, bounds(10));
    std::set<std::string> keys;
    for (const auto& c : sc.executions) keys.insert(c.standard_key);
    for (const auto& c : tso.executions) CHECK(c.standard_acyclic == (keys.count(c.standard_key) == 1));
  };
  for_random(1, 150, {}, check);
  for_random(2, 100, looping(), check);
  for (const char* f : kCorpus) check(load_corpus(f));
}

TEST_CASE("extended: an SC-equal trace is acyclic") {
  auto check = [](const Program& p) {
    const TraceSpace tso = explore_traces(p, Model::TSO, bounds(10));
    const TraceSpace sc = explore_traces(p, Model::SC, bounds(10));
    std::set<std::string> keys;
    for (const auto& c : sc.executions) keys.insert(c.extended_key);
    for (const auto& c : tso.executions)
      if (keys.count(c.extended_key)) CHECK(c.extended_acyclic);
  };
  for_random(3, 150, {}, check);
  for_random(4, 100, looping(), check);
}

TEST_CASE("SC valuations are TSO valuations") {
  for_random(5, 150, looping(), [](const Program& p) {
    const auto sc = reachable_valuations(p, Model::SC, bounds(10));
    const auto tso = reachable_valuations(p, Model::TSO, bounds(10, 4));
    for (const auto& v : sc.values) CHECK(tso.values.count(v) == 1);
  });
}

TEST_CASE("SC executions are TSO executions") {
  for_random(6, 100, looping(), [](const Program& p) {
    std::size_t n = 0;
    sc_executions(p, 10, [&](const Execution& e) {
      const auto a = replay(p, e.actions, Model::SC);
      const auto b = replay(p, e.actions, Model::TSO, 1);
      REQUIRE(a);
      CHECK(b);
      if (a && b) CHECK(*a == *b);
      return ++n < 200;
    });
  });
}

TEST_CASE("trace keys agree with structural trace equality") {
  for_random(7, 60, {}, [](const Program& p) {
    std::vector<Execution> runs;
    tso_executions(p, 8, 2, [&](const Execution& e) {
      runs.push_back(e);
      return runs.size() < 40;
    });
    for (Variant v : {Variant::Standard, Variant::Extended})
      for (std::size_t i = 0; i < runs.size(); ++i)
        for (std::size_t j = i; j < runs.size(); ++j) {
          TraceBuilder a(p), b(p);
          a.append(runs[i].actions);
          b.append(runs[j].actions);
          CHECK((a.key(v) == b.key(v)) ==
                traces_equal(build_trace(p, runs[i], v), build_trace(p, runs[j], v)));
        }
  });
}

TEST_CASE("write-atomic programs are robust") {
  std::size_t atomic = 0;
  auto check = [&](const Program& p) {
    const auto a = check_write_atomicity(p, 10);
    if (!a.atomic || !a.exhaustive) return;
    ++atomic;
    Bounds b = bounds(10, 4);
    CHECK(check_robustness(p, b, Variant::Extended).status == RobustnessStatus::Robust);
  };
  for_random(8, 300, {}, check);
  gen::Options o = looping();
  o.threads_max = 2;
  for_random(9, 200, o, check);
  CHECK(atomic > 50);
}

TEST_CASE("standard robustness iff no minimal violation") {
  auto check = [](const Program& p) {
    const Bounds b = bounds(10);
    const auto v = check_robustness(p, b, Variant::Standard);
    REQUIRE(v.status != RobustnessStatus::Unknown);
    const auto m = find_minimal_violation(p, b, Variant::Standard);
    CHECK((v.status == RobustnessStatus::Robust) == !m.has_value());
  };
  for_random(10, 150, {}, check);
  for (const char* f : kCorpus) check(load_corpus(f));
}

TEST_CASE("minimal violations are TSO executions of the stated shape") {
  for_random(11, 150, {}, [](const Program& p) {
    const auto m = find_minimal_violation(p, bounds(10), Variant::Standard);
    if (!m) return;
    const auto& a = m->execution.actions;
    CHECK(replay(p, a, Model::TSO, 2));
    CHECK(m->issue < m->read);
    CHECK(m->read < m->commit);
    CHECK(a[m->issue].kind == ActionKind::Isu);
    CHECK(a[m->commit].kind == ActionKind::Com);
    CHECK(a[m->read].thread == m->thread);
  });
}

TEST_CASE("read abstraction over-approximates reachable valuations") {
  const char* weakenings[] = {"{r} <= {x}", "{r} = {x} || {r} = 0", "{r} >= {x}", "{r} = {x}"};
  std::size_t applied = 0;
  std::mt19937 pick(12);
  for_random(13, 150, {}, [&](const Program& p) {
    for (const auto& ref : p.all_instructions()) {
      const Instruction& ins = p.at(ref);
      if (ins.kind != InstrKind::Read || ins.loc.is_array()) continue;
      if (p.threads[ref.thread].body[ref.label].size() != 1) continue;
      std::string phi = weakenings[pick() % std::size(weakenings)];
      for (auto [key, val] : {std::pair<std::string, std::string>{"{r}", p.slot_names[ins.reg]},
                              {"{x}", p.shared[ins.loc.base]}})
        for (std::size_t k; (k = phi.find(key)) != std::string::npos;) phi.replace(k, key.size(), val);
      const auto spec = parse_abstraction_spec(
          p, p.threads[ref.thread].name + ":" + p.threads[ref.thread].labels[ref.label] + ":" + phi);
      REQUIRE(validate_weakening(p, spec));
      const Program a = apply_abstraction(p, {spec});
      for (Model m : {Model::SC, Model::TSO}) CHECK(check_abstraction_soundness(p, a, m, bounds(10)).sound);
      ++applied;
      break;
    }
  });
  CHECK(applied > 50);
}
