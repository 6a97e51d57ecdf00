#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <string>

#include "tsorobust/robustness.hpp"
#include "util.hpp"

using namespace tsorobust;

namespace {

Bounds bounds(std::size_t steps, std::size_t buf = 4) {
  Bounds b;
  b.max_steps = steps;
  b.buf_cap = buf;
  return b;
}

struct Expect {
  const char* file;
  std::size_t steps;
  Variant variant;
  RobustnessStatus status;
};

const Expect kExpect[] = {
    {"mp.prog", 16, Variant::Extended, RobustnessStatus::Robust},
    {"mp.prog", 16, Variant::Standard, RobustnessStatus::Robust},
    {"sb.prog", 16, Variant::Extended, RobustnessStatus::Robust},
    {"wsq.prog", 20, Variant::Extended, RobustnessStatus::NotRobust},
    {"wsq.prog", 20, Variant::Standard, RobustnessStatus::NotRobust},
    {"wsq_abs.prog", 20, Variant::Extended, RobustnessStatus::Robust},
    {"spin.prog", 16, Variant::Extended, RobustnessStatus::Robust},
    {"spin_abs.prog", 16, Variant::Extended, RobustnessStatus::Robust},
    {"sb0.prog", 12, Variant::Extended, RobustnessStatus::Robust},
    {"sb0.prog", 12, Variant::Standard, RobustnessStatus::NotRobust},
    {"gap.prog", 12, Variant::Extended, RobustnessStatus::NotRobust},
};

std::set<std::string> sc_keys(const Program& p, const Bounds& b, Variant v) {
  std::set<std::string> keys;
  const TraceSpace sc = explore_traces(p, Model::SC, b);
  for (const auto& c : sc.executions)
    keys.insert(v == Variant::Standard ? c.standard_key : c.extended_key);
  return keys;
}

std::string key_of(const Program& p, const Execution& e, Variant v) {
  TraceBuilder tb(p);
  tb.append(e.actions);
  return tb.key(v);
}

}  // namespace

TEST_CASE("corpus verdicts") {
  for (const Expect& x : kExpect) {
    CAPTURE(std::string(x.file));
    CAPTURE(variant_name(x.variant));
    const Program p = load_corpus(x.file);
    const auto v = check_robustness(p, bounds(x.steps), x.variant);
    CHECK(v.status == x.status);
    CHECK(v.witness.has_value() == (x.status == RobustnessStatus::NotRobust));
    CHECK(v.variant == x.variant);
    CHECK(v.tso_classes >= v.sc_traces);
  }
}

TEST_CASE("witnesses are TSO executions without an SC counterpart") {
  for (const Expect& x : kExpect) {
    if (x.status != RobustnessStatus::NotRobust) continue;
    CAPTURE(std::string(x.file));
    const Program p = load_corpus(x.file);
    const Bounds b = bounds(x.steps);
    const auto v = check_robustness(p, b, x.variant);
    REQUIRE(v.witness);
    const auto end = replay(p, v.witness->actions, Model::TSO, b.buf_cap);
    REQUIRE(end);
    CHECK(end->buffers_empty());
    CHECK(v.witness->actions.size() <= b.max_steps);
    CHECK(sc_keys(p, b, x.variant).count(key_of(p, *v.witness, x.variant)) == 0);
    CHECK_FALSE(v.reason.empty());
  }
}

TEST_CASE("standard witnesses are cyclic") {
  const Program p = load_corpus("sb0.prog");
  const auto v = check_robustness(p, bounds(12), Variant::Standard);
  REQUIRE(v.witness);
  CHECK_FALSE(hb_acyclic(build_trace(p, *v.witness, Variant::Standard)));
  CHECK(v.reason == "cyclic standard happens-before");
}

TEST_CASE("extended gap witness is acyclic") {
  const Program p = load_corpus("gap.prog");
  const auto v = check_robustness(p, bounds(12), Variant::Extended);
  REQUIRE(v.witness);
  CHECK(hb_acyclic(build_trace(p, *v.witness, Variant::Extended)));
  CHECK(v.reason == "acyclic extended happens-before but no trace-equal SC execution");
}

TEST_CASE("parallel checking is deterministic") {
  for (const char* f : {"wsq.prog", "gap.prog", "sb0.prog"}) {
    CAPTURE(std::string(f));
    const Program p = load_corpus(f);
    for (Variant var : {Variant::Standard, Variant::Extended}) {
      const auto one = check_robustness(p, bounds(16), var, 1);
      const auto four = check_robustness(p, bounds(16), var, 4);
      CHECK(one.status == four.status);
      CHECK(one.witness.has_value() == four.witness.has_value());
      if (one.witness && four.witness) CHECK(one.witness->actions == four.witness->actions);
      CHECK(one.tso_classes == four.tso_classes);
    }
  }
}

TEST_CASE("node budget yields unknown") {
  const Program p = load_corpus("wsq.prog");
  Bounds b = bounds(20);
  b.max_nodes = 50;
  const auto v = check_robustness(p, b, Variant::Extended);
  CHECK(v.status == RobustnessStatus::Unknown);
  CHECK_FALSE(v.witness);
}

TEST_CASE("short bounds are reported as truncated") {
  const Program p = load_corpus("mp.prog");
  CHECK(check_robustness(p, bounds(4), Variant::Extended).truncated);
  CHECK(explore_traces(p, Model::TSO, bounds(4)).truncated);
}

TEST_CASE("SC trace space is acyclic") {
  for (const char* f : kCorpus) {
    CAPTURE(std::string(f));
    const TraceSpace sc = explore_traces(load_corpus(f), Model::SC, bounds(12));
    CHECK_FALSE(sc.executions.empty());
    for (const auto& c : sc.executions) {
      CHECK(c.standard_acyclic);
      CHECK(c.extended_acyclic);
    }
  }
}

TEST_CASE("trace space executions replay") {
  const Program p = load_corpus("sb.prog");
  const TraceSpace tso = explore_traces(p, Model::TSO, bounds(12, 2));
  for (const auto& c : tso.executions) {
    const Execution e = tso.execution(c.node);
    const auto s = replay(p, e.actions, Model::TSO, 2);
    REQUIRE(s);
    CHECK(s->buffers_empty());
    CHECK(key_of(p, e, Variant::Extended) == c.extended_key);
  }
}

TEST_CASE("minimal violation on the work-stealing queue") {
  const Program p = load_corpus("wsq.prog");
  const auto m = find_minimal_violation(p, bounds(20));
  REQUIRE(m);
  CHECK(p.threads[m->thread].name == "take");
  CHECK(m->issue < m->read);
  CHECK(m->read < m->commit);
  const auto& acts = m->execution.actions;
  REQUIRE(m->commit < acts.size());
  CHECK(acts[m->issue].kind == ActionKind::Isu);
  CHECK(acts[m->issue].thread == m->thread);
  CHECK(acts[m->commit].kind == ActionKind::Com);
  CHECK(acts[m->commit].thread == m->thread);
  CHECK(acts[m->read].thread == m->thread);
  CHECK(replay(p, acts, Model::TSO, 4));
  CHECK(m->cost > 0);
}

TEST_CASE("no minimal violation for robust programs") {
  for (const char* f : {"mp.prog", "sb.prog", "spin.prog", "wsq_abs.prog"}) {
    CAPTURE(std::string(f));
    CHECK_FALSE(find_minimal_violation(load_corpus(f), bounds(16)));
  }
}

TEST_CASE("minimal violation exists for store buffering under the standard variant") {
  const auto m = find_minimal_violation(load_corpus("sb0.prog"), bounds(12), Variant::Standard);
  REQUIRE(m);
  CHECK(m->execution.actions.size() <= 12);
}

TEST_CASE("SC valuations are contained in TSO valuations") {
  for (const char* f : kCorpus) {
    CAPTURE(std::string(f));
    const Program p = load_corpus(f);
    const auto sc = reachable_valuations(p, Model::SC, bounds(16));
    const auto tso = reachable_valuations(p, Model::TSO, bounds(16));
    for (const auto& v : sc.values) CHECK(tso.values.count(v) == 1);
  }
}

TEST_CASE("valuation witnesses reach their valuation") {
  const Program p = load_corpus("wsq.prog");
  const auto tso = reachable_valuations(p, Model::TSO, bounds(20));
  CHECK(tso.witnesses.size() == tso.values.size());
  for (const auto& [val, e] : tso.witnesses) {
    const auto s = replay(p, e.actions, Model::TSO, 4);
    REQUIRE(s);
    CHECK(s->buffers_empty());
    for (std::size_t i = 0; i < val.size(); ++i) CHECK(s->mem[i] == val[i]);
  }
}

TEST_CASE("the work-stealing queue has a TSO-only valuation") {
  const Program p = load_corpus("wsq.prog");
  const auto sc = reachable_valuations(p, Model::SC, bounds(20));
  const auto tso = reachable_valuations(p, Model::TSO, bounds(20));
  CHECK(tso.values.size() > sc.values.size());
  const Program sb = load_corpus("sb.prog");
  CHECK(reachable_valuations(sb, Model::SC, bounds(20)).values ==
        reachable_valuations(sb, Model::TSO, bounds(20)).values);
}
