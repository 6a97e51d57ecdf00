#include "tsorobust/report.hpp"

#include <sstream>

namespace tsorobust {

namespace {

const char* kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::Isu: return "isu";
    case ActionKind::Com: return "com";
    case ActionKind::Rd: return "rd";
    case ActionKind::Tau: return "tau";
    case ActionKind::Hvc: return "hvc";
  }
  return "?";
}

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Write: return "wr";
    case NodeKind::Read: return "rd";
    case NodeKind::Havoc: return "hvc";
  }
  return "?";
}

}  // namespace

Json action_json(const Program& p, const Action& a) {
  Json j;
  j["thread"] = p.threads.at(a.thread).name;
  j["kind"] = kind_name(a.kind);
  if (a.kind == ActionKind::Com || a.kind == ActionKind::Rd) {
    j["var"] = p.shared.at(a.var);
    j["value"] = a.value;
  } else if (a.kind == ActionKind::Hvc) {
    j["var"] = p.shared.at(a.var);
    j["pred"] = format_value_set(p.domain, a.pred);
  }
  j["text"] = format_action(p, a);
  return j;
}

Json execution_json(const Program& p, const Execution& e) {
  Json j = Json::array();
  for (const Action& a : e.actions) j.push_back(action_json(p, a));
  return j;
}

Json bounds_json(const Bounds& b) {
  return {{"max_steps", b.max_steps}, {"buf_cap", b.buf_cap}, {"max_nodes", b.max_nodes}};
}

Json valuation_json(const Program& p, const Valuation& v) {
  Json j = Json::object();
  for (std::size_t i = 0; i < v.size(); ++i) j[p.shared[i]] = v[i];
  return j;
}

std::string format_valuation(const Program& p, const Valuation& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += " ";
    s += p.shared[i] + "=" + std::to_string(v[i]);
  }
  return s;
}

Json robustness_json(const Program& p, const RobustnessVerdict& v) {
  Json j;
  j["program"] = p.name;
  j["command"] = "robust";
  j["variant"] = variant_name(v.variant);
  j["bounds"] = bounds_json(v.bounds);
  j["status"] = status_name(v.status);
  j["truncated"] = v.truncated;
  j["tso_trace_classes"] = v.tso_classes;
  j["sc_traces"] = v.sc_traces;
  if (!v.reason.empty()) j["reason"] = v.reason;
  if (v.witness) j["witness"] = execution_json(p, *v.witness);
  return j;
}

std::string robustness_text(const Program& p, const RobustnessVerdict& v) {
  std::ostringstream os;
  os << "program: " << p.name << "\n"
     << "variant: " << variant_name(v.variant) << "\n"
     << "bounds: steps=" << v.bounds.max_steps << " buf=" << v.bounds.buf_cap
     << (v.truncated ? " (truncated)" : "") << "\n"
     << "tso trace classes: " << v.tso_classes << "\n";
  if (v.variant == Variant::Extended) os << "sc traces: " << v.sc_traces << "\n";
  os << "verdict: " << status_name(v.status);
  if (!v.reason.empty()) os << " (" << v.reason << ")";
  os << "\n";
  if (v.witness) os << "witness:\n" << format_execution(p, *v.witness);
  return os.str();
}

Json violation_json(const Program& p, const MinimalViolation& mv) {
  return {{"thread", p.threads.at(mv.thread).name},
          {"issue", mv.issue},
          {"read", mv.read},
          {"commit", mv.commit},
          {"cost", mv.cost},
          {"execution", execution_json(p, mv.execution)}};
}

std::string violation_text(const Program& p, const MinimalViolation& mv) {
  std::ostringstream os;
  os << "minimal violation: thread " << p.threads.at(mv.thread).name << ", delay " << mv.cost
     << ", isu at " << mv.issue << ", read at " << mv.read << ", commit at " << mv.commit
     << "\n"
     << format_execution(p, mv.execution);
  return os.str();
}

namespace {

Json refs_json(const Program& p, const std::set<InstrRef>& refs) {
  Json j = Json::array();
  for (const auto& r : refs) j.push_back(p.describe(r));
  return j;
}

std::string refs_text(const Program& p, const std::set<InstrRef>& refs) {
  if (refs.empty()) return "-";
  std::string s;
  for (const auto& r : refs) s += (s.empty() ? "" : ", ") + p.describe(r);
  return s;
}

Json witness_json(const Program& p, const std::optional<MoverWitness>& w) {
  if (!w) return nullptr;
  return {{"position", w->position}, {"execution", execution_json(p, w->execution)}};
}

}  // namespace

Json atomicity_json(const Program& p, const AtomicityReport& r) {
  Json j;
  j["program"] = p.name;
  j["command"] = "atomic";
  j["atomic"] = r.atomic;
  j["exhaustive"] = r.exhaustive;
  j["sc_states"] = r.movers.states;
  Json movers = Json::array();
  for (const auto& c : r.movers.classes) {
    const Instruction& ins = p.at(c.instr);
    movers.push_back({{"instruction", p.describe(c.instr)},
                      {"text", print_instruction(p, c.instr.thread, ins)},
                      {"executed", c.executed},
                      {"right_mover", c.right_mover},
                      {"left_mover", c.left_mover},
                      {"right_witness", witness_json(p, c.right_witness)},
                      {"left_witness", witness_json(p, c.left_witness)}});
  }
  j["movers"] = std::move(movers);
  Json writes = Json::array();
  for (const auto& w : r.writes) {
    writes.push_back({{"write", p.describe(w.write)},
                      {"text", print_instruction(p, w.write.thread, p.at(w.write))},
                      {"atomic", w.atomic},
                      {"via", via_name(w.via)},
                      {"buffer_free_reads", refs_json(p, w.reachable_reads)},
                      {"cfg_reads", refs_json(p, w.cfg_reads)},
                      {"offending_reads", refs_json(p, w.offending_reads)}});
  }
  j["writes"] = std::move(writes);
  return j;
}

std::string atomicity_text(const Program& p, const AtomicityReport& r) {
  std::ostringstream os;
  os << "program: " << p.name << "\n"
     << "sc states: " << r.movers.states << (r.exhaustive ? "" : " (bounded)") << "\n"
     << "movers:\n";
  for (const auto& c : r.movers.classes) {
    const char* cls = c.right_mover && c.left_mover ? "both"
                      : c.right_mover               ? "right"
                      : c.left_mover                ? "left"
                                                    : "none";
    os << "  " << p.describe(c.instr) << "  " << print_instruction(p, c.instr.thread, p.at(c.instr))
       << "  " << cls << (c.executed ? "" : " (not executed)") << "\n";
  }
  os << "writes:\n";
  for (const auto& w : r.writes) {
    os << "  " << p.describe(w.write) << "  " << via_name(w.via)
       << "  reads: " << refs_text(p, w.reachable_reads);
    if (!w.offending_reads.empty()) os << "  offending: " << refs_text(p, w.offending_reads);
    os << "\n";
  }
  os << "verdict: " << (r.atomic ? "write-atomic" : "not write-atomic")
     << (r.exhaustive ? "" : " (bounded)") << "\n";
  for (const auto& w : r.writes) {
    for (const auto& rd : w.offending_reads) {
      const auto& c = r.movers.at(rd);
      if (!c.right_witness) continue;
      os << "witness: " << p.describe(rd) << " is not a right mover (position "
         << c.right_witness->position << ")\n"
         << format_execution(p, c.right_witness->execution);
      return os.str();
    }
  }
  return os.str();
}

Json trace_json(const Program& p, const Trace& t) {
  Json j;
  j["variant"] = variant_name(t.variant);
  Json nodes = Json::array();
  for (const auto& n : t.nodes) {
    Json node = {{"thread", p.threads.at(n.thread).name},
                 {"kind", node_kind_name(n.kind)},
                 {"var", p.shared.at(n.var)},
                 {"po", n.po_index},
                 {"label", node_label(p, n)}};
    if (n.kind == NodeKind::Havoc) node["pred"] = format_value_set(p.domain, n.pred);
    else node["value"] = n.value;
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (const auto& e : t.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"kind", edge_name(e.kind)}});
  j["edges"] = std::move(edges);
  j["acyclic"] = hb_acyclic(t);
  return j;
}

}  // namespace tsorobust
