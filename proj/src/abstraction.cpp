#include "tsorobust/abstraction.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace tsorobust {

AbstractionSpec parse_abstraction_spec(const Program& p, std::string_view text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string_view::npos)
    throw AbstractionError("abstraction spec must look like thread:label:phi");
  const std::string thread(text.substr(0, c1));
  const std::string label(text.substr(c1 + 1, c2 - c1 - 1));
  AbstractionSpec s;
  s.thread = p.thread_index(thread);
  if (s.thread < 0) throw AbstractionError("unknown thread '" + thread + "'");
  s.label = p.threads[s.thread].label_index(label);
  if (s.label < 0)
    throw AbstractionError("unknown label '" + label + "' in thread '" + thread + "'");
  s.predicate = parse_expr(p, s.thread, text.substr(c2 + 1), true);
  return s;
}

InstrRef abstraction_target(const Program& p, const AbstractionSpec& s) {
  if (s.thread < 0 || s.thread >= static_cast<int>(p.threads.size()))
    throw AbstractionError("abstraction names an unknown thread");
  const Thread& th = p.threads[s.thread];
  if (s.label < 0 || s.label >= static_cast<int>(th.body.size()))
    throw AbstractionError("abstraction names an unknown label");
  const auto& body = th.body[s.label];
  const std::string where = th.name + ":" + th.labels[s.label];
  if (body.size() != 1 || body[0].kind != InstrKind::Read)
    throw AbstractionError("abstraction target " + where + " is not a single read instruction");
  if (body[0].loc.is_array())
    throw AbstractionError("abstraction target " + where + " reads an array element");
  return {s.thread, s.label, 0};
}

bool validate_weakening(const Program& p, const AbstractionSpec& s) {
  const Instruction& rd = p.at(abstraction_target(p, s));
  const int var = rd.loc.base;
  std::vector<int> vars;
  collect_vars(s.predicate, vars);
  for (int v : vars)
    if (v != var)
      throw AbstractionError("predicate mentions '" + p.shared[v] + "' but the read is of '" +
                             p.shared[var] + "'");
  if (vars.empty())
    throw AbstractionError("predicate must mention the read variable '" + p.shared[var] + "'");
  std::vector<int> regs;
  collect_regs(s.predicate, regs);
  std::sort(regs.begin(), regs.end());
  regs.erase(std::unique(regs.begin(), regs.end()), regs.end());
  std::erase(regs, rd.reg);

  const Domain& dom = p.domain;
  std::vector<Value> mem(p.num_slots(), 0);
  std::vector<int> digits(regs.size(), 0);
  for (int k = 0; k < dom.size(); ++k) {
    const Value v = dom.at(k);
    mem[rd.reg] = v;
    std::fill(digits.begin(), digits.end(), 0);
    while (true) {
      for (std::size_t i = 0; i < regs.size(); ++i) mem[regs[i]] = dom.at(digits[i]);
      if (!eval_bool(s.predicate, mem, dom, VarBinding{var, v})) return false;
      std::size_t i = 0;
      while (i < digits.size() && ++digits[i] == dom.size()) digits[i++] = 0;
      if (i == digits.size()) break;
    }
  }
  return true;
}

std::vector<AbstractionSpec> annotation_specs(const Program& p) {
  std::vector<AbstractionSpec> out;
  for (const SourceAbstraction& a : p.annotations) {
    AbstractionSpec s{a.thread, a.label, a.predicate};
    const Instruction& rd = p.at(abstraction_target(p, s));
    if (rd.reg != a.reg)
      throw AbstractionError("annotation at " + p.threads[a.thread].name + ":" +
                             p.threads[a.thread].labels[a.label] + " names register '" +
                             p.slot_names[a.reg] + "' but the read assigns '" +
                             p.slot_names[rd.reg] + "'");
    out.push_back(std::move(s));
  }
  return out;
}

Program apply_abstraction(const Program& p, const std::vector<AbstractionSpec>& specs) {
  std::set<std::pair<int, int>> targets;
  for (const auto& s : specs) {
    const Thread& th = p.threads.at(s.thread);
    const std::string where = th.name + ":" + th.labels.at(s.label);
    if (!targets.insert({s.thread, s.label}).second)
      throw AbstractionError("two abstractions target " + where);
    if (!validate_weakening(p, s))
      throw AbstractionError("predicate at " + where + " is not implied by equality with the read");
  }
  Program out = p;
  for (const auto& s : specs) {
    Instruction& ins = out.threads[s.thread].body[s.label][0];
    ins.kind = InstrKind::Havoc;
    ins.expr = s.predicate;
  }
  std::erase_if(out.annotations, [&](const SourceAbstraction& a) {
    return targets.contains({a.thread, a.label});
  });
  validate(out);
  return out;
}

SoundnessResult check_abstraction_soundness(const Program& p, const Program& abstracted, Model m,
                                            const Bounds& b) {
  SoundnessResult r;
  const Valuations orig = reachable_valuations(p, m, b);
  const Valuations abs = reachable_valuations(abstracted, m, b);
  r.truncated = orig.truncated || abs.truncated;
  r.original_count = orig.values.size();
  r.abstract_count = abs.values.size();
  std::set_difference(orig.values.begin(), orig.values.end(), abs.values.begin(),
                      abs.values.end(), std::back_inserter(r.missing));
  r.sound = r.missing.empty();
  r.equal = orig.values == abs.values;
  return r;
}

}  // namespace tsorobust
