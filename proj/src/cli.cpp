#include "tsorobust/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tsorobust/corpus.hpp"
#include "tsorobust/report.hpp"

namespace tsorobust {

namespace {

namespace fs = std::filesystem;

const CLI::Validator kPositive(
    [](std::string& v) -> std::string {
      return v.find_first_not_of("0123456789") == std::string::npos && v.find_first_not_of('0') != std::string::npos
                 ? std::string()
                 : "must be a positive integer, got '" + v + "'";
    },
    "POSITIVE");

struct Options {
  std::string file;
  std::size_t steps = 16;
  std::size_t buf = 4;
  std::size_t max_nodes = Bounds{}.max_nodes;
  std::string variant = "extended";
  std::string model = "tso";
  std::string format = "text";
  std::vector<std::string> abstractions;
  unsigned jobs = 1;
  bool minimal = false;
  bool witnesses = false;
  bool no_reduce = false;
  std::string corpus_dir;

  Bounds bounds() const { return {steps, buf, max_nodes}; }
  Variant var() const { return variant == "standard" ? Variant::Standard : Variant::Extended; }
  Model mdl() const { return model == "sc" ? Model::SC : Model::TSO; }
  bool json() const { return format == "json"; }
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path resolve(const std::string& file) {
  if (fs::exists(file)) return file;
  if (const char* dir = std::getenv("TSOROBUST_CORPUS")) {
    for (fs::path cand : {fs::path(dir) / file, fs::path(dir) / fs::path(file).filename()})
      if (fs::exists(cand)) return cand;
  }
  throw UsageError("cannot open '" + file + "'");
}

struct Loaded {
  Program original;
  std::vector<AbstractionSpec> specs;
  Program program;  // with the abstractions applied
};

Loaded load(const Options& o) {
  const fs::path path = resolve(o.file);
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + o.file + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Loaded l;
  try {
    l.original = parse_program(ss.str());
  } catch (const SyntaxError& e) {
    throw UsageError(o.file + ":" + e.what());
  }
  l.specs = annotation_specs(l.original);
  for (const auto& text : o.abstractions) l.specs.push_back(parse_abstraction_spec(l.original, text));
  l.program = apply_abstraction(l.original, l.specs);
  return l;
}

void print(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

int cmd_parse(const Options& o, std::ostream& out) {
  const Loaded l = load(o);
  if (o.json()) {
    Json j;
    j["program"] = l.program.name;
    j["domain"] = {l.program.domain.lo, l.program.domain.hi};
    j["shared"] = l.program.shared;
    Json threads = Json::array();
    for (std::size_t t = 0; t < l.program.threads.size(); ++t) {
      const Thread& th = l.program.threads[t];
      Json instrs = Json::array();
      for (std::size_t lb = 0; lb < th.body.size(); ++lb)
        for (const auto& ins : th.body[lb])
          instrs.push_back({{"label", th.labels[lb]},
                            {"instruction", print_instruction(l.program, static_cast<int>(t), ins)},
                            {"goto", th.labels[ins.target]}});
      threads.push_back({{"name", th.name}, {"init", th.labels[th.init]}, {"body", instrs}});
    }
    j["threads"] = std::move(threads);
    j["source"] = print_program(l.program);
    print(out, j);
  } else {
    out << print_program(l.program);
  }
  return kHolds;
}

int cmd_explore(const Options& o, std::ostream& out) {
  const Loaded l = load(o);
  const Program& p = l.program;
  const Bounds b = o.bounds();
  const TraceSpace space = explore_traces(p, o.mdl(), b);
  const Valuations vals = reachable_valuations(p, o.mdl(), b);
  if (o.json()) {
    Json j;
    j["program"] = p.name;
    j["command"] = "explore";
    j["model"] = model_name(o.mdl());
    j["bounds"] = bounds_json(b);
    j["trace_classes"] = space.executions.size();
    j["truncated"] = space.truncated || vals.truncated;
    j["budget_exceeded"] = space.budget_exceeded;
    Json vs = Json::array();
    for (const auto& [v, e] : vals.witnesses) {
      Json item = {{"valuation", valuation_json(p, v)}};
      if (o.witnesses) item["witness"] = execution_json(p, e);
      vs.push_back(std::move(item));
    }
    j["valuations"] = std::move(vs);
    print(out, j);
  } else {
    out << "program: " << p.name << "\n"
        << "model: " << model_name(o.mdl()) << "\n"
        << "bounds: steps=" << b.max_steps << " buf=" << b.buf_cap
        << (space.truncated || vals.truncated ? " (truncated)" : "") << "\n"
        << "trace classes: " << space.executions.size() << "\n"
        << "reachable valuations: " << vals.values.size() << "\n";
    for (const auto& [v, e] : vals.witnesses) {
      out << "  " << format_valuation(p, v) << "\n";
      if (o.witnesses)
        for (const Action& a : e.actions) out << "    " << format_action(p, a) << "\n";
    }
  }
  return space.budget_exceeded ? kUnknown : kHolds;
}

int cmd_robust(const Options& o, std::ostream& out) {
  const Loaded l = load(o);
  const Program& p = l.program;
  const RobustnessVerdict v = check_robustness(p, o.bounds(), o.var(), o.jobs);
  std::optional<MinimalViolation> mv;
  if (o.minimal) mv = find_minimal_violation(p, o.bounds(), o.var());
  if (o.json()) {
    Json j = robustness_json(p, v);
    if (o.minimal) j["minimal_violation"] = mv ? violation_json(p, *mv) : Json(nullptr);
    print(out, j);
  } else {
    out << robustness_text(p, v);
    if (o.minimal) out << (mv ? violation_text(p, *mv) : "minimal violation: none\n");
  }
  switch (v.status) {
    case RobustnessStatus::Robust: return kHolds;
    case RobustnessStatus::NotRobust: return kRefuted;
    case RobustnessStatus::Unknown: return kUnknown;
  }
  return kUnknown;
}

int cmd_atomic(const Options& o, std::ostream& out) {
  const Loaded l = load(o);
  const AtomicityReport r = check_write_atomicity(l.program, o.steps);
  if (o.json()) print(out, atomicity_json(l.program, r));
  else out << atomicity_text(l.program, r);
  if (!r.atomic) return kRefuted;
  return r.exhaustive ? kHolds : kUnknown;
}

int cmd_abstract(const Options& o, std::ostream& out) {
  const Loaded l = load(o);
  if (l.specs.empty()) throw UsageError("no abstraction given (use --abstract or an annotation)");
  const Bounds b = o.bounds();
  const SoundnessResult sc = check_abstraction_soundness(l.original, l.program, Model::SC, b);
  const SoundnessResult tso = check_abstraction_soundness(l.original, l.program, Model::TSO, b);
  if (o.json()) {
    Json j;
    j["program"] = l.program.name;
    j["command"] = "abstract";
    j["bounds"] = bounds_json(b);
    j["source"] = print_program(l.program);
    for (const auto& [name, r] : {std::pair{"sc", &sc}, std::pair{"tso", &tso}}) {
      Json missing = Json::array();
      for (const auto& v : r->missing) missing.push_back(valuation_json(l.program, v));
      j[name] = {{"sound", r->sound},
                 {"equal", r->equal},
                 {"truncated", r->truncated},
                 {"original_valuations", r->original_count},
                 {"abstract_valuations", r->abstract_count},
                 {"missing", missing}};
    }
    print(out, j);
  } else {
    out << print_program(l.program) << "\n";
    for (const auto& [name, r] : {std::pair{"sc", &sc}, std::pair{"tso", &tso}}) {
      out << name << ": original " << r->original_count << " valuations, abstract "
          << r->abstract_count << ", " << (r->sound ? (r->equal ? "equal" : "included") : "NOT included")
          << (r->truncated ? " (bounded)" : "") << "\n";
      for (const auto& v : r->missing) out << "  missing: " << format_valuation(l.program, v) << "\n";
    }
  }
  return sc.sound && tso.sound ? kHolds : kRefuted;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const Loaded l = load(o);
  const Program& p = l.program;
  const Bounds b = o.bounds();
  const Valuations sc = reachable_valuations(p, Model::SC, b);
  const Valuations tso = reachable_valuations(p, Model::TSO, b);
  std::vector<std::pair<Valuation, Execution>> extra;
  for (const auto& w : tso.witnesses)
    if (!sc.values.contains(w.first)) extra.push_back(w);
  const bool truncated = sc.truncated || tso.truncated;
  if (o.json()) {
    Json j;
    j["program"] = p.name;
    j["command"] = "compare-states";
    j["bounds"] = bounds_json(b);
    j["truncated"] = truncated;
    j["sc_valuations"] = sc.values.size();
    j["tso_valuations"] = tso.values.size();
    j["equal"] = extra.empty();
    Json xs = Json::array();
    for (const auto& [v, e] : extra)
      xs.push_back({{"valuation", valuation_json(p, v)}, {"witness", execution_json(p, e)}});
    j["tso_only"] = std::move(xs);
    print(out, j);
  } else {
    out << "program: " << p.name << "\n"
        << "bounds: steps=" << b.max_steps << " buf=" << b.buf_cap
        << (truncated ? " (truncated)" : "") << "\n"
        << "sc valuations: " << sc.values.size() << "\n"
        << "tso valuations: " << tso.values.size() << "\n"
        << "verdict: " << (extra.empty() ? "same valuations" : "tso reaches more valuations")
        << "\n";
    for (const auto& [v, e] : extra)
      out << "tso only: " << format_valuation(p, v) << "\n" << format_execution(p, e);
  }
  return extra.empty() ? kHolds : kRefuted;
}

int cmd_trace_dot(const Options& o, std::ostream& out) {
  const Loaded l = load(o);
  const Program& p = l.program;
  const Bounds b = o.bounds();
  const Variant v = o.var();
  // The robustness witness when there is one, else the largest trace found.
  Execution e;
  if (o.mdl() == Model::TSO) {
    const RobustnessVerdict verdict = check_robustness(p, b, v, o.jobs);
    if (verdict.witness) e = *verdict.witness;
  }
  if (e.actions.empty()) {
    const TraceSpace space = explore_traces(p, o.mdl(), b);
    std::size_t best = 0;
    for (const auto& c : space.executions) {
      Execution cand = space.execution(c.node);
      const std::size_t n = build_trace(p, cand, v).nodes.size();
      if (e.actions.empty() || n > best) {
        best = n;
        e = std::move(cand);
      }
    }
  }
  const Trace t = build_trace(p, e, v);
  if (o.json()) {
    Json j = trace_json(p, t);
    j["program"] = p.name;
    j["execution"] = execution_json(p, e);
    print(out, j);
  } else {
    out << trace_to_dot(p, t, !o.no_reduce);
  }
  return kHolds;
}

int cmd_corpus(const Options& o, std::ostream& out) {
  std::string dir = o.corpus_dir;
  if (dir.empty()) {
    const char* env = std::getenv("TSOROBUST_CORPUS");
    dir = env ? env : "corpus";
  }
  const auto results = run_corpus(dir, o.jobs);
  bool ok = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.fixture.text << " (exit " << r.exit_code << ")\n";
    ok = ok && r.passed;
  }
  out << results.size() << " fixtures, " << (ok ? "all passed" : "failures") << "\n";
  return ok ? kHolds : kRefuted;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounded TSO robustness analyses for small concurrent programs", "tsorobust"};
  app.require_subcommand(1);
  Options o;

  auto add_file = [&](CLI::App* c) { c->add_option("program", o.file, "program file")->required(); };
  auto add_bounds = [&](CLI::App* c) {
    c->add_option("--steps", o.steps, "maximum number of actions")->check(kPositive);
    c->add_option("--buf", o.buf, "store buffer capacity")->check(kPositive);
    c->add_option("--max-nodes", o.max_nodes, "exploration budget")->check(kPositive);
  };
  auto add_format = [&](CLI::App* c, std::vector<std::string> allowed) {
    c->add_option("--format", o.format, "output format")->check(CLI::IsMember(allowed));
  };
  auto add_abstract = [&](CLI::App* c) {
    c->add_option("--abstract", o.abstractions, "read abstraction thread:label:phi");
  };
  auto add_variant = [&](CLI::App* c) {
    c->add_option("--variant", o.variant, "trace variant")
        ->check(CLI::IsMember({"standard", "extended"}));
  };
  auto add_jobs = [&](CLI::App* c) {
    c->add_option("--jobs", o.jobs, "worker threads")->check(kPositive);
  };
  auto add_model = [&](CLI::App* c) {
    c->add_option("--model", o.model, "memory model")->check(CLI::IsMember({"sc", "tso"}));
  };

  auto* parse = app.add_subcommand("parse", "parse, validate and print a program");
  add_file(parse);
  add_abstract(parse);
  add_format(parse, {"text", "json"});

  auto* explore = app.add_subcommand("explore", "explore bounded executions");
  add_file(explore);
  add_bounds(explore);
  add_model(explore);
  add_abstract(explore);
  add_format(explore, {"text", "json"});
  explore->add_flag("--witness", o.witnesses, "print an execution per valuation");

  auto* robust = app.add_subcommand("robust", "check trace robustness against SC");
  add_file(robust);
  add_bounds(robust);
  add_variant(robust);
  add_abstract(robust);
  add_jobs(robust);
  add_format(robust, {"text", "json"});
  robust->add_flag("--minimal", o.minimal, "also search for a minimal violation");

  auto* atomic = app.add_subcommand("atomic", "check write atomicity with movers");
  add_file(atomic);
  add_bounds(atomic);
  add_abstract(atomic);
  add_format(atomic, {"text", "json"});

  auto* abstract = app.add_subcommand("abstract", "apply read abstractions and check soundness");
  add_file(abstract);
  add_bounds(abstract);
  add_abstract(abstract);
  add_format(abstract, {"text", "json"});

  auto* compare = app.add_subcommand("compare-states", "compare SC and TSO reachable valuations");
  add_file(compare);
  add_bounds(compare);
  add_abstract(compare);
  add_format(compare, {"text", "json"});

  auto* dot = app.add_subcommand("trace-dot", "render a trace as Graphviz");
  add_file(dot);
  add_bounds(dot);
  add_model(dot);
  add_variant(dot);
  add_abstract(dot);
  add_jobs(dot);
  add_format(dot, {"dot", "json"});
  dot->add_flag("--no-reduce", o.no_reduce, "keep transitively implied edges");

  auto* corpus = app.add_subcommand("corpus", "run the fixture manifest");
  corpus->add_option("dir", o.corpus_dir, "corpus directory");
  add_jobs(corpus);

  std::vector<std::string> argv_store{"tsorobust"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*parse) return cmd_parse(o, out);
    if (*explore) return cmd_explore(o, out);
    if (*robust) return cmd_robust(o, out);
    if (*atomic) return cmd_atomic(o, out);
    if (*abstract) return cmd_abstract(o, out);
    if (*compare) return cmd_compare(o, out);
    if (*dot) return cmd_trace_dot(o, out);
    if (*corpus) return cmd_corpus(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ValidationError& e) {
    err << "error: " << o.file << ": " << e.what() << "\n";
  } catch (const AbstractionError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const SyntaxError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kUsage;
}

}  // namespace tsorobust
