#include "tsorobust/lang.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace tsorobust {

Value Domain::wrap(long long v) const {
  const long long n = size();
  long long m = (v - lo) % n;
  if (m < 0) m += n;
  return static_cast<Value>(lo + m);
}

SyntaxError::SyntaxError(int line, int column, const std::string& what)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

Expr Expr::unary(Op op, Expr e) {
  Expr r{op, 0, -1, {}};
  r.kids.push_back(std::move(e));
  return r;
}

Expr Expr::binary(Op op, Expr a, Expr b) {
  Expr r{op, 0, -1, {}};
  r.kids.push_back(std::move(a));
  r.kids.push_back(std::move(b));
  return r;
}

Expr Expr::ite(Expr c, Expr a, Expr b) {
  Expr r{Op::Ite, 0, -1, {}};
  r.kids.push_back(std::move(c));
  r.kids.push_back(std::move(a));
  r.kids.push_back(std::move(b));
  return r;
}

Value eval(const Expr& e, std::span<const Value> mem, const Domain& dom,
           std::optional<VarBinding> binding) {
  auto sub = [&](int i) { return eval(e.kids[i], mem, dom, binding); };
  switch (e.op) {
    case Op::Const:
      return e.value;
    case Op::Reg:
      if (e.slot < 0 || static_cast<std::size_t>(e.slot) >= mem.size())
        throw std::logic_error("eval: unbound register slot " + std::to_string(e.slot));
      return mem[e.slot];
    case Op::Var:
      if (!binding || binding->var != e.slot)
        throw std::logic_error("eval: unbound shared variable " + std::to_string(e.slot));
      return binding->value;
    case Op::Neg:
      return dom.wrap(-static_cast<long long>(sub(0)));
    case Op::Not:
      return sub(0) == 0 ? 1 : 0;
    case Op::Add:
      return dom.wrap(static_cast<long long>(sub(0)) + sub(1));
    case Op::Sub:
      return dom.wrap(static_cast<long long>(sub(0)) - sub(1));
    case Op::Mul:
      return dom.wrap(static_cast<long long>(sub(0)) * sub(1));
    case Op::Eq:
      return sub(0) == sub(1);
    case Op::Ne:
      return sub(0) != sub(1);
    case Op::Lt:
      return sub(0) < sub(1);
    case Op::Le:
      return sub(0) <= sub(1);
    case Op::Gt:
      return sub(0) > sub(1);
    case Op::Ge:
      return sub(0) >= sub(1);
    case Op::And:
      return sub(0) != 0 && sub(1) != 0;
    case Op::Or:
      return sub(0) != 0 || sub(1) != 0;
    case Op::Ite:
      return sub(0) != 0 ? sub(1) : sub(2);
  }
  throw std::logic_error("eval: bad operator");
}

void collect_regs(const Expr& e, std::vector<int>& out) {
  if (e.op == Op::Reg && std::find(out.begin(), out.end(), e.slot) == out.end())
    out.push_back(e.slot);
  for (const auto& k : e.kids) collect_regs(k, out);
}

void collect_vars(const Expr& e, std::vector<int>& out) {
  if (e.op == Op::Var && std::find(out.begin(), out.end(), e.slot) == out.end())
    out.push_back(e.slot);
  for (const auto& k : e.kids) collect_vars(k, out);
}

std::optional<int> Location::resolve(std::span<const Value> mem, const Domain& dom) const {
  if (!index) return base;
  const Value i = eval(*index, mem, dom);
  if (i < 0 || i >= length) return std::nullopt;
  return base + i;
}

bool Instruction::touches_shared() const {
  switch (kind) {
    case InstrKind::Write:
    case InstrKind::Read:
    case InstrKind::Cas:
    case InstrKind::Havoc:
      return true;
    default:
      return false;
  }
}

int Thread::label_index(std::string_view n) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == n) return static_cast<int>(i);
  return -1;
}

int Program::thread_index(std::string_view n) const {
  for (std::size_t i = 0; i < threads.size(); ++i)
    if (threads[i].name == n) return static_cast<int>(i);
  return -1;
}

int Program::shared_index(std::string_view n) const {
  for (std::size_t i = 0; i < shared.size(); ++i)
    if (shared[i] == n) return static_cast<int>(i);
  return -1;
}

const Instruction& Program::at(const InstrRef& ref) const {
  return threads.at(ref.thread).body.at(ref.label).at(ref.index);
}

std::string Program::describe(const InstrRef& ref) const {
  const Thread& t = threads.at(ref.thread);
  std::string s = t.name + ":" + t.labels.at(ref.label);
  if (t.body.at(ref.label).size() > 1) s += "#" + std::to_string(ref.index);
  return s;
}

std::vector<InstrRef> Program::all_instructions() const {
  std::vector<InstrRef> out;
  for (std::size_t t = 0; t < threads.size(); ++t)
    for (std::size_t l = 0; l < threads[t].body.size(); ++l)
      for (std::size_t i = 0; i < threads[t].body[l].size(); ++i)
        out.push_back({static_cast<int>(t), static_cast<int>(l), static_cast<int>(i)});
  return out;
}

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long number = 0;
  int line = 1;
  int column = 1;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  static const char* two[] = {":=", "==", "!=", "<=", ">=", "&&", "||", ".."};
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      if (t.text.size() > 9) throw SyntaxError(line, col, "integer literal too large");
      t.number = std::stoll(t.text);
      advance(j - i);
    } else {
      t.kind = Tok::Punct;
      bool matched = false;
      if (i + 1 < src.size()) {
        for (const char* p : two) {
          if (src[i] == p[0] && src[i + 1] == p[1]) {
            t.text = p;
            matched = true;
            break;
          }
        }
      }
      if (!matched) {
        if (std::string_view("():;,[]+-*<>=!?.").find(c) == std::string_view::npos)
          throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

const std::set<std::string, std::less<>> kKeywords = {
    "program", "vars", "thread", "regs", "init", "begin", "end", "goto", "fence",
    "skip",    "assume", "cas",  "havoc", "domain", "abstract", "true", "false"};

class Parser {
 public:
  Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  // Scope for name resolution while parsing expressions.
  Program* prog = nullptr;
  int thread = -1;
  bool allow_shared = false;
  bool accessing = false;  // the current instruction already names a shared variable

  const Token& peek(int k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at_punct(std::string_view p, int k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool at_word(std::string_view w, int k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == w;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(peek().line, peek().column, what);
  }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail("expected '" + std::string(p) + "'");
    next();
  }
  void expect_word(std::string_view w) {
    if (!at_word(w)) fail("expected '" + std::string(w) + "'");
    next();
  }
  bool accept_punct(std::string_view p) {
    if (!at_punct(p)) return false;
    next();
    return true;
  }
  std::string ident(const char* what) {
    if (peek().kind != Tok::Ident) fail(std::string("expected ") + what);
    return next().text;
  }
  std::string name(const char* what) {
    if (peek().kind != Tok::Ident || kKeywords.contains(peek().text))
      fail(std::string("expected ") + what);
    return next().text;
  }
  long long integer() {
    bool neg = accept_punct("-");
    if (peek().kind != Tok::Int) fail("expected integer");
    long long v = next().number;
    return neg ? -v : v;
  }
  bool done() const { return peek().kind == Tok::End; }

  // Expressions, C-like precedence.
  Expr expr() {
    Expr c = disj();
    if (accept_punct("?")) {
      Expr a = expr();
      expect_punct(":");
      Expr b = expr();
      return Expr::ite(std::move(c), std::move(a), std::move(b));
    }
    return c;
  }
  Expr disj() {
    Expr e = conj();
    while (accept_punct("||")) e = Expr::binary(Op::Or, std::move(e), conj());
    return e;
  }
  Expr conj() {
    Expr e = cmp();
    while (accept_punct("&&")) e = Expr::binary(Op::And, std::move(e), cmp());
    return e;
  }
  Expr cmp() {
    Expr e = additive();
    static const std::pair<const char*, Op> ops[] = {{"==", Op::Eq}, {"=", Op::Eq},
                                                     {"!=", Op::Ne}, {"<=", Op::Le},
                                                     {">=", Op::Ge}, {"<", Op::Lt},
                                                     {">", Op::Gt}};
    for (auto [tok, op] : ops) {
      if (at_punct(tok)) {
        next();
        return Expr::binary(op, std::move(e), additive());
      }
    }
    return e;
  }
  Expr additive() {
    Expr e = term();
    for (;;) {
      if (accept_punct("+"))
        e = Expr::binary(Op::Add, std::move(e), term());
      else if (accept_punct("-"))
        e = Expr::binary(Op::Sub, std::move(e), term());
      else
        return e;
    }
  }
  Expr term() {
    Expr e = unary();
    while (accept_punct("*")) e = Expr::binary(Op::Mul, std::move(e), unary());
    return e;
  }
  Expr unary() {
    if (accept_punct("-")) return Expr::unary(Op::Neg, unary());
    if (accept_punct("!")) return Expr::unary(Op::Not, unary());
    return primary();
  }
  Expr primary() {
    if (accept_punct("(")) {
      Expr e = expr();
      expect_punct(")");
      return e;
    }
    if (peek().kind == Tok::Int) {
      const Token t = next();
      if (!prog->domain.contains(static_cast<Value>(t.number)))
        throw SyntaxError(t.line, t.column,
                          "literal " + t.text + " outside the value domain");
      return Expr::constant(static_cast<Value>(t.number));
    }
    if (at_word("true")) {
      next();
      return Expr::constant(1);
    }
    if (at_word("false")) {
      next();
      return Expr::constant(0);
    }
    const Token t = peek();
    const std::string n = name("expression");
    return resolve_name(n, t);
  }

  Expr resolve_name(const std::string& n, const Token& at) {
    const Thread& th = prog->threads[thread];
    for (int slot : th.regs)
      if (prog->slot_names[slot] == n) return Expr::reg(slot);
    const int v = prog->shared_index(n);
    if (v >= 0) {
      if (!allow_shared && accessing)
        throw ValidationError("instruction accesses two shared variables: '" + n +
                              "' in thread '" + th.name + "' (line " + std::to_string(at.line) +
                              ")");
      if (!allow_shared)
        throw SyntaxError(at.line, at.column,
                          "shared variable '" + n + "' not allowed in a register expression");
      return Expr::var(v);
    }
    for (std::size_t s = 0; s < prog->slot_names.size(); ++s)
      if (prog->slot_names[s] == n && prog->slot_owner[s] >= 0)
        throw ValidationError("cross-thread register: '" + n + "' used in thread '" +
                              th.name + "' belongs to thread '" +
                              prog->threads[prog->slot_owner[s]].name + "'");
    if (prog->arrays.contains(n))
      throw SyntaxError(at.line, at.column, "array '" + n + "' needs an index");
    throw ValidationError("unknown name '" + n + "' in thread '" + th.name + "'");
  }

  int own_register(const std::string& n) {
    for (int slot : prog->threads[thread].regs)
      if (prog->slot_names[slot] == n) return slot;
    for (std::size_t s = 0; s < prog->slot_names.size(); ++s)
      if (prog->slot_names[s] == n && prog->slot_owner[s] >= 0)
        throw ValidationError("cross-thread register: '" + n + "' used in thread '" +
                              prog->threads[thread].name + "'");
    throw ValidationError("'" + n + "' is not a register of thread '" +
                          prog->threads[thread].name + "'");
  }

  bool is_location_name(const std::string& n) const {
    return prog->shared_index(n) >= 0 || prog->arrays.contains(n);
  }

  // Parses `x` or `a[e]`; the current token is the name.
  Location location() {
    const std::string n = name("shared variable");
    Location loc;
    if (auto it = prog->arrays.find(n); it != prog->arrays.end()) {
      expect_punct("[");
      bool saved = allow_shared;
      allow_shared = false;
      Expr idx = expr();
      allow_shared = saved;
      expect_punct("]");
      accessing = true;
      loc.base = it->second.first;
      loc.length = it->second.second;
      loc.index = std::move(idx);
      return loc;
    }
    loc.base = prog->shared_index(n);
    if (loc.base < 0) fail("'" + n + "' is not a shared variable");
    accessing = true;
    return loc;
  }

  Instruction instruction() {
    Instruction ins;
    allow_shared = false;
    accessing = false;
    if (at_word("skip")) {
      next();
      ins.kind = InstrKind::Skip;
    } else if (at_word("fence")) {
      next();
      ins.kind = InstrKind::Fence;
    } else if (at_word("assume")) {
      next();
      ins.kind = InstrKind::Assume;
      ins.expr = expr();
    } else if (at_word("havoc")) {
      next();
      ins.kind = InstrKind::Havoc;
      expect_punct("(");
      ins.reg = own_register(name("register"));
      expect_punct(",");
      allow_shared = true;
      ins.expr = expr();
      allow_shared = false;
      expect_punct(")");
      std::vector<int> vars;
      collect_vars(ins.expr, vars);
      if (vars.size() != 1)
        throw ValidationError("havoc predicate must mention exactly one shared variable");
      ins.loc.base = vars[0];
    } else {
      const std::string lhs = peek().text;
      if (peek().kind != Tok::Ident || kKeywords.contains(lhs)) fail("expected instruction");
      if (is_location_name(lhs)) {
        ins.kind = InstrKind::Write;
        ins.loc = location();
        expect_punct(":=");
        ins.expr = expr();
      } else {
        next();
        ins.reg = own_register(lhs);
        expect_punct(":=");
        if (at_word("cas")) {
          next();
          ins.kind = InstrKind::Cas;
          expect_punct("(");
          ins.loc = location();
          expect_punct(",");
          ins.expr = expr();
          expect_punct(",");
          ins.expr2 = expr();
          expect_punct(")");
        } else if (peek().kind == Tok::Ident && is_location_name(peek().text) &&
                   (at_punct(";", 1) || at_punct("[", 1))) {
          ins.kind = InstrKind::Read;
          ins.loc = location();
        } else {
          ins.kind = InstrKind::Assign;
          ins.expr = expr();
        }
      }
    }
    return ins;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

int add_label(Thread& t, const std::string& n) {
  int i = t.label_index(n);
  if (i >= 0) return i;
  t.labels.push_back(n);
  t.body.emplace_back();
  return static_cast<int>(t.labels.size()) - 1;
}

void parse_annotation(Parser& ps, Program& p) {
  // abstract [thread.]label: havoc(r, phi);
  const std::string first = ps.ident("label");
  std::string thread_name, label = first;
  if (ps.accept_punct(".")) {
    thread_name = first;
    label = ps.ident("label");
  }
  ps.expect_punct(":");
  int ti = -1, li = -1;
  for (std::size_t t = 0; t < p.threads.size(); ++t) {
    if (!thread_name.empty() && p.threads[t].name != thread_name) continue;
    const int l = p.threads[t].label_index(label);
    if (l < 0 || p.threads[t].body[l].empty()) continue;
    if (ti >= 0) throw ValidationError("ambiguous label '" + label + "' in abstract annotation");
    ti = static_cast<int>(t);
    li = l;
  }
  if (ti < 0) throw ValidationError("dangling label '" + label + "' in abstract annotation");
  ps.thread = ti;
  ps.expect_word("havoc");
  ps.expect_punct("(");
  SourceAbstraction a;
  a.thread = ti;
  a.label = li;
  a.reg = ps.own_register(ps.name("register"));
  ps.expect_punct(",");
  ps.allow_shared = true;
  a.predicate = ps.expr();
  ps.allow_shared = false;
  ps.expect_punct(")");
  ps.expect_punct(";");
  p.annotations.push_back(std::move(a));
}

}  // namespace

Program parse_program(std::string_view text) {
  Parser ps(lex(text));
  Program p;
  ps.prog = &p;
  ps.expect_word("program");
  p.name = ps.name("program name");
  ps.accept_punct(";");
  if (ps.at_word("domain")) {
    ps.next();
    p.domain.lo = static_cast<Value>(ps.integer());
    ps.expect_punct("..");
    p.domain.hi = static_cast<Value>(ps.integer());
    ps.expect_punct(";");
    if (p.domain.hi < p.domain.lo || p.domain.size() > 64)
      throw ValidationError("domain must be a non-empty range of at most 64 values");
  }
  ps.expect_word("vars");
  while (!ps.at_word("thread") && !ps.at_punct(";") && !ps.done()) {
    const std::string v = ps.name("shared variable");
    if (p.shared_index(v) >= 0 || p.arrays.contains(v))
      throw ValidationError("duplicate shared variable '" + v + "'");
    if (ps.accept_punct("[")) {
      const long long n = ps.integer();
      ps.expect_punct("]");
      if (n < 1) throw ValidationError("array '" + v + "' must have positive size");
      p.arrays[v] = {p.num_shared(), static_cast<int>(n)};
      for (long long k = 0; k < n; ++k) p.shared.push_back(v + "_" + std::to_string(k));
    } else {
      p.shared.push_back(v);
    }
  }
  ps.accept_punct(";");
  if (p.num_shared() > 64) throw ValidationError("at most 64 shared variables are supported");
  for (const auto& s : p.shared) {
    p.slot_names.push_back(s);
    p.slot_owner.push_back(-1);
  }

  while (ps.at_word("thread")) {
    ps.next();
    Thread t;
    t.name = ps.name("thread name");
    if (p.thread_index(t.name) >= 0) throw ValidationError("duplicate thread '" + t.name + "'");
    const int ti = static_cast<int>(p.threads.size());
    ps.expect_word("regs");
    while (!ps.at_word("init") && !ps.at_punct(";") && !ps.done()) {
      const std::string r = ps.name("register");
      for (std::size_t s = 0; s < p.slot_names.size(); ++s)
        if (p.slot_names[s] == r)
          throw ValidationError(p.slot_owner[s] < 0
                                    ? "register '" + r + "' clashes with a shared variable"
                                    : "register '" + r + "' declared in two threads");
      if (p.arrays.contains(r))
        throw ValidationError("register '" + r + "' clashes with a shared array");
      t.regs.push_back(p.num_slots());
      p.slot_names.push_back(r);
      p.slot_owner.push_back(ti);
    }
    ps.accept_punct(";");
    ps.expect_word("init");
    const std::string init = ps.name("initial label");
    ps.accept_punct(";");
    ps.expect_word("begin");
    p.threads.push_back(std::move(t));
    Thread& th = p.threads.back();
    ps.thread = ti;
    std::vector<std::string> defined;
    struct Raw {
      std::string label, target;
      Token target_tok;
      Instruction ins;
    };
    std::vector<Raw> raw;
    while (!ps.at_word("end")) {
      if (ps.done()) ps.fail("unterminated thread body");
      Raw r;
      r.label = ps.name("label");
      ps.expect_punct(":");
      r.ins = ps.instruction();
      ps.expect_punct(";");
      ps.expect_word("goto");
      r.target_tok = ps.peek();
      r.target = ps.ident("goto label");
      ps.expect_punct(";");
      if (std::find(defined.begin(), defined.end(), r.label) == defined.end())
        defined.push_back(r.label);
      raw.push_back(std::move(r));
    }
    ps.next();  // end
    // Labels are numbered by first definition, with the terminal "end" last.
    for (const auto& l : defined) add_label(th, l);
    add_label(th, "end");
    for (auto& r : raw) {
      if (th.label_index(r.target) < 0)
        throw ValidationError("dangling label '" + r.target + "' in thread '" + th.name +
                              "' (line " + std::to_string(r.target_tok.line) + ")");
      r.ins.target = th.label_index(r.target);
      th.body[th.label_index(r.label)].push_back(std::move(r.ins));
    }
    th.init = th.label_index(init);
    if (th.init < 0)
      throw ValidationError("dangling label '" + init + "': initial label of thread '" +
                            th.name + "'");
  }
  while (ps.at_word("abstract")) {
    ps.next();
    parse_annotation(ps, p);
  }
  if (!ps.done()) ps.fail("unexpected input after program");
  validate(p);
  return p;
}

Expr parse_expr(const Program& p, int thread, std::string_view text, bool allow_shared) {
  Parser ps(lex(text));
  ps.prog = const_cast<Program*>(&p);  // read-only use during expression parsing
  ps.thread = thread;
  ps.allow_shared = allow_shared;
  Expr e = ps.expr();
  if (!ps.done()) ps.fail("unexpected input after expression");
  return e;
}

void validate(const Program& p) {
  if (!p.domain.contains(0)) throw ValidationError("value domain must contain 0");
  for (std::size_t ti = 0; ti < p.threads.size(); ++ti) {
    const Thread& t = p.threads[ti];
    auto own = [&](int slot) {
      return std::find(t.regs.begin(), t.regs.end(), slot) != t.regs.end();
    };
    auto check_expr = [&](const Expr& e, bool allow_var) {
      std::vector<int> regs, vars;
      collect_regs(e, regs);
      collect_vars(e, vars);
      for (int r : regs)
        if (!own(r))
          throw ValidationError("cross-thread register '" + p.slot_names.at(r) +
                                "' in thread '" + t.name + "'");
      if (!allow_var && !vars.empty())
        throw ValidationError("shared variable in register expression of thread '" + t.name +
                              "'");
      return vars;
    };
    if (t.init < 0 || t.init >= static_cast<int>(t.labels.size()))
      throw ValidationError("thread '" + t.name + "' has no initial label");
    for (std::size_t li = 0; li < t.body.size(); ++li) {
      for (const Instruction& ins : t.body[li]) {
        if (ins.target < 0 || ins.target >= static_cast<int>(t.labels.size()))
          throw ValidationError("dangling label in thread '" + t.name + "'");
        if (ins.reg >= 0 && !own(ins.reg))
          throw ValidationError("cross-thread register '" + p.slot_names.at(ins.reg) +
                                "' in thread '" + t.name + "'");
        if (ins.loc.index) check_expr(*ins.loc.index, false);
        switch (ins.kind) {
          case InstrKind::Havoc: {
            const auto vars = check_expr(ins.expr, true);
            if (vars.size() != 1 || vars[0] != ins.loc.base)
              throw ValidationError("instruction accesses two shared variables: havoc in '" +
                                    t.name + "' must mention exactly one");
            break;
          }
          case InstrKind::Cas:
            check_expr(ins.expr, false);
            check_expr(ins.expr2, false);
            break;
          default:
            check_expr(ins.expr, false);
        }
      }
    }
  }
}

std::span<const Instruction> instructions_of(const Program& p, std::string_view thread,
                                             std::string_view label) {
  const int ti = p.thread_index(thread);
  if (ti < 0) throw std::out_of_range("unknown thread '" + std::string(thread) + "'");
  const int li = p.threads[ti].label_index(label);
  if (li < 0) throw std::out_of_range("unknown label '" + std::string(label) + "'");
  return p.threads[ti].body[li];
}

std::span<const Instruction> instructions_of(const Program& p, std::string_view label) {
  std::optional<std::span<const Instruction>> found;
  for (const Thread& t : p.threads) {
    const int li = t.label_index(label);
    if (li < 0 || (label == "end")) continue;
    if (found) throw std::out_of_range("ambiguous label '" + std::string(label) + "'");
    found = std::span<const Instruction>(t.body[li]);
  }
  if (!found) throw std::out_of_range("unknown label '" + std::string(label) + "'");
  return *found;
}

namespace {

const char* op_text(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "&&";
    case Op::Or: return "||";
    default: return "?";
  }
}

std::string print_location(const Program& p, const Location& loc) {
  if (!loc.index) return p.shared.at(loc.base);
  for (const auto& [name, range] : p.arrays)
    if (range.first == loc.base) return name + "[" + print_expr(p, *loc.index) + "]";
  return "?";
}

}  // namespace

std::string print_expr(const Program& p, const Expr& e) {
  switch (e.op) {
    case Op::Const:
      return e.value < 0 ? "(" + std::to_string(e.value) + ")" : std::to_string(e.value);
    case Op::Reg:
      return p.slot_names.at(e.slot);
    case Op::Var:
      return p.shared.at(e.slot);
    case Op::Neg:
      return "-(" + print_expr(p, e.kids[0]) + ")";
    case Op::Not:
      return "!(" + print_expr(p, e.kids[0]) + ")";
    case Op::Ite:
      return "(" + print_expr(p, e.kids[0]) + " ? " + print_expr(p, e.kids[1]) + " : " +
             print_expr(p, e.kids[2]) + ")";
    default:
      return "(" + print_expr(p, e.kids[0]) + " " + op_text(e.op) + " " +
             print_expr(p, e.kids[1]) + ")";
  }
}

std::string print_instruction(const Program& p, int thread, const Instruction& ins) {
  (void)thread;
  auto reg = [&] { return p.slot_names.at(ins.reg); };
  switch (ins.kind) {
    case InstrKind::Write:
      return print_location(p, ins.loc) + " := " + print_expr(p, ins.expr);
    case InstrKind::Assign:
      return reg() + " := " + print_expr(p, ins.expr);
    case InstrKind::Read:
      return reg() + " := " + print_location(p, ins.loc);
    case InstrKind::Fence:
      return "fence";
    case InstrKind::Cas:
      return reg() + " := cas(" + print_location(p, ins.loc) + ", " + print_expr(p, ins.expr) +
             ", " + print_expr(p, ins.expr2) + ")";
    case InstrKind::Skip:
      return "skip";
    case InstrKind::Assume:
      return "assume " + print_expr(p, ins.expr);
    case InstrKind::Havoc:
      return "havoc(" + reg() + ", " + print_expr(p, ins.expr) + ")";
  }
  return "?";
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  os << "program " << p.name << ";\n";
  os << "domain " << p.domain.lo << ".." << p.domain.hi << ";\n";
  os << "vars";
  for (int v = 0; v < p.num_shared(); ++v) {
    bool in_array = false;
    for (const auto& [name, range] : p.arrays) {
      if (range.first == v) os << " " << name << "[" << range.second << "]";
      if (v >= range.first && v < range.first + range.second) in_array = true;
    }
    if (!in_array) os << " " << p.shared[v];
  }
  os << ";\n";
  for (std::size_t ti = 0; ti < p.threads.size(); ++ti) {
    const Thread& t = p.threads[ti];
    os << "\nthread " << t.name << " regs";
    for (int r : t.regs) os << " " << p.slot_names[r];
    os << "; init " << t.labels[t.init] << " begin\n";
    for (std::size_t li = 0; li < t.body.size(); ++li)
      for (const Instruction& ins : t.body[li])
        os << "  " << t.labels[li] << ": "
           << print_instruction(p, static_cast<int>(ti), ins) << "; goto "
           << t.labels[ins.target] << ";\n";
    os << "end\n";
  }
  for (const SourceAbstraction& a : p.annotations) {
    const Thread& t = p.threads[a.thread];
    os << "\nabstract " << t.name << "." << t.labels[a.label] << ": havoc("
       << p.slot_names[a.reg] << ", " << print_expr(p, a.predicate) << ");";
  }
  if (!p.annotations.empty()) os << "\n";
  return os.str();
}

}  // namespace tsorobust
