#pragma once

// Abstract syntax, parser, printer and evaluator for the goto-based
// concurrent mini-language (writes, reads, fences, cas, assume, havoc).

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tsorobust {

using Value = int;

// Finite value domain D = [lo, hi]. Arithmetic wraps into this range.
struct Domain {
  Value lo = 0;
  Value hi = 3;

  int size() const { return hi - lo + 1; }
  bool contains(Value v) const { return v >= lo && v <= hi; }
  Value wrap(long long v) const;
  int offset(Value v) const { return v - lo; }
  Value at(int offset) const { return lo + offset; }
  bool operator==(const Domain&) const = default;
};

// Set of domain values, bit i standing for lo + i. Used for instantiated
// havoc predicates.
using ValueSet = std::uint64_t;

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, int column, const std::string& what);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Op {
  Const,
  Reg,   // slot = memory slot of a register
  Var,   // slot = shared variable index (havoc predicates only)
  Neg,
  Not,
  Add,
  Sub,
  Mul,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Ite,
};

struct Expr {
  Op op = Op::Const;
  Value value = 0;
  int slot = -1;
  std::vector<Expr> kids;

  static Expr constant(Value v) { return Expr{Op::Const, v, -1, {}}; }
  static Expr reg(int slot) { return Expr{Op::Reg, 0, slot, {}}; }
  static Expr var(int index) { return Expr{Op::Var, 0, index, {}}; }
  static Expr unary(Op op, Expr e);
  static Expr binary(Op op, Expr a, Expr b);
  static Expr ite(Expr c, Expr a, Expr b);

  bool operator==(const Expr&) const = default;
};

// Binding of the single shared variable a havoc predicate may mention.
struct VarBinding {
  int var = -1;
  Value value = 0;
};

// Evaluates e over the given memory (registers live in their slots).
// Booleans evaluate to 0/1; arithmetic wraps into the domain. Throws
// std::logic_error on an unbound shared variable.
Value eval(const Expr& e, std::span<const Value> mem, const Domain& dom,
           std::optional<VarBinding> binding = std::nullopt);
inline bool eval_bool(const Expr& e, std::span<const Value> mem, const Domain& dom,
                      std::optional<VarBinding> binding = std::nullopt) {
  return eval(e, mem, dom, binding) != 0;
}

// Collects register slots and shared variables mentioned by e.
void collect_regs(const Expr& e, std::vector<int>& out);
void collect_vars(const Expr& e, std::vector<int>& out);

// A shared-variable access: a scalar, or an element of a fixed-size
// array addressed by a register expression.
struct Location {
  int base = -1;
  int length = 1;
  std::optional<Expr> index;

  bool is_array() const { return index.has_value(); }
  // Concrete shared variable index, or nullopt when out of range.
  std::optional<int> resolve(std::span<const Value> mem, const Domain& dom) const;
  bool operator==(const Location&) const = default;
};

enum class InstrKind { Write, Assign, Read, Fence, Cas, Skip, Assume, Havoc };

struct Instruction {
  InstrKind kind = InstrKind::Skip;
  int reg = -1;      // Assign/Read/Cas/Havoc target register slot
  Location loc;      // Write/Read/Cas, and the havoc variable
  Expr expr;         // Write/Assign value, Cas expected, Assume/Havoc predicate
  Expr expr2;        // Cas new value
  int target = -1;   // goto label index within the thread

  bool touches_shared() const;
  bool operator==(const Instruction&) const = default;
};

// Identity of a labelled instruction: thread, label, position within the label.
struct InstrRef {
  int thread = -1;
  int label = -1;
  int index = -1;
  auto operator<=>(const InstrRef&) const = default;
};

struct Thread {
  std::string name;
  std::vector<int> regs;              // memory slots
  std::vector<std::string> labels;    // label index -> name; "end" is terminal
  std::vector<std::vector<Instruction>> body;  // label index -> instructions
  int init = 0;

  int label_index(std::string_view name) const;  // -1 when absent
};

// Havoc annotation from the program source (`abstract l: havoc(r, phi);`).
struct SourceAbstraction {
  int thread = -1;
  int label = -1;
  int reg = -1;
  Expr predicate;
};

struct Program {
  std::string name;
  Domain domain;
  std::vector<std::string> shared;    // shared variable names (arrays expanded)
  std::map<std::string, std::pair<int, int>> arrays;  // name -> (base, length)
  std::vector<std::string> slot_names;  // every memory slot: shared then registers
  std::vector<int> slot_owner;          // -1 for shared, else thread index
  std::vector<Thread> threads;
  std::vector<SourceAbstraction> annotations;

  int num_shared() const { return static_cast<int>(shared.size()); }
  int num_slots() const { return static_cast<int>(slot_names.size()); }
  int thread_index(std::string_view name) const;  // -1 when absent
  int shared_index(std::string_view name) const;  // -1 when absent
  const Instruction& at(const InstrRef& ref) const;
  std::string describe(const InstrRef& ref) const;  // "thread:label#i"
  std::vector<InstrRef> all_instructions() const;
};

// Parses a whole program text; validates every well-formedness invariant.
Program parse_program(std::string_view text);

// Parses one expression in the scope of a thread; shared variables are
// accepted only when allow_shared is set (havoc predicates).
Expr parse_expr(const Program& p, int thread, std::string_view text, bool allow_shared);

// Re-checks the program invariants; throws ValidationError.
void validate(const Program& p);

// The set ins(l) of instructions at a label, by thread and label name.
std::span<const Instruction> instructions_of(const Program& p, std::string_view thread,
                                             std::string_view label);
// Searches every thread for the label; throws when unknown or ambiguous.
std::span<const Instruction> instructions_of(const Program& p, std::string_view label);

std::string print_expr(const Program& p, const Expr& e);
std::string print_instruction(const Program& p, int thread, const Instruction& ins);
std::string print_program(const Program& p);

}  // namespace tsorobust
