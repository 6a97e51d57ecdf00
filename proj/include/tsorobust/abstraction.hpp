#pragma once

// Read abstraction: rewriting reads into havoc instructions whose predicate
// is weaker than equality, and checking the rewrite on reachable states.

#include <stdexcept>
#include <string_view>
#include <vector>

#include "tsorobust/robustness.hpp"

namespace tsorobust {

class AbstractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Targets the read instruction at (thread, label); `predicate` may mention
// the thread's registers and the read's shared variable.
struct AbstractionSpec {
  int thread = -1;
  int label = -1;
  Expr predicate;
};

// `thread:label:phi`, as given on the command line.
AbstractionSpec parse_abstraction_spec(const Program& p, std::string_view text);

// Specs from the program's `abstract` annotations.
std::vector<AbstractionSpec> annotation_specs(const Program& p);

// The read targeted by a spec; throws AbstractionError when the label holds
// no read or more than one instruction.
InstrRef abstraction_target(const Program& p, const AbstractionSpec& s);

// True iff reg = x implies phi for every value of x and every valuation of
// the other registers of phi. Throws AbstractionError on a bad target or
// when phi mentions a shared variable other than the read's.
bool validate_weakening(const Program& p, const AbstractionSpec& s);

// Replaces each targeted read by havoc(reg, phi) with the same successor.
// The applied annotations are dropped from the result.
Program apply_abstraction(const Program& p, const std::vector<AbstractionSpec>& specs);

struct SoundnessResult {
  bool sound = true;  // original valuations are a subset of the abstract ones
  bool equal = false;
  bool truncated = false;
  std::vector<Valuation> missing;  // reached by the original only
  std::size_t original_count = 0;
  std::size_t abstract_count = 0;
};

SoundnessResult check_abstraction_soundness(const Program& p, const Program& abstracted, Model m,
                                            const Bounds& b);

}  // namespace tsorobust
