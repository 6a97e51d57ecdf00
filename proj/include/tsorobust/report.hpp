#pragma once

// Text and JSON renderings of analysis results.

#include <string>

#include <json.hpp>

#include "tsorobust/abstraction.hpp"
#include "tsorobust/mover.hpp"
#include "tsorobust/robustness.hpp"

namespace tsorobust {

using Json = nlohmann::json;

Json action_json(const Program& p, const Action& a);
Json execution_json(const Program& p, const Execution& e);
Json bounds_json(const Bounds& b);
Json valuation_json(const Program& p, const Valuation& v);
std::string format_valuation(const Program& p, const Valuation& v);

Json robustness_json(const Program& p, const RobustnessVerdict& v);
std::string robustness_text(const Program& p, const RobustnessVerdict& v);

Json violation_json(const Program& p, const MinimalViolation& mv);
std::string violation_text(const Program& p, const MinimalViolation& mv);

Json atomicity_json(const Program& p, const AtomicityReport& r);
std::string atomicity_text(const Program& p, const AtomicityReport& r);

Json trace_json(const Program& p, const Trace& t);

}  // namespace tsorobust
