#pragma once

#include <string>

#include "crowdforge/rulelang/ast.hpp"

namespace crowdforge::rulelang {

// Serializes back to rule-file source. Guaranteed to re-parse to a
// structurally identical RuleFile (round-trip).
std::string printRuleFile(const RuleFile& file);
std::string printExpr(const Expr& expr);

// Canonical decimal formatting used by the printer and artifact writers:
// shortest fixed-notation string that round-trips.
std::string formatDouble(double v);

}  // namespace crowdforge::rulelang
