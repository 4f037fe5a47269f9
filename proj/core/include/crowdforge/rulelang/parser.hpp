#pragma once

#include <string>

#include "crowdforge/rulelang/ast.hpp"

namespace crowdforge::rulelang {

// Parses a single rule file from source text. Imports are recorded but not
// resolved (see loader.hpp). Throws ParseError with position info.
RuleFile parseRuleFile(const std::string& source, const std::string& file = "");

// Parses a standalone expression, e.g. a --define override value.
ExprPtr parseExpression(const std::string& source, const std::string& file = "");

}  // namespace crowdforge::rulelang
