#pragma once

#include <map>
#include <string>

#include "crowdforge/rulelang/ast.hpp"

namespace crowdforge::rulelang {

struct LoadOptions {
    // Attribute overrides (--define name=value). The value text is parsed as
    // an expression. Overriding an attribute the file does not declare is an
    // error.
    std::map<std::string, std::string> defines;
    // Forces the start rule, regardless of @StartRule annotations.
    std::string startRuleOverride;
};

// Loads a rule file from disk, resolving imports (relative to the importing
// file, each file included once) and flattening everything into a single
// RuleFile. Duplicate rule or attribute names across files are errors. The
// root file's @StartRule wins over imported ones. Throws ParseError.
RuleFile loadRuleFile(const std::string& path, const LoadOptions& opts = {});

// Same, for sources already in memory (tests). `resolve` maps an import path
// to its source text.
RuleFile loadRuleFileFromSource(const std::string& source, const std::string& name,
                                const std::map<std::string, std::string>& imports = {},
                                const LoadOptions& opts = {});

}  // namespace crowdforge::rulelang
