#pragma once

#include "crowdforge/citygen/semantic_city.hpp"
#include "crowdforge/common/incidents.hpp"
#include "crowdforge/rulelang/ast.hpp"

namespace crowdforge::citygen {

struct CityGenOptions {
    int maxDepth = 64;
};

// Expands the rule file over every lot of the layout and assembles the
// semantic city. Per-lot expansion uses an RNG substream keyed on
// (seed, lot id). Recursion past maxDepth aborts that lot with an incident;
// malformed rules (unbound names, wrong arity, invalid operations) throw
// std::runtime_error.
SemanticCity generateCity(const Layout& layout, const rulelang::RuleFile& rules,
                          std::uint64_t seed, IncidentLog& incidents,
                          const CityGenOptions& options = {});

}  // namespace crowdforge::citygen
