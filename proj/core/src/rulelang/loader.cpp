#include "crowdforge/rulelang/loader.hpp"

#include <filesystem>
#include <functional>
#include <set>

#include "crowdforge/common/digest.hpp"
#include "crowdforge/rulelang/parser.hpp"

namespace crowdforge::rulelang {

namespace {

namespace fs = std::filesystem;

struct Merger {
    RuleFile merged;
    std::set<std::string> startCandidates;

    void add(RuleFile&& part, bool isRoot) {
        for (auto& a : part.attributes) {
            if (merged.findAttribute(a.name))
                throw ParseError("attribute '" + a.name + "' already defined by another file",
                                 a.pos, part.sourceFile);
            merged.attributes.push_back(std::move(a));
        }
        for (auto& r : part.rules) {
            if (merged.findRule(r.name))
                throw ParseError("rule '" + r.name + "' already defined by another file", r.pos,
                                 part.sourceFile);
            merged.rules.push_back(std::move(r));
        }
        if (!part.startRule.empty()) {
            if (isRoot) merged.startRule = part.startRule;
            else startCandidates.insert(part.startRule);
        }
    }

    RuleFile finish(const LoadOptions& opts, const std::string& rootName) {
        merged.sourceFile = rootName;
        if (merged.startRule.empty()) {
            if (startCandidates.size() == 1) {
                merged.startRule = *startCandidates.begin();
            } else if (startCandidates.size() > 1) {
                std::string names;
                for (const auto& n : startCandidates) names += (names.empty() ? "" : ", ") + n;
                throw ParseError("ambiguous start rule across imports (" + names +
                                     "); annotate one in the root file",
                                 {}, rootName);
            }
        }
        for (const auto& [name, text] : opts.defines) {
            bool found = false;
            for (auto& a : merged.attributes) {
                if (a.name != name) continue;
                a.value = parseExpression(text, "--define " + name);
                found = true;
                break;
            }
            if (!found)
                throw ParseError("--define target '" + name + "' is not an attribute of the file",
                                 {}, rootName);
        }
        if (!opts.startRuleOverride.empty()) {
            if (!merged.findRule(opts.startRuleOverride))
                throw ParseError("start rule '" + opts.startRuleOverride + "' not found", {},
                                 rootName);
            merged.startRule = opts.startRuleOverride;
        }
        return std::move(merged);
    }
};

}  // namespace

RuleFile loadRuleFile(const std::string& path, const LoadOptions& opts) {
    Merger merger;
    std::set<std::string> visited;

    std::function<void(const std::string&, bool)> visit = [&](const std::string& p, bool isRoot) {
        std::error_code ec;
        fs::path canon = fs::weakly_canonical(fs::path(p), ec);
        std::string key = ec ? p : canon.string();
        if (!visited.insert(key).second) return;  // include-once
        std::string text;
        try {
            text = readFileText(p);
        } catch (const std::exception& e) {
            throw ParseError(e.what(), {}, p);
        }
        RuleFile part = parseRuleFile(text, p);
        std::vector<std::string> imports = part.imports;
        merger.add(std::move(part), isRoot);
        for (const auto& imp : imports) {
            fs::path ip(imp);
            if (ip.is_relative()) ip = fs::path(p).parent_path() / ip;
            visit(ip.string(), false);
        }
    };
    visit(path, true);
    return merger.finish(opts, path);
}

RuleFile loadRuleFileFromSource(const std::string& source, const std::string& name,
                                const std::map<std::string, std::string>& imports,
                                const LoadOptions& opts) {
    Merger merger;
    std::set<std::string> visited;

    std::function<void(const std::string&, const std::string&, bool)> visit =
        [&](const std::string& text, const std::string& file, bool isRoot) {
            if (!visited.insert(file).second) return;
            RuleFile part = parseRuleFile(text, file);
            std::vector<std::string> imps = part.imports;
            merger.add(std::move(part), isRoot);
            for (const auto& imp : imps) {
                auto it = imports.find(imp);
                if (it == imports.end())
                    throw ParseError("unknown import '" + imp + "'", {}, file);
                visit(it->second, imp, false);
            }
        };
    visit(source, name, true);
    return merger.finish(opts, name);
}

}  // namespace crowdforge::rulelang
