#include "crowdforge/rulelang/ast.hpp"

#include <cmath>

namespace crowdforge::rulelang {

ExprPtr Expr::makeNumber(double v, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Number;
    e->number = v;
    e->pos = p;
    return e;
}

ExprPtr Expr::makeString(std::string s, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::String;
    e->text = std::move(s);
    e->pos = p;
    return e;
}

ExprPtr Expr::makeBool(bool b, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Bool;
    e->boolean = b;
    e->pos = p;
    return e;
}

ExprPtr Expr::makeVar(std::string name, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    e->text = std::move(name);
    e->pos = p;
    return e;
}

ExprPtr Expr::makeUnary(UnOp op, ExprPtr x, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Unary;
    e->unOp = op;
    e->args = {std::move(x)};
    e->pos = p;
    return e;
}

ExprPtr Expr::makeBinary(BinOp op, ExprPtr l, ExprPtr r, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Binary;
    e->binOp = op;
    e->args = {std::move(l), std::move(r)};
    e->pos = p;
    return e;
}

ExprPtr Expr::makeCall(std::string callee, std::vector<ExprPtr> args, SourcePos p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Call;
    e->text = std::move(callee);
    e->args = std::move(args);
    e->pos = p;
    return e;
}

bool structuralEquals(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::Number: return a.number == b.number;
        case Expr::Kind::String: return a.text == b.text;
        case Expr::Kind::Bool: return a.boolean == b.boolean;
        case Expr::Kind::Var: return a.text == b.text;
        case Expr::Kind::Unary:
            if (a.unOp != b.unOp) return false;
            break;
        case Expr::Kind::Binary:
            if (a.binOp != b.binOp) return false;
            break;
        case Expr::Kind::Call:
            if (a.text != b.text) return false;
            break;
    }
    if (a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!structuralEquals(*a.args[i], *b.args[i])) return false;
    return true;
}

namespace {

bool equalItems(const std::vector<SuccessorItem>& a, const std::vector<SuccessorItem>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!structuralEquals(a[i], b[i])) return false;
    return true;
}

}  // namespace

bool structuralEquals(const SuccessorItem& a, const SuccessorItem& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case SuccessorItem::Kind::Call: {
            if (a.name != b.name || a.hasBlock != b.hasBlock || a.repeats != b.repeats)
                return false;
            if (a.args.size() != b.args.size()) return false;
            for (std::size_t i = 0; i < a.args.size(); ++i)
                if (!structuralEquals(*a.args[i], *b.args[i])) return false;
            if (a.block.size() != b.block.size()) return false;
            for (std::size_t i = 0; i < a.block.size(); ++i) {
                const auto& ca = a.block[i];
                const auto& cb = b.block[i];
                if (ca.relative != cb.relative) return false;
                if (!structuralEquals(*ca.selector, *cb.selector)) return false;
                if (!equalItems(ca.items, cb.items)) return false;
            }
            return true;
        }
        case SuccessorItem::Kind::CaseGuard:
            return structuralEquals(*a.condition, *b.condition);
        case SuccessorItem::Kind::ElseGuard:
            return true;
        case SuccessorItem::Kind::Group:
            return equalItems(a.items, b.items);
    }
    return false;
}

bool Rule::isStart() const {
    for (const auto& a : annotations)
        if (a.name == "StartRule") return true;
    return false;
}

std::optional<std::string> Rule::objectTag() const {
    for (const auto& a : annotations)
        if (a.name == "Object") return a.arg.value_or("");
    return std::nullopt;
}

const Rule* RuleFile::findRule(const std::string& name) const {
    for (const auto& r : rules)
        if (r.name == name) return &r;
    return nullptr;
}

const Attribute* RuleFile::findAttribute(const std::string& name) const {
    for (const auto& a : attributes)
        if (a.name == name) return &a;
    return nullptr;
}

bool structuralEquals(const RuleFile& a, const RuleFile& b) {
    if (a.attributes.size() != b.attributes.size() || a.rules.size() != b.rules.size())
        return false;
    if (a.startRule != b.startRule) return false;
    for (std::size_t i = 0; i < a.attributes.size(); ++i) {
        if (a.attributes[i].name != b.attributes[i].name) return false;
        if (!structuralEquals(*a.attributes[i].value, *b.attributes[i].value)) return false;
    }
    for (std::size_t i = 0; i < a.rules.size(); ++i) {
        const Rule& ra = a.rules[i];
        const Rule& rb = b.rules[i];
        if (ra.name != rb.name || ra.params != rb.params) return false;
        if (ra.annotations.size() != rb.annotations.size()) return false;
        for (std::size_t j = 0; j < ra.annotations.size(); ++j) {
            if (ra.annotations[j].name != rb.annotations[j].name) return false;
            if (ra.annotations[j].arg != rb.annotations[j].arg) return false;
        }
        if (!equalItems(ra.successor, rb.successor)) return false;
    }
    return true;
}

}  // namespace crowdforge::rulelang
