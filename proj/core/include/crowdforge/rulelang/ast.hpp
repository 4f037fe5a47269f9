#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crowdforge/rulelang/token.hpp"

namespace crowdforge::rulelang {

enum class BinOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or };
enum class UnOp { Neg, Not, Rel };  // Rel is the ' prefix (scope-relative value)

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Number, String, Bool, Var, Unary, Binary, Call };
    Kind kind = Kind::Number;
    SourcePos pos;

    double number = 0.0;      // Number
    std::string text;         // String value, Var name, Call callee
    bool boolean = false;     // Bool
    UnOp unOp = UnOp::Neg;    // Unary
    BinOp binOp = BinOp::Add; // Binary
    std::vector<ExprPtr> args;  // Unary: [x]; Binary: [lhs, rhs]; Call: arguments

    static ExprPtr makeNumber(double v, SourcePos p = {});
    static ExprPtr makeString(std::string s, SourcePos p = {});
    static ExprPtr makeBool(bool b, SourcePos p = {});
    static ExprPtr makeVar(std::string name, SourcePos p = {});
    static ExprPtr makeUnary(UnOp op, ExprPtr x, SourcePos p = {});
    static ExprPtr makeBinary(BinOp op, ExprPtr l, ExprPtr r, SourcePos p = {});
    static ExprPtr makeCall(std::string callee, std::vector<ExprPtr> args, SourcePos p = {});
};

bool structuralEquals(const Expr& a, const Expr& b);

// One entry of a selector block: `~2: Shop` / `front: Facade` / `true: Rule`.
struct SuccessorItem;
struct SelectorCase {
    bool relative = false;  // '~' size prefix (split blocks only)
    ExprPtr selector;
    std::vector<SuccessorItem> items;
};

// One element of a rule successor.
struct SuccessorItem {
    enum class Kind {
        Call,       // rule call or operation, optionally with a selector block
        CaseGuard,  // case <expr>:
        ElseGuard,  // else:
        Group,      // [ ... ]
    };
    Kind kind = Kind::Call;
    SourcePos pos;

    // Call
    std::string name;
    std::vector<ExprPtr> args;
    bool hasParens = false;
    bool hasBlock = false;
    bool repeats = false;  // `{...}*`
    std::vector<SelectorCase> block;

    // CaseGuard
    ExprPtr condition;

    // Group
    std::vector<SuccessorItem> items;
};

bool structuralEquals(const SuccessorItem& a, const SuccessorItem& b);

struct Annotation {
    std::string name;                // "StartRule" | "Object"
    std::optional<std::string> arg;  // Object tag
    SourcePos pos;
};

struct Rule {
    std::string name;
    std::vector<std::string> params;
    std::vector<Annotation> annotations;
    std::vector<SuccessorItem> successor;
    SourcePos pos;

    bool isStart() const;
    std::optional<std::string> objectTag() const;
};

struct Attribute {
    std::string name;
    ExprPtr value;
    SourcePos pos;
};

struct RuleFile {
    std::string sourceFile;  // path of the root file, informational
    std::vector<std::string> imports;
    std::vector<Attribute> attributes;
    std::vector<Rule> rules;
    std::string startRule;  // resolved start rule name, may be empty

    const Rule* findRule(const std::string& name) const;
    const Attribute* findAttribute(const std::string& name) const;
};

bool structuralEquals(const RuleFile& a, const RuleFile& b);

}  // namespace crowdforge::rulelang
