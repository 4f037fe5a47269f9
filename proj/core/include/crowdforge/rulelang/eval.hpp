#pragma once

#include <optional>
#include <vector>

#include "crowdforge/rulelang/ast.hpp"
#include "crowdforge/rulelang/value.hpp"

namespace crowdforge::rulelang {

class EvalError : public std::runtime_error {
  public:
    EvalError(std::string message, SourcePos pos)
        : std::runtime_error(toString(pos) + ": " + message), pos_(pos) {}
    SourcePos pos() const { return pos_; }

  private:
    SourcePos pos_;
};

// A call argument. For lazy parameters (predicates, rule names) the receiver
// gets the unevaluated expression and decides when/against what to evaluate
// it; `value` is then unset.
struct Arg {
    Value value;
    ExprPtr expr;
    bool lazy = false;
    SourcePos pos;
};

// Name and function resolution is supplied by the embedding module
// (citygen, agendagen, simulation) through this interface.
class Env {
  public:
    virtual ~Env() = default;
    // nullopt when the name is unknown (distinct from a known name bound to
    // Value::invalid()).
    virtual std::optional<Value> lookup(const std::string& name) = 0;
    // True when parameter `index` of `name` is received unevaluated.
    virtual bool lazyParam(const std::string& name, std::size_t index) const {
        (void)name;
        (void)index;
        return false;
    }
    virtual Value call(const std::string& name, std::vector<Arg>& args, SourcePos pos) = 0;
};

// Evaluates an expression. Throws EvalError on type errors and unknown
// names. Division by zero yields Value::invalid().
Value evaluate(const Expr& expr, Env& env);

// Evaluates and requires a Bool result.
bool evaluateCondition(const Expr& expr, Env& env);

// Evaluates and requires a Number result.
double evaluateNumber(const Expr& expr, Env& env);

}  // namespace crowdforge::rulelang
