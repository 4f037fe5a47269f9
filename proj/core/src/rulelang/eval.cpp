#include "crowdforge/rulelang/eval.hpp"

namespace crowdforge::rulelang {

namespace {

[[noreturn]] void typeError(const char* what, const Value& got, SourcePos pos) {
    throw EvalError(std::string("expected ") + what + ", got " + got.kindName() + " (" +
                        got.toString() + ")",
                    pos);
}

double asNumber(const Value& v, SourcePos pos) {
    if (!v.isNumber()) typeError("a number", v, pos);
    return v.number;
}

bool asBool(const Value& v, SourcePos pos) {
    if (!v.isBool()) typeError("a boolean", v, pos);
    return v.boolean;
}

}  // namespace

Value evaluate(const Expr& e, Env& env) {
    switch (e.kind) {
        case Expr::Kind::Number: return Value::makeNumber(e.number);
        case Expr::Kind::String: return Value::makeText(e.text);
        case Expr::Kind::Bool: return Value::makeBool(e.boolean);
        case Expr::Kind::Var: {
            auto v = env.lookup(e.text);
            if (!v) throw EvalError("unknown name '" + e.text + "'", e.pos);
            return *v;
        }
        case Expr::Kind::Unary: {
            if (e.unOp == UnOp::Rel)
                throw EvalError("scope-relative value (') is only valid inside t()", e.pos);
            Value v = evaluate(*e.args[0], env);
            if (e.unOp == UnOp::Neg) return Value::makeNumber(-asNumber(v, e.pos));
            return Value::makeBool(!asBool(v, e.pos));
        }
        case Expr::Kind::Binary: {
            // Short-circuit logicals first.
            if (e.binOp == BinOp::And) {
                if (!asBool(evaluate(*e.args[0], env), e.pos)) return Value::makeBool(false);
                return Value::makeBool(asBool(evaluate(*e.args[1], env), e.pos));
            }
            if (e.binOp == BinOp::Or) {
                if (asBool(evaluate(*e.args[0], env), e.pos)) return Value::makeBool(true);
                return Value::makeBool(asBool(evaluate(*e.args[1], env), e.pos));
            }
            Value l = evaluate(*e.args[0], env);
            Value r = evaluate(*e.args[1], env);
            switch (e.binOp) {
                case BinOp::Eq: return Value::makeBool(l.equals(r));
                case BinOp::Ne: return Value::makeBool(!l.equals(r));
                case BinOp::Lt: return Value::makeBool(asNumber(l, e.pos) < asNumber(r, e.pos));
                case BinOp::Le: return Value::makeBool(asNumber(l, e.pos) <= asNumber(r, e.pos));
                case BinOp::Gt: return Value::makeBool(asNumber(l, e.pos) > asNumber(r, e.pos));
                case BinOp::Ge: return Value::makeBool(asNumber(l, e.pos) >= asNumber(r, e.pos));
                case BinOp::Add: return Value::makeNumber(asNumber(l, e.pos) + asNumber(r, e.pos));
                case BinOp::Sub: return Value::makeNumber(asNumber(l, e.pos) - asNumber(r, e.pos));
                case BinOp::Mul: return Value::makeNumber(asNumber(l, e.pos) * asNumber(r, e.pos));
                case BinOp::Div: {
                    double d = asNumber(r, e.pos);
                    if (d == 0.0) return Value::invalid();
                    return Value::makeNumber(asNumber(l, e.pos) / d);
                }
                default: break;
            }
            throw EvalError("bad binary operator", e.pos);
        }
        case Expr::Kind::Call: {
            std::vector<Arg> args;
            args.reserve(e.args.size());
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                Arg a;
                a.expr = e.args[i];
                a.pos = e.args[i]->pos;
                a.lazy = env.lazyParam(e.text, i);
                if (!a.lazy) a.value = evaluate(*e.args[i], env);
                args.push_back(std::move(a));
            }
            return env.call(e.text, args, e.pos);
        }
    }
    throw EvalError("bad expression", e.pos);
}

bool evaluateCondition(const Expr& expr, Env& env) {
    Value v = evaluate(expr, env);
    if (!v.isBool()) typeError("a boolean condition", v, expr.pos);
    return v.boolean;
}

double evaluateNumber(const Expr& expr, Env& env) {
    Value v = evaluate(expr, env);
    if (!v.isNumber()) typeError("a number", v, expr.pos);
    return v.number;
}

}  // namespace crowdforge::rulelang
