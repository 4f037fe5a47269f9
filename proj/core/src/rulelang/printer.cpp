#include "crowdforge/rulelang/printer.hpp"

#include <charconv>
#include <sstream>

namespace crowdforge::rulelang {

std::string formatDouble(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

namespace {

// Precedence levels; larger binds tighter.
int precOf(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Binary:
            switch (e.binOp) {
                case BinOp::Or: return 1;
                case BinOp::And: return 2;
                case BinOp::Lt:
                case BinOp::Le:
                case BinOp::Gt:
                case BinOp::Ge:
                case BinOp::Eq:
                case BinOp::Ne: return 3;
                case BinOp::Add:
                case BinOp::Sub: return 4;
                case BinOp::Mul:
                case BinOp::Div: return 5;
            }
            return 0;
        case Expr::Kind::Unary: return 6;
        default: return 7;
    }
}

const char* binOpText(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::And: return "&&";
        case BinOp::Or: return "||";
    }
    return "?";
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void printExprTo(std::ostream& os, const Expr& e, int minPrec) {
    int prec = precOf(e);
    bool parens = prec < minPrec;
    if (parens) os << '(';
    switch (e.kind) {
        case Expr::Kind::Number: os << formatDouble(e.number); break;
        case Expr::Kind::String: os << quoted(e.text); break;
        case Expr::Kind::Bool: os << (e.boolean ? "true" : "false"); break;
        case Expr::Kind::Var: os << e.text; break;
        case Expr::Kind::Unary: {
            switch (e.unOp) {
                case UnOp::Neg: os << '-'; break;
                case UnOp::Not: os << '!'; break;
                case UnOp::Rel: os << '\''; break;
            }
            printExprTo(os, *e.args[0], 6);
            break;
        }
        case Expr::Kind::Binary: {
            // Left-associative: the right child needs strictly higher
            // precedence; comparisons are non-associative on both sides.
            int leftMin = prec == 3 ? prec + 1 : prec;
            printExprTo(os, *e.args[0], leftMin);
            os << ' ' << binOpText(e.binOp) << ' ';
            printExprTo(os, *e.args[1], prec + 1);
            break;
        }
        case Expr::Kind::Call: {
            os << e.text << '(';
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) os << ", ";
                printExprTo(os, *e.args[i], 0);
            }
            os << ')';
            break;
        }
    }
    if (parens) os << ')';
}

void printItemsTo(std::ostream& os, const std::vector<SuccessorItem>& items,
                  const std::string& indent);

void printItemTo(std::ostream& os, const SuccessorItem& it, const std::string& indent) {
    switch (it.kind) {
        case SuccessorItem::Kind::CaseGuard:
            os << "case ";
            printExprTo(os, *it.condition, 0);
            os << ':';
            break;
        case SuccessorItem::Kind::ElseGuard:
            os << "else:";
            break;
        case SuccessorItem::Kind::Group: {
            os << "[ ";
            for (std::size_t i = 0; i < it.items.size(); ++i) {
                if (i) os << ' ';
                printItemTo(os, it.items[i], indent);
            }
            os << " ]";
            break;
        }
        case SuccessorItem::Kind::Call: {
            os << it.name;
            if (it.hasParens || !it.args.empty()) {
                os << '(';
                for (std::size_t i = 0; i < it.args.size(); ++i) {
                    if (i) os << ", ";
                    printExprTo(os, *it.args[i], 0);
                }
                os << ')';
            }
            if (it.hasBlock) {
                os << "{ ";
                for (std::size_t i = 0; i < it.block.size(); ++i) {
                    if (i) os << " | ";
                    const SelectorCase& c = it.block[i];
                    if (c.relative) os << '~';
                    printExprTo(os, *c.selector, 0);
                    os << ": ";
                    for (std::size_t j = 0; j < c.items.size(); ++j) {
                        if (j) os << ' ';
                        printItemTo(os, c.items[j], indent);
                    }
                }
                os << " }";
                if (it.repeats) os << '*';
            }
            break;
        }
    }
}

void printItemsTo(std::ostream& os, const std::vector<SuccessorItem>& items,
                  const std::string& indent) {
    bool multiline = items.size() > 3;
    for (const auto& it : items) {
        if (it.kind == SuccessorItem::Kind::CaseGuard || it.kind == SuccessorItem::Kind::ElseGuard)
            multiline = true;
    }
    bool first = true;
    for (const auto& it : items) {
        if (multiline) {
            os << '\n' << indent;
        } else if (!first) {
            os << ' ';
        }
        printItemTo(os, it, indent + "    ");
        first = false;
    }
}

}  // namespace

std::string printExpr(const Expr& expr) {
    std::ostringstream os;
    printExprTo(os, expr, 0);
    return os.str();
}

std::string printRuleFile(const RuleFile& file) {
    std::ostringstream os;
    for (const auto& imp : file.imports) os << "import " << quoted(imp) << '\n';
    if (!file.imports.empty()) os << '\n';
    for (const auto& a : file.attributes) {
        os << a.name << " = ";
        printExprTo(os, *a.value, 0);
        os << '\n';
    }
    if (!file.attributes.empty()) os << '\n';
    for (const auto& r : file.rules) {
        for (const auto& an : r.annotations) {
            os << '@' << an.name;
            if (an.arg) os << '(' << quoted(*an.arg) << ')';
            os << '\n';
        }
        os << r.name;
        if (!r.params.empty()) {
            os << '(';
            for (std::size_t i = 0; i < r.params.size(); ++i) {
                if (i) os << ", ";
                os << r.params[i];
            }
            os << ')';
        }
        os << " -->";
        if (!r.successor.empty()) {
            os << ' ';
            printItemsTo(os, r.successor, "    ");
        }
        os << "\n\n";
    }
    return os.str();
}

}  // namespace crowdforge::rulelang
