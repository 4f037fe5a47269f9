#include "crowdforge/rulelang/parser.hpp"

#include <set>

namespace crowdforge::rulelang {

namespace {

class Parser {
  public:
    Parser(std::vector<Token> tokens, std::string file)
        : toks_(std::move(tokens)), file_(std::move(file)) {}

    RuleFile parseFile() {
        RuleFile out;
        out.sourceFile = file_;
        while (!at(TokenKind::End)) {
            if (at(TokenKind::At) || atRuleHeader()) {
                out.rules.push_back(parseRule());
            } else if (at(TokenKind::Ident) && cur().text == "import" &&
                       kindAt(1) == TokenKind::String) {
                advance();
                out.imports.push_back(advance().text);
            } else if (at(TokenKind::Ident) && kindAt(1) == TokenKind::Assign) {
                Attribute a;
                a.pos = cur().pos;
                a.name = advance().text;
                advance();  // '='
                a.value = parseExpr();
                if (out.findAttribute(a.name))
                    fail("duplicate attribute '" + a.name + "'", a.pos);
                out.attributes.push_back(std::move(a));
            } else {
                fail("expected a rule, attribute or import", cur().pos);
            }
        }
        // At most one @StartRule per file; cross-file resolution happens in
        // the loader.
        for (const auto& r : out.rules) {
            if (!r.isStart()) continue;
            if (!out.startRule.empty())
                fail("multiple @StartRule annotations ('" + out.startRule + "' and '" +
                         r.name + "')",
                     r.pos);
            out.startRule = r.name;
        }
        std::set<std::string> names;
        for (const auto& r : out.rules)
            if (!names.insert(r.name).second) fail("duplicate rule '" + r.name + "'", r.pos);
        return out;
    }

    ExprPtr parseBareExpression() {
        ExprPtr e = parseExpr();
        expect(TokenKind::End, "end of expression");
        return e;
    }

  private:
    const Token& cur() const { return toks_[i_]; }
    TokenKind kindAt(std::size_t ahead) const {
        std::size_t j = i_ + ahead;
        return j < toks_.size() ? toks_[j].kind : TokenKind::End;
    }
    bool at(TokenKind k) const { return cur().kind == k; }
    bool atIdent(const char* text) const { return at(TokenKind::Ident) && cur().text == text; }
    const Token& advance() { return toks_[i_++]; }
    [[noreturn]] void fail(const std::string& msg, SourcePos pos) const {
        throw ParseError(msg, pos, file_);
    }
    const Token& expect(TokenKind k, const char* what) {
        if (!at(k)) fail(std::string("expected ") + what, cur().pos);
        return advance();
    }

    // True when the upcoming tokens form a rule header: Ident [(params)] '-->'.
    bool atRuleHeader() const {
        if (!at(TokenKind::Ident)) return false;
        std::size_t j = i_ + 1;
        if (j < toks_.size() && toks_[j].kind == TokenKind::LParen) {
            int depth = 1;
            ++j;
            while (j < toks_.size() && depth > 0) {
                if (toks_[j].kind == TokenKind::LParen) ++depth;
                else if (toks_[j].kind == TokenKind::RParen) --depth;
                else if (toks_[j].kind == TokenKind::End) return false;
                ++j;
            }
        }
        return j < toks_.size() && toks_[j].kind == TokenKind::Arrow;
    }

    // True when the current position ends the successor of the rule being
    // parsed (a new top-level construct begins).
    bool atSuccessorEnd() const {
        switch (cur().kind) {
            case TokenKind::End:
            case TokenKind::Pipe:
            case TokenKind::RBrace:
            case TokenKind::RBracket:
            case TokenKind::At:
                return true;
            default:
                break;
        }
        if (atRuleHeader()) return true;
        if (at(TokenKind::Ident) && kindAt(1) == TokenKind::Assign) return true;
        if (at(TokenKind::Ident) && cur().text == "import" && kindAt(1) == TokenKind::String)
            return true;
        return false;
    }

    Annotation parseAnnotation() {
        Annotation a;
        a.pos = cur().pos;
        expect(TokenKind::At, "'@'");
        a.name = expect(TokenKind::Ident, "annotation name").text;
        if (a.name == "StartRule") {
            if (at(TokenKind::LParen)) fail("@StartRule takes no argument", cur().pos);
        } else if (a.name == "Object") {
            expect(TokenKind::LParen, "'(' after @Object");
            a.arg = expect(TokenKind::String, "object tag string").text;
            expect(TokenKind::RParen, "')'");
        } else {
            fail("unknown annotation '@" + a.name + "'", a.pos);
        }
        return a;
    }

    Rule parseRule() {
        Rule r;
        while (at(TokenKind::At)) r.annotations.push_back(parseAnnotation());
        r.pos = cur().pos;
        r.name = expect(TokenKind::Ident, "rule name").text;
        if (at(TokenKind::LParen)) {
            advance();
            if (!at(TokenKind::RParen)) {
                for (;;) {
                    r.params.push_back(expect(TokenKind::Ident, "parameter name").text);
                    if (!at(TokenKind::Comma)) break;
                    advance();
                }
            }
            expect(TokenKind::RParen, "')'");
        }
        expect(TokenKind::Arrow, "'-->'");
        r.successor = parseItems();
        return r;
    }

    std::vector<SuccessorItem> parseItems() {
        std::vector<SuccessorItem> items;
        while (!atSuccessorEnd()) items.push_back(parseItem());
        return items;
    }

    SuccessorItem parseItem() {
        SuccessorItem it;
        it.pos = cur().pos;
        if (at(TokenKind::LBracket)) {
            advance();
            it.kind = SuccessorItem::Kind::Group;
            it.items = parseItems();
            expect(TokenKind::RBracket, "']'");
            return it;
        }
        if (atIdent("case")) {
            advance();
            it.kind = SuccessorItem::Kind::CaseGuard;
            it.condition = parseExpr();
            expect(TokenKind::Colon, "':' after case condition");
            return it;
        }
        if (atIdent("else")) {
            advance();
            it.kind = SuccessorItem::Kind::ElseGuard;
            expect(TokenKind::Colon, "':' after else");
            return it;
        }
        if (!at(TokenKind::Ident)) fail("expected a rule call or operation", cur().pos);
        it.kind = SuccessorItem::Kind::Call;
        it.name = advance().text;
        if (at(TokenKind::LParen)) {
            it.hasParens = true;
            advance();
            if (!at(TokenKind::RParen)) {
                for (;;) {
                    it.args.push_back(parseExpr());
                    if (!at(TokenKind::Comma)) break;
                    advance();
                }
            }
            expect(TokenKind::RParen, "')'");
        }
        if (at(TokenKind::LBrace)) {
            it.hasBlock = true;
            advance();
            for (;;) {
                it.block.push_back(parseSelectorCase());
                if (!at(TokenKind::Pipe)) break;
                advance();
            }
            expect(TokenKind::RBrace, "'}'");
            if (at(TokenKind::Star)) {
                advance();
                it.repeats = true;
            }
        }
        return it;
    }

    SelectorCase parseSelectorCase() {
        SelectorCase c;
        if (at(TokenKind::Tilde)) {
            advance();
            c.relative = true;
        }
        c.selector = parseExpr();
        expect(TokenKind::Colon, "':' after selector");
        c.items = parseItems();
        return c;
    }

    // Expressions ------------------------------------------------------

    ExprPtr parseExpr() { return parseOr(); }

    ExprPtr parseOr() {
        ExprPtr e = parseAnd();
        while (at(TokenKind::OrOr)) {
            SourcePos p = advance().pos;
            e = Expr::makeBinary(BinOp::Or, e, parseAnd(), p);
        }
        return e;
    }

    ExprPtr parseAnd() {
        ExprPtr e = parseCompare();
        while (at(TokenKind::AndAnd)) {
            SourcePos p = advance().pos;
            e = Expr::makeBinary(BinOp::And, e, parseCompare(), p);
        }
        return e;
    }

    ExprPtr parseCompare() {
        ExprPtr e = parseAdd();
        BinOp op;
        switch (cur().kind) {
            case TokenKind::Lt: op = BinOp::Lt; break;
            case TokenKind::Le: op = BinOp::Le; break;
            case TokenKind::Gt: op = BinOp::Gt; break;
            case TokenKind::Ge: op = BinOp::Ge; break;
            case TokenKind::EqEq: op = BinOp::Eq; break;
            case TokenKind::Ne: op = BinOp::Ne; break;
            default: return e;
        }
        SourcePos p = advance().pos;
        return Expr::makeBinary(op, e, parseAdd(), p);
    }

    ExprPtr parseAdd() {
        ExprPtr e = parseMul();
        for (;;) {
            if (at(TokenKind::Plus)) {
                SourcePos p = advance().pos;
                e = Expr::makeBinary(BinOp::Add, e, parseMul(), p);
            } else if (at(TokenKind::Minus)) {
                SourcePos p = advance().pos;
                e = Expr::makeBinary(BinOp::Sub, e, parseMul(), p);
            } else {
                return e;
            }
        }
    }

    ExprPtr parseMul() {
        ExprPtr e = parseUnary();
        for (;;) {
            if (at(TokenKind::Star)) {
                SourcePos p = advance().pos;
                e = Expr::makeBinary(BinOp::Mul, e, parseUnary(), p);
            } else if (at(TokenKind::Slash)) {
                SourcePos p = advance().pos;
                e = Expr::makeBinary(BinOp::Div, e, parseUnary(), p);
            } else {
                return e;
            }
        }
    }

    ExprPtr parseUnary() {
        if (at(TokenKind::Minus)) {
            SourcePos p = advance().pos;
            return Expr::makeUnary(UnOp::Neg, parseUnary(), p);
        }
        if (at(TokenKind::Bang)) {
            SourcePos p = advance().pos;
            return Expr::makeUnary(UnOp::Not, parseUnary(), p);
        }
        if (at(TokenKind::Quote)) {
            SourcePos p = advance().pos;
            return Expr::makeUnary(UnOp::Rel, parseUnary(), p);
        }
        return parsePrimary();
    }

    ExprPtr parsePrimary() {
        const Token& t = cur();
        switch (t.kind) {
            case TokenKind::Number: {
                advance();
                return Expr::makeNumber(t.number, t.pos);
            }
            case TokenKind::String: {
                advance();
                return Expr::makeString(t.text, t.pos);
            }
            case TokenKind::LParen: {
                advance();
                ExprPtr e = parseExpr();
                expect(TokenKind::RParen, "')'");
                return e;
            }
            case TokenKind::Ident: {
                if (t.text == "true") {
                    advance();
                    return Expr::makeBool(true, t.pos);
                }
                if (t.text == "false") {
                    advance();
                    return Expr::makeBool(false, t.pos);
                }
                advance();
                if (at(TokenKind::LParen)) {
                    advance();
                    std::vector<ExprPtr> args;
                    if (!at(TokenKind::RParen)) {
                        for (;;) {
                            args.push_back(parseExpr());
                            if (!at(TokenKind::Comma)) break;
                            advance();
                        }
                    }
                    expect(TokenKind::RParen, "')'");
                    return Expr::makeCall(t.text, std::move(args), t.pos);
                }
                return Expr::makeVar(t.text, t.pos);
            }
            default:
                fail("expected an expression", t.pos);
        }
    }

    std::vector<Token> toks_;
    std::string file_;
    std::size_t i_ = 0;
};

}  // namespace

RuleFile parseRuleFile(const std::string& source, const std::string& file) {
    return Parser(tokenize(source, file), file).parseFile();
}

ExprPtr parseExpression(const std::string& source, const std::string& file) {
    return Parser(tokenize(source, file), file).parseBareExpression();
}

}  // namespace crowdforge::rulelang
