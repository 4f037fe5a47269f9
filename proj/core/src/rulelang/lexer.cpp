#include <cctype>

#include "crowdforge/rulelang/token.hpp"

namespace crowdforge::rulelang {

namespace {

bool isIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool isIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
  public:
    Lexer(const std::string& src, std::string file) : src_(src), file_(std::move(file)) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skipSpaceAndComments();
            if (eof()) break;
            out.push_back(next());
        }
        out.push_back({TokenKind::End, pos(), "", 0.0});
        return out;
    }

  private:
    bool eof() const { return i_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const {
        return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
    }
    char advance() {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }
    SourcePos pos() const { return {line_, col_}; }

    void skipSpaceAndComments() {
        while (!eof()) {
            char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    [[noreturn]] void fail(const std::string& msg, SourcePos at) {
        throw ParseError(msg, at, file_);
    }

    Token make(TokenKind k, SourcePos at) { return {k, at, "", 0.0}; }

    Token next() {
        SourcePos at = pos();
        char c = advance();
        switch (c) {
            case '(': return make(TokenKind::LParen, at);
            case ')': return make(TokenKind::RParen, at);
            case '{': return make(TokenKind::LBrace, at);
            case '}': return make(TokenKind::RBrace, at);
            case '[': return make(TokenKind::LBracket, at);
            case ']': return make(TokenKind::RBracket, at);
            case ',': return make(TokenKind::Comma, at);
            case ':': return make(TokenKind::Colon, at);
            case '|':
                if (peek() == '|') { advance(); return make(TokenKind::OrOr, at); }
                return make(TokenKind::Pipe, at);
            case '*': return make(TokenKind::Star, at);
            case '~': return make(TokenKind::Tilde, at);
            case '\'': return make(TokenKind::Quote, at);
            case '@': return make(TokenKind::At, at);
            case '+': return make(TokenKind::Plus, at);
            case '/': return make(TokenKind::Slash, at);
            case '=':
                if (peek() == '=') { advance(); return make(TokenKind::EqEq, at); }
                return make(TokenKind::Assign, at);
            case '!':
                if (peek() == '=') { advance(); return make(TokenKind::Ne, at); }
                return make(TokenKind::Bang, at);
            case '<':
                if (peek() == '=') { advance(); return make(TokenKind::Le, at); }
                return make(TokenKind::Lt, at);
            case '>':
                if (peek() == '=') { advance(); return make(TokenKind::Ge, at); }
                return make(TokenKind::Gt, at);
            case '&':
                if (peek() == '&') { advance(); return make(TokenKind::AndAnd, at); }
                fail("stray '&'", at);
            case '-':
                // '->' and '-->' are both rule arrows.
                if (peek() == '-' && peek(1) == '>') {
                    advance();
                    advance();
                    return make(TokenKind::Arrow, at);
                }
                if (peek() == '>') {
                    advance();
                    return make(TokenKind::Arrow, at);
                }
                return make(TokenKind::Minus, at);
            case '"': return lexString(at);
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return lexNumber(at, c);
        if (isIdentStart(c)) return lexIdent(at, c);
        fail(std::string("unexpected character '") + c + "'", at);
    }

    Token lexString(SourcePos at) {
        std::string value;
        for (;;) {
            if (eof()) fail("unterminated string literal", at);
            char c = advance();
            if (c == '"') break;
            if (c == '\n') fail("newline in string literal", at);
            if (c == '\\') {
                if (eof()) fail("unterminated string literal", at);
                char e = advance();
                if (e == '"' || e == '\\') value.push_back(e);
                else fail("unknown escape in string literal", at);
            } else {
                value.push_back(c);
            }
        }
        Token t{TokenKind::String, at, value, 0.0};
        return t;
    }

    Token lexNumber(SourcePos at, char first) {
        std::string digits(1, first);
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) digits.push_back(advance());
        if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            digits.push_back(advance());
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) digits.push_back(advance());
        }
        double value = std::stod(digits);
        // Time suffix: h/m/s directly after the digits, not part of a longer word.
        char s = peek();
        if ((s == 'h' || s == 'm' || s == 's') && !isIdentChar(peek(1))) {
            advance();
            if (s == 'h') value *= 3600.0;
            else if (s == 'm') value *= 60.0;
        } else if (isIdentStart(s)) {
            fail("identifier cannot start with a digit", at);
        }
        Token t{TokenKind::Number, at, "", value};
        return t;
    }

    Token lexIdent(SourcePos at, char first) {
        std::string name(1, first);
        for (;;) {
            char c = peek();
            if (isIdentChar(c)) {
                name.push_back(advance());
            } else if (c == '.' && isIdentStart(peek(1))) {
                // Dotted names: person.id, lot.blockX.
                name.push_back(advance());
            } else {
                break;
            }
        }
        Token t{TokenKind::Ident, at, name, 0.0};
        return t;
    }

    const std::string& src_;
    std::string file_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(const std::string& source, const std::string& file) {
    return Lexer(source, file).run();
}

}  // namespace crowdforge::rulelang
