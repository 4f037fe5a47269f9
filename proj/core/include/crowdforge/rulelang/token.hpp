#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crowdforge::rulelang {

struct SourcePos {
    int line = 0;  // 1-based
    int col = 0;   // 1-based
};

inline std::string toString(const SourcePos& p) {
    return std::to_string(p.line) + ":" + std::to_string(p.col);
}

// Raised by the lexer, parser and loader. `pos` is a position in the file
// named by `file` (empty when parsing from a bare string).
class ParseError : public std::runtime_error {
  public:
    ParseError(std::string message, SourcePos pos, std::string file = "")
        : std::runtime_error((file.empty() ? "" : file + ":") + toString(pos) + ": " + message),
          pos_(pos),
          file_(std::move(file)) {}
    SourcePos pos() const { return pos_; }
    const std::string& file() const { return file_; }

  private:
    SourcePos pos_;
    std::string file_;
};

enum class TokenKind {
    End,
    Ident,
    Number,
    String,
    At,        // @
    Arrow,     // -> or -->
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Pipe,
    Star,
    Tilde,
    Quote,     // '
    Assign,    // =
    Plus,
    Minus,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Bang,
};

struct Token {
    TokenKind kind = TokenKind::End;
    SourcePos pos;
    std::string text;    // Ident and String payload
    double number = 0.0; // Number payload, time suffixes already applied
};

// Tokenizes `source`. Throws ParseError on malformed input.
std::vector<Token> tokenize(const std::string& source, const std::string& file = "");

}  // namespace crowdforge::rulelang
