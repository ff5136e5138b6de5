#include <cctype>
#include <cstdlib>

#include "bwc/ast.hpp"
#include "bwc/frontend.hpp"

namespace bwc::front {

namespace {

enum class Tok {
  KwInt,
  KwFor,
  Ident,
  IntLit,
  LBracket,
  RBracket,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Assign,      // =
  PlusAssign,  // +=
  PlusPlus,    // ++
  Plus,
  Minus,
  Star,
  Less,
  LessEq,
  Semi,
  Eof,
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::KwInt: return "'int'";
    case Tok::KwFor: return "'for'";
    case Tok::Ident: return "identifier";
    case Tok::IntLit: return "integer literal";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Assign: return "'='";
    case Tok::PlusAssign: return "'+='";
    case Tok::PlusPlus: return "'++'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Less: return "'<'";
    case Tok::LessEq: return "'<='";
    case Tok::Semi: return "';'";
    case Tok::Eof: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  int64_t value = 0;
  SrcLoc loc;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_ws();
    SrcLoc loc{line_, col_};
    if (pos_ >= src_.size()) return {Tok::Eof, "", 0, loc};
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        id += advance();
      if (id == "int") return {Tok::KwInt, id, 0, loc};
      if (id == "for") return {Tok::KwFor, id, 0, loc};
      return {Tok::Ident, id, 0, loc};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        num += advance();
      errno = 0;
      long long v = std::strtoll(num.c_str(), nullptr, 10);
      if (errno != 0 || v > 2147483647LL)
        throw SyntaxError(loc, "integer literal in int32 range", num);
      return {Tok::IntLit, num, v, loc};
    }
    advance();
    switch (c) {
      case '[': return {Tok::LBracket, "[", 0, loc};
      case ']': return {Tok::RBracket, "]", 0, loc};
      case '(': return {Tok::LParen, "(", 0, loc};
      case ')': return {Tok::RParen, ")", 0, loc};
      case '{': return {Tok::LBrace, "{", 0, loc};
      case '}': return {Tok::RBrace, "}", 0, loc};
      case ';': return {Tok::Semi, ";", 0, loc};
      case '*': return {Tok::Star, "*", 0, loc};
      case '-': return {Tok::Minus, "-", 0, loc};
      case '=': return {Tok::Assign, "=", 0, loc};
      case '+':
        if (peek() == '=') { advance(); return {Tok::PlusAssign, "+=", 0, loc}; }
        if (peek() == '+') { advance(); return {Tok::PlusPlus, "++", 0, loc}; }
        return {Tok::Plus, "+", 0, loc};
      case '<':
        if (peek() == '=') { advance(); return {Tok::LessEq, "<=", 0, loc}; }
        return {Tok::Less, "<", 0, loc};
      default:
        throw SyntaxError(loc, "a token", std::string(1, c));
    }
  }

private:
  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') { line_++; col_ = 1; } else { col_++; }
    return c;
  }
  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
        advance();
      if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      break;
    }
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
public:
  explicit Parser(const std::string& src) : lexer_(src) { tok_ = lexer_.next(); }

  Ast parse() {
    Ast ast;
    while (tok_.kind == Tok::KwInt) ast.decls.push_back(parse_decl());
    while (tok_.kind != Tok::Eof) ast.stmts.push_back(parse_stmt());
    if (ast.decls.empty() && ast.stmts.empty()) throw EmptyProgram();
    return ast;
  }

private:
  Token expect(Tok kind) {
    if (tok_.kind != kind) throw SyntaxError(tok_.loc, tok_name(kind), tok_.text);
    Token t = tok_;
    tok_ = lexer_.next();
    return t;
  }
  bool accept(Tok kind) {
    if (tok_.kind != kind) return false;
    tok_ = lexer_.next();
    return true;
  }

  Decl parse_decl() {
    Decl d;
    d.loc = tok_.loc;
    expect(Tok::KwInt);
    d.name = expect(Tok::Ident).text;
    if (accept(Tok::LBracket)) {
      d.array_size = expect(Tok::IntLit).value;
      expect(Tok::RBracket);
    }
    if (accept(Tok::Assign)) {
      bool neg = accept(Tok::Minus);
      int64_t v = expect(Tok::IntLit).value;
      d.init = static_cast<int32_t>(neg ? -v : v);
      d.has_init = true;
    }
    expect(Tok::Semi);
    return d;
  }

  StmtPtr parse_stmt() {
    if (tok_.kind == Tok::KwFor) return parse_for();
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::Assign;
    s->loc = tok_.loc;
    s->lhs_name = expect(Tok::Ident).text;
    if (accept(Tok::LBracket)) {
      s->lhs_index = parse_expr();
      expect(Tok::RBracket);
    }
    if (accept(Tok::PlusAssign)) {
      s->compound = true;
    } else {
      expect(Tok::Assign);
    }
    s->rhs = parse_expr();
    expect(Tok::Semi);
    return s;
  }

  StmtPtr parse_for() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::For;
    s->loc = tok_.loc;
    expect(Tok::KwFor);
    expect(Tok::LParen);
    s->header.var = expect(Tok::Ident).text;
    expect(Tok::Assign);
    s->header.init = parse_expr();
    expect(Tok::Semi);
    std::string cond_var = expect(Tok::Ident).text;
    if (cond_var != s->header.var)
      throw SyntaxError(tok_.loc, "loop condition on '" + s->header.var + "'", cond_var);
    if (accept(Tok::LessEq)) {
      s->header.bound_inclusive = true;
    } else if (accept(Tok::Less)) {
      s->header.bound_inclusive = false;
    } else {
      throw SyntaxError(tok_.loc, "'<' or '<='", tok_.text);
    }
    s->header.bound = parse_expr();
    expect(Tok::Semi);
    std::string step_var = expect(Tok::Ident).text;
    if (step_var != s->header.var)
      throw SyntaxError(tok_.loc, "loop step on '" + s->header.var + "'", step_var);
    if (accept(Tok::PlusPlus)) {
      s->header.step = 1;
    } else if (accept(Tok::PlusAssign)) {
      s->header.step = static_cast<int32_t>(expect(Tok::IntLit).value);
    } else {
      // i = i + <lit>
      expect(Tok::Assign);
      std::string base = expect(Tok::Ident).text;
      if (base != s->header.var)
        throw SyntaxError(tok_.loc, "'" + s->header.var + "' in loop step", base);
      expect(Tok::Plus);
      s->header.step = static_cast<int32_t>(expect(Tok::IntLit).value);
    }
    expect(Tok::RParen);
    expect(Tok::LBrace);
    while (tok_.kind != Tok::RBrace) s->body.push_back(parse_stmt());
    expect(Tok::RBrace);
    return s;
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    for (;;) {
      SrcLoc loc = tok_.loc;
      if (accept(Tok::Plus)) {
        e = Expr::binary(BinOp::Add, std::move(e), parse_term(), loc);
      } else if (accept(Tok::Minus)) {
        e = Expr::binary(BinOp::Sub, std::move(e), parse_term(), loc);
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    for (;;) {
      SrcLoc loc = tok_.loc;
      if (accept(Tok::Star)) {
        e = Expr::binary(BinOp::Mul, std::move(e), parse_factor(), loc);
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_factor() {
    SrcLoc loc = tok_.loc;
    if (tok_.kind == Tok::IntLit) {
      int64_t v = expect(Tok::IntLit).value;
      return Expr::int_lit(static_cast<int32_t>(v), loc);
    }
    if (accept(Tok::Minus)) {
      int64_t v = expect(Tok::IntLit).value;
      return Expr::int_lit(static_cast<int32_t>(-v), loc);
    }
    if (tok_.kind == Tok::Ident) {
      std::string name = expect(Tok::Ident).text;
      if (accept(Tok::LBracket)) {
        ExprPtr idx = parse_expr();
        expect(Tok::RBracket);
        return Expr::array_ref(std::move(name), std::move(idx), loc);
      }
      return Expr::var(std::move(name), loc);
    }
    if (accept(Tok::LParen)) {
      ExprPtr e = parse_expr();
      expect(Tok::RParen);
      return e;
    }
    throw SyntaxError(loc, "an expression", tok_.text);
  }

  Lexer lexer_;
  Token tok_;
};

}  // namespace

Ast parse_program(const std::string& source) { return Parser(source).parse(); }

}  // namespace bwc::front
