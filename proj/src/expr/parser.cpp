#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "edgeflow/expr/expr.hpp"

namespace edgeflow::expr {

Expr Expr::num(double v) {
  Expr e;
  e.kind = Kind::number;
  e.number = v;
  return e;
}

Expr Expr::var(std::string dotted) {
  Expr e;
  e.kind = Kind::variable;
  e.name = std::move(dotted);
  return e;
}

Expr Expr::neg(Expr operand) {
  Expr e;
  e.kind = Kind::negate;
  e.args.push_back(std::move(operand));
  return e;
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = Kind::binary;
  e.op = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

Expr Expr::call(Function f, std::vector<Expr> args) {
  Expr e;
  e.kind = Kind::call;
  e.function = f;
  e.args = std::move(args);
  return e;
}

namespace {

enum class Tok { number, ident, plus, minus, star, slash, lt, le, gt, ge, eq, ne, lparen, rparen, comma, end };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= text_.size()) return {Tok::end, start, {}};
    const char c = text_[pos_];

    if (is_digit(c) || (c == '.' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]))) {
      return lex_number(start);
    }
    if (ident_start(c)) return lex_ident(start);

    auto two = [&](char second) { return pos_ + 1 < text_.size() && text_[pos_ + 1] == second; };
    auto single = [&](Tok t) {
      ++pos_;
      return Token{t, start, text_.substr(start, 1)};
    };
    auto pair = [&](Tok t) {
      pos_ += 2;
      return Token{t, start, text_.substr(start, 2)};
    };
    switch (c) {
      case '+': return single(Tok::plus);
      case '-': return single(Tok::minus);
      case '*': return single(Tok::star);
      case '/': return single(Tok::slash);
      case '(': return single(Tok::lparen);
      case ')': return single(Tok::rparen);
      case ',': return single(Tok::comma);
      case '<': return two('=') ? pair(Tok::le) : single(Tok::lt);
      case '>': return two('=') ? pair(Tok::ge) : single(Tok::gt);
      case '=':
        if (two('=')) return pair(Tok::eq);
        throw SyntaxError(start, "unexpected '=', did you mean '=='?");
      case '!':
        if (two('=')) return pair(Tok::ne);
        throw SyntaxError(start, "unexpected '!', expected '!='");
      default:
        throw SyntaxError(start, std::string("unexpected character '") + c + "'");
    }
  }

 private:
  Token lex_number(std::size_t start) {
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p >= text_.size() || !is_digit(text_[p])) throw SyntaxError(p, "expected exponent digits");
      while (p < text_.size() && is_digit(text_[p])) ++p;
      pos_ = p;
    }
    const std::string_view lexeme = text_.substr(start, pos_ - start);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
    if (ec == std::errc::result_out_of_range || !std::isfinite(value)) {
      throw SyntaxError(start, "numeric literal out of range");
    }
    if (ec != std::errc{} || ptr != lexeme.data() + lexeme.size()) {
      throw SyntaxError(start, "malformed numeric literal");
    }
    return {Tok::number, start, lexeme, value};
  }

  Token lex_ident(std::size_t start) {
    for (;;) {
      while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
      if (pos_ + 1 < text_.size() && text_[pos_] == '.' && ident_start(text_[pos_ + 1])) {
        ++pos_;
        continue;
      }
      break;
    }
    return {Tok::ident, start, text_.substr(start, pos_ - start)};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::optional<Function> function_named(std::string_view name) {
  if (name == "min") return Function::min;
  if (name == "max") return Function::max;
  if (name == "abs") return Function::abs;
  if (name == "clamp") return Function::clamp;
  if (name == "if") return Function::if_;
  return std::nullopt;
}

std::size_t arity(Function f) {
  switch (f) {
    case Function::abs: return 1;
    case Function::min:
    case Function::max: return 2;
    case Function::clamp:
    case Function::if_: return 3;
  }
  return 0;
}

std::optional<BinaryOp> comparison(Tok t) {
  switch (t) {
    case Tok::lt: return BinaryOp::lt;
    case Tok::le: return BinaryOp::le;
    case Tok::gt: return BinaryOp::gt;
    case Tok::ge: return BinaryOp::ge;
    case Tok::eq: return BinaryOp::eq;
    case Tok::ne: return BinaryOp::ne;
    default: return std::nullopt;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  Expr parse_all() {
    if (cur_.kind == Tok::end) throw SyntaxError(cur_.offset, "expected expression, got end of input");
    Expr e = parse_comparison();
    if (cur_.kind != Tok::end) {
      throw SyntaxError(cur_.offset, "expected end of input, got '" + std::string(cur_.text) + "'");
    }
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  void expect(Tok kind, const char* what) {
    if (cur_.kind != kind) {
      const std::string got = cur_.kind == Tok::end ? "end of input" : "'" + std::string(cur_.text) + "'";
      throw SyntaxError(cur_.offset, std::string("expected ") + what + ", got " + got);
    }
    advance();
  }

  Expr parse_comparison() {
    Expr lhs = parse_sum();
    while (auto op = comparison(cur_.kind)) {
      advance();
      lhs = Expr::binary(*op, std::move(lhs), parse_sum());
    }
    return lhs;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
      const BinaryOp op = cur_.kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
      advance();
      lhs = Expr::binary(op, std::move(lhs), parse_product());
    }
    return lhs;
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
      const BinaryOp op = cur_.kind == Tok::star ? BinaryOp::mul : BinaryOp::div;
      advance();
      lhs = Expr::binary(op, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  Expr parse_unary() {
    if (cur_.kind == Tok::minus) {
      advance();
      return Expr::neg(parse_unary());
    }
    return parse_primary();
  }

  Expr parse_primary() {
    switch (cur_.kind) {
      case Tok::number: {
        const double v = cur_.number;
        advance();
        return Expr::num(v);
      }
      case Tok::lparen: {
        advance();
        Expr inner = parse_comparison();
        expect(Tok::rparen, "')'");
        return inner;
      }
      case Tok::ident: {
        const Token id = cur_;
        advance();
        if (cur_.kind != Tok::lparen) return Expr::var(std::string(id.text));
        const auto fn = function_named(id.text);
        if (!fn) throw SyntaxError(id.offset, "unknown function '" + std::string(id.text) + "'");
        advance();
        std::vector<Expr> args;
        if (cur_.kind != Tok::rparen) {
          args.push_back(parse_comparison());
          while (cur_.kind == Tok::comma) {
            advance();
            args.push_back(parse_comparison());
          }
        }
        const std::size_t close = cur_.offset;
        expect(Tok::rparen, "')'");
        if (args.size() != arity(*fn)) {
          throw SyntaxError(close, std::string(id.text) + "() takes " + std::to_string(arity(*fn)) +
                                       " argument(s), got " + std::to_string(args.size()));
        }
        return Expr::call(*fn, std::move(args));
      }
      case Tok::end:
        throw SyntaxError(cur_.offset, "expected expression, got end of input");
      default:
        throw SyntaxError(cur_.offset, "expected expression, got '" + std::string(cur_.text) + "'");
    }
  }

  Lexer lexer_;
  Token cur_{Tok::end, 0, {}};
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

namespace {

const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::eq: return "==";
    case BinaryOp::ne: return "!=";
  }
  return "?";
}

const char* function_text(Function f) {
  switch (f) {
    case Function::min: return "min";
    case Function::max: return "max";
    case Function::abs: return "abs";
    case Function::clamp: return "clamp";
    case Function::if_: return "if";
  }
  return "?";
}

void print_to(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::number: {
      char buf[32];
      const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, e.number);
      (void)ec;
      if (e.number < 0 || std::signbit(e.number)) {
        // Only reachable for hand-built trees; keeps the text parseable.
        out += '(';
        out.append(buf, end);
        out += ')';
      } else {
        out.append(buf, end);
      }
      return;
    }
    case Expr::Kind::variable:
      out += e.name;
      return;
    case Expr::Kind::negate:
      out += "(-";
      print_to(e.args[0], out);
      out += ')';
      return;
    case Expr::Kind::binary:
      out += '(';
      print_to(e.args[0], out);
      out += ' ';
      out += op_text(e.op);
      out += ' ';
      print_to(e.args[1], out);
      out += ')';
      return;
    case Expr::Kind::call:
      out += function_text(e.function);
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print_to(e.args[i], out);
      }
      out += ')';
      return;
  }
}

void collect(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::variable) out.insert(e.name);
  for (const Expr& a : e.args) collect(a, out);
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  print_to(e, out);
  return out;
}

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  collect(e, out);
  return out;
}

}  // namespace edgeflow::expr
