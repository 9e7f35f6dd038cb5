#include "dsl.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace velmat::dsl {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

struct FunctionInfo {
  std::string_view name;
  Function f;
  int arity;
};

constexpr std::array<FunctionInfo, 11> kFunctions{{
    {"sin", Function::sin, 1},
    {"cos", Function::cos, 1},
    {"tan", Function::tan, 1},
    {"exp", Function::exp, 1},
    {"log", Function::log, 1},
    {"sqrt", Function::sqrt, 1},
    {"abs", Function::abs, 1},
    {"tanh", Function::tanh, 1},
    {"min", Function::min, 2},
    {"max", Function::max, 2},
    {"pow", Function::pow, 2},
}};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return &f;
  return nullptr;
}

const FunctionInfo& info(Function f) {
  for (const auto& i : kFunctions)
    if (i.f == f) return i;
  throw std::logic_error("unknown function id");
}

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t offset;  // 0-based
  double number = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Tok::end, {}, start};
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number(start);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      return {Tok::ident, src_.substr(start, pos_ - start), start};
    }
    ++pos_;
    switch (c) {
      case '+': return {Tok::plus, src_.substr(start, 1), start};
      case '-': return {Tok::minus, src_.substr(start, 1), start};
      case '*': return {Tok::star, src_.substr(start, 1), start};
      case '/': return {Tok::slash, src_.substr(start, 1), start};
      case '^': return {Tok::caret, src_.substr(start, 1), start};
      case '(': return {Tok::lparen, src_.substr(start, 1), start};
      case ')': return {Tok::rparen, src_.substr(start, 1), start};
      case ',': return {Tok::comma, src_.substr(start, 1), start};
      default: break;
    }
    throw ParseError(start + 1, {"number", "identifier", "operator", "(", ")"},
                     std::string("unexpected character '") + c + "'");
  }

 private:
  Token lex_number(std::size_t start) {
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t nd = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) throw ParseError(start + 1, {"digit"}, "malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      // Only treat as exponent when digits follow; "2e" stays a syntax error
      // at the identifier.
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    const std::string_view text = src_.substr(start, pos_ - start);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw ParseError(start + 1, {"number"}, "malformed number '" + std::string(text) + "'");
    Token t{Tok::number, text, start};
    t.number = v;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

NodePtr binary(NodeKind k, NodePtr l, NodePtr r) {
  Node n;
  n.kind = k;
  n.children = {std::move(l), std::move(r)};
  return make(std::move(n));
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { advance(); }

  NodePtr parse_all() {
    NodePtr e = expr();
    if (tok_.kind != Tok::end)
      fail({"+", "-", "*", "/", "^", "end of input"}, "unexpected token '" + std::string(tok_.text) + "'");
    return e;
  }

 private:
  void advance() { tok_ = lex_.next(); }

  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& what) {
    std::string msg = "syntax error at offset " + std::to_string(tok_.offset + 1) + ": " + what;
    if (!expected.empty()) msg += " (expected one of: " + join(expected) + ")";
    throw ParseError(tok_.offset + 1, std::move(expected), msg);
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (tok_.kind == Tok::plus || tok_.kind == Tok::minus) {
      const NodeKind k = tok_.kind == Tok::plus ? NodeKind::add : NodeKind::sub;
      advance();
      lhs = binary(k, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (tok_.kind == Tok::star || tok_.kind == Tok::slash) {
      const NodeKind k = tok_.kind == Tok::star ? NodeKind::mul : NodeKind::div;
      advance();
      lhs = binary(k, lhs, unary());
    }
    return lhs;
  }

  NodePtr unary() {
    if (tok_.kind == Tok::minus) {
      advance();
      Node n;
      n.kind = NodeKind::negate;
      n.children = {unary()};
      return make(std::move(n));
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (tok_.kind == Tok::caret) {
      advance();
      return binary(NodeKind::pow, base, unary());
    }
    return base;
  }

  NodePtr atom() {
    switch (tok_.kind) {
      case Tok::number: {
        Node n;
        n.kind = NodeKind::number;
        n.value = tok_.number;
        advance();
        return make(std::move(n));
      }
      case Tok::lparen: {
        advance();
        NodePtr inner = expr();
        if (tok_.kind != Tok::rparen) fail({")", "+", "-", "*", "/", "^"}, "unbalanced parenthesis");
        advance();
        return inner;
      }
      case Tok::ident: return identifier();
      default: break;
    }
    fail({"number", "identifier", "(", "-"},
         tok_.kind == Tok::end ? std::string("unexpected end of input")
                               : "unexpected token '" + std::string(tok_.text) + "'");
  }

  NodePtr identifier() {
    const Token id = tok_;
    advance();
    const std::string name(id.text);
    if (tok_.kind == Tok::lparen) {
      const FunctionInfo* f = find_function(name);
      if (!f) {
        tok_ = id;
        fail({}, "unknown function '" + name + "'");
      }
      advance();
      Node n;
      n.kind = NodeKind::call;
      n.function = f->f;
      n.name = name;
      n.children.push_back(expr());
      while (tok_.kind == Tok::comma) {
        advance();
        n.children.push_back(expr());
      }
      if (tok_.kind != Tok::rparen) fail({",", ")"}, "unterminated argument list");
      if (static_cast<int>(n.children.size()) != f->arity) {
        tok_ = id;
        fail({}, "function '" + name + "' takes " + std::to_string(f->arity) + " argument(s), got " +
                     std::to_string(n.children.size()));
      }
      advance();
      return make(std::move(n));
    }
    if (find_function(name)) {
      fail({"("}, "function '" + name + "' used without arguments");
    }
    if (name == "x" || name == "y" || name == "z") {
      Node n;
      n.kind = NodeKind::variable;
      n.index = name[0] - 'x';
      n.name = name;
      return make(std::move(n));
    }
    if (name == "pi" || name == "e") {
      Node n;
      n.kind = NodeKind::constant;
      n.value = name == "pi" ? std::numbers::pi : std::numbers::e;
      n.name = name;
      return make(std::move(n));
    }
    tok_ = id;
    fail({}, "unknown identifier '" + name + "'");
  }

  Lexer lex_;
  Token tok_{Tok::end, {}, 0};
};

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::number: {
      std::array<char, 64> buf{};
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
      out.append(buf.data(), res.ptr);
      return;
    }
    case NodeKind::variable:
    case NodeKind::constant: out += n.name; return;
    case NodeKind::negate:
      out += "(-";
      print_node(*n.children[0], out);
      out += ')';
      return;
    case NodeKind::call:
      out += function_name(n.function);
      out += '(';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        print_node(*n.children[i], out);
      }
      out += ')';
      return;
    default: break;
  }
  const char* op = n.kind == NodeKind::add ? " + "
                   : n.kind == NodeKind::sub ? " - "
                   : n.kind == NodeKind::mul ? " * "
                   : n.kind == NodeKind::div ? " / "
                                             : " ^ ";
  out += '(';
  print_node(*n.children[0], out);
  out += op;
  print_node(*n.children[1], out);
  out += ')';
}

std::string text_of(const Node& n) {
  std::string s;
  print_node(n, s);
  return s;
}

double checked(double v, const Node& n, std::span<const double> point, const char* reason) {
  if (!std::isfinite(v)) throw EvalError(text_of(n), {point.begin(), point.end()}, reason);
  return v;
}

double eval_node(const Node& n, std::span<const double> p) {
  switch (n.kind) {
    case NodeKind::number:
    case NodeKind::constant: return n.value;
    case NodeKind::variable:
      if (static_cast<std::size_t>(n.index) >= p.size())
        throw EvalError(n.name, {p.begin(), p.end()},
                        "variable '" + n.name + "' not available in " + std::to_string(p.size()) + "-D evaluation");
      return p[n.index];
    case NodeKind::negate: return -eval_node(*n.children[0], p);
    case NodeKind::add: return checked(eval_node(*n.children[0], p) + eval_node(*n.children[1], p), n, p, "overflow");
    case NodeKind::sub: return checked(eval_node(*n.children[0], p) - eval_node(*n.children[1], p), n, p, "overflow");
    case NodeKind::mul: return checked(eval_node(*n.children[0], p) * eval_node(*n.children[1], p), n, p, "overflow");
    case NodeKind::div: {
      const double a = eval_node(*n.children[0], p);
      const double b = eval_node(*n.children[1], p);
      if (b == 0.0) throw EvalError(text_of(n), {p.begin(), p.end()}, "division by zero");
      return checked(a / b, n, p, "overflow");
    }
    case NodeKind::pow: break;
    case NodeKind::call: break;
  }
  if (n.kind == NodeKind::pow || (n.kind == NodeKind::call && n.function == Function::pow)) {
    const double b = eval_node(*n.children[0], p);
    const double x = eval_node(*n.children[1], p);
    if (b < 0.0 && std::trunc(x) != x)
      throw EvalError(text_of(n), {p.begin(), p.end()}, "negative base with non-integer exponent");
    if (b == 0.0 && x < 0.0) throw EvalError(text_of(n), {p.begin(), p.end()}, "zero to a negative power");
    return checked(std::pow(b, x), n, p, "overflow");
  }
  const double a = eval_node(*n.children[0], p);
  switch (n.function) {
    case Function::sin: return std::sin(a);
    case Function::cos: return std::cos(a);
    case Function::tan: return checked(std::tan(a), n, p, "pole");
    case Function::exp: return checked(std::exp(a), n, p, "overflow");
    case Function::log:
      if (a <= 0.0) throw EvalError(text_of(n), {p.begin(), p.end()}, "log of a non-positive number");
      return std::log(a);
    case Function::sqrt:
      if (a < 0.0) throw EvalError(text_of(n), {p.begin(), p.end()}, "sqrt of a negative number");
      return std::sqrt(a);
    case Function::abs: return std::abs(a);
    case Function::tanh: return std::tanh(a);
    case Function::min: return std::min(a, eval_node(*n.children[1], p));
    case Function::max: return std::max(a, eval_node(*n.children[1], p));
    case Function::pow: break;
  }
  throw std::logic_error("unhandled function");
}

int max_var(const Node& n) {
  int m = n.kind == NodeKind::variable ? n.index + 1 : 0;
  for (const auto& c : n.children) m = std::max(m, max_var(*c));
  return m;
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message)
    : Error(ErrorCode::scenario, message), offset_(offset), expected_(std::move(expected)) {}

namespace {
std::string eval_message(const std::string& subexpr, const std::vector<double>& point, const std::string& reason) {
  std::ostringstream os;
  os.precision(17);
  os << "domain error in '" << subexpr << "' at (";
  for (std::size_t i = 0; i < point.size(); ++i) os << (i ? ", " : "") << point[i];
  os << "): " << reason;
  return os.str();
}
}  // namespace

EvalError::EvalError(const std::string& subexpr, std::vector<double> point, const std::string& reason)
    : DomainError(eval_message(subexpr, point, reason)), subexpr_(subexpr), point_(std::move(point)) {}

int Expr::arity() const { return root_ ? max_var(*root_) : 0; }

Expr parse(std::string_view src) {
  Parser p(src);
  return Expr(p.parse_all(), std::string(src));
}

double eval(const Expr& e, std::span<const double> point) {
  if (!e.root()) throw std::invalid_argument("eval on empty expression");
  return eval_node(*e.root(), point);
}

std::string print(const Expr& e) { return e.root() ? text_of(*e.root()) : std::string(); }

bool same_tree(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  switch (a.kind) {
    case NodeKind::number:
      if (std::bit_cast<std::uint64_t>(a.value) != std::bit_cast<std::uint64_t>(b.value)) return false;
      break;
    case NodeKind::variable:
    case NodeKind::constant:
      if (a.name != b.name) return false;
      break;
    case NodeKind::call:
      if (a.function != b.function) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!same_tree(*a.children[i], *b.children[i])) return false;
  return true;
}

std::string_view function_name(Function f) { return info(f).name; }

}  // namespace velmat::dsl
