#pragma once

// Expression language shared by Phi descriptors (variable t) and field
// descriptors (variables x1..xn, abs(x) = |x|).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'e' | 'pi' | variable | call | '(' expr ')'
//   call    := exp | log | sqrt | abs (1 arg), pow | min | max (2 args)

#include "intcond/ext.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace intcond::expr {

class ParseError : public std::runtime_error {
 public:
  ParseError(int column, const std::string& what)
      : std::runtime_error("column " + std::to_string(column) + ": " + what), column_(column) {}
  [[nodiscard]] int column() const { return column_; }

 private:
  int column_;
};

enum class Kind { Num, Const, VarT, VarX, Norm, Neg, Add, Sub, Mul, Div, Pow, Call };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Kind kind = Kind::Num;
  double value = 0.0;  // Num; Const holds its numeric value
  std::string name;    // Const / Call name
  int index = 0;       // VarX: 1-based coordinate
  std::vector<NodePtr> args;
};

/// What identifiers a descriptor may use.
struct Scope {
  bool allow_t = false;
  int dimension = 0;  // x1..xn and abs(x) allowed when > 0

  static Scope phi() { return {true, 0}; }
  static Scope field(int n) { return {false, n}; }
};

namespace detail {

inline NodePtr make(Kind k, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->args = std::move(args);
  return n;
}

inline int arity(std::string_view f) {
  if (f == "exp" || f == "log" || f == "sqrt" || f == "abs") return 1;
  if (f == "pow" || f == "min" || f == "max") return 2;
  return -1;
}

class Parser {
 public:
  Parser(std::string_view src, Scope scope) : s_(src), scope_(scope) {}

  NodePtr parse() {
    auto e = expr();
    skip();
    if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(static_cast<int>(pos_) + 1, what); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make(Kind::Add, {lhs, term()});
      else if (accept('-'))
        lhs = make(Kind::Sub, {lhs, term()});
      else
        return lhs;
    }
  }
  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make(Kind::Mul, {lhs, unary()});
      else if (accept('/'))
        lhs = make(Kind::Div, {lhs, unary()});
      else
        return lhs;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Kind::Neg, {unary()});
    return power();
  }
  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Kind::Pow, {base, unary()});
    return base;
  }

  NodePtr number() {
    const char* begin = s_.data() + pos_;
    std::size_t end = pos_;
    while (end < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.')) ++end;
    if (end < s_.size() && (s_[end] == 'e' || s_[end] == 'E')) {
      std::size_t k = end + 1;
      if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
      if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
        end = k;
        while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
      }
    }
    std::string text(begin, s_.data() + end);
    char* stop = nullptr;
    const double v = std::strtod(text.c_str(), &stop);
    if (stop != text.c_str() + text.size()) fail("malformed number '" + text + "'");
    pos_ = end;
    auto n = make(Kind::Num);
    std::const_pointer_cast<Node>(n)->value = v;
    return n;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("expected an operand");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      auto e = expr();
      expect(')');
      return e;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("expected an operand");
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string id(s_.substr(start, pos_ - start));
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') return call(id, start);
    return identifier(id, start);
  }

  NodePtr identifier(const std::string& id, std::size_t start) {
    auto fail_at = [&](const std::string& what) { throw ParseError(static_cast<int>(start) + 1, what); };
    auto n = std::const_pointer_cast<Node>(make(Kind::Num));
    if (id == "e" || id == "pi") {
      n->kind = Kind::Const;
      n->name = id;
      n->value = id == "e" ? std::numbers::e : std::numbers::pi;
      return n;
    }
    if (id == "t") {
      if (!scope_.allow_t) fail_at("unknown identifier 't' (fields use x1..xn)");
      n->kind = Kind::VarT;
      return n;
    }
    if (id.size() > 1 && id[0] == 'x' && id.find_first_not_of("0123456789", 1) == std::string::npos) {
      if (scope_.dimension == 0) fail_at("unknown identifier '" + id + "' (Phi uses t only)");
      const int k = std::stoi(id.substr(1));
      if (k < 1 || k > scope_.dimension)
        fail_at("dimension mismatch: '" + id + "' with n = " + std::to_string(scope_.dimension));
      n->kind = Kind::VarX;
      n->index = k;
      return n;
    }
    throw ParseError(static_cast<int>(start) + 1, "unknown identifier '" + id + "'");
  }

  NodePtr call(const std::string& f, std::size_t start) {
    const int want = arity(f);
    if (want < 0) throw ParseError(static_cast<int>(start) + 1, "unknown function '" + f + "'");
    expect('(');
    if (f == "abs") {
      // abs(x) is the Euclidean norm of the point
      const std::size_t save = pos_;
      skip();
      if (pos_ < s_.size() && s_[pos_] == 'x') {
        std::size_t k = pos_ + 1;
        while (k < s_.size() && std::isspace(static_cast<unsigned char>(s_[k]))) ++k;
        if (k < s_.size() && s_[k] == ')') {
          if (scope_.dimension == 0) fail("unknown identifier 'x' (Phi uses t only)");
          pos_ = k + 1;
          return make(Kind::Norm);
        }
      }
      pos_ = save;
    }
    std::vector<NodePtr> args{expr()};
    while (accept(',')) args.push_back(expr());
    if (static_cast<int>(args.size()) != want)
      fail("'" + f + "' takes " + std::to_string(want) + " argument" + (want == 1 ? "" : "s"));
    expect(')');
    auto n = std::const_pointer_cast<Node>(make(Kind::Call, std::move(args)));
    n->name = f;
    return n;
  }

  std::string_view s_;
  Scope scope_;
  std::size_t pos_ = 0;
};

inline int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::Add:
    case Kind::Sub:
      return 1;
    case Kind::Mul:
    case Kind::Div:
      return 2;
    case Kind::Neg:
      return 3;
    case Kind::Pow:
      return 4;
    default:
      return 5;
  }
}

inline void write(const Node& n, std::string& out);

inline void write_wrapped(const Node& n, bool parens, std::string& out) {
  if (parens) out += '(';
  write(n, out);
  if (parens) out += ')';
}

inline void write(const Node& n, std::string& out) {
  const int p = precedence(n);
  switch (n.kind) {
    case Kind::Num:
      out += format_double(n.value);
      return;
    case Kind::Const:
      out += n.name;
      return;
    case Kind::VarT:
      out += 't';
      return;
    case Kind::VarX:
      out += 'x' + std::to_string(n.index);
      return;
    case Kind::Norm:
      out += "abs(x)";
      return;
    case Kind::Neg:
      out += '-';
      write_wrapped(*n.args[0], precedence(*n.args[0]) < 3, out);
      return;
    case Kind::Pow:
      write_wrapped(*n.args[0], precedence(*n.args[0]) <= 4, out);
      out += '^';
      write_wrapped(*n.args[1], precedence(*n.args[1]) < 3, out);
      return;
    case Kind::Call:
      out += n.name;
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        write(*n.args[i], out);
      }
      out += ')';
      return;
    default: {
      const char* op = n.kind == Kind::Add ? " + " : n.kind == Kind::Sub ? " - " : n.kind == Kind::Mul ? "*" : "/";
      write_wrapped(*n.args[0], precedence(*n.args[0]) < p, out);
      out += op;
      write_wrapped(*n.args[1], precedence(*n.args[1]) <= p, out);
      return;
    }
  }
}

inline double apply(const Node& n, double a, double b) {
  switch (n.kind) {
    case Kind::Neg:
      return -a;
    case Kind::Add:
      return a + b;
    case Kind::Sub:
      return a - b;
    case Kind::Mul:
      // 0 * inf = 0 keeps fields like 0*(1/abs(x)) finite at the origin
      return (a == 0.0 || b == 0.0) ? 0.0 : a * b;
    case Kind::Div:
      if (b == 0.0) return a == 0.0 ? std::nan("") : std::copysign(kInf, a);
      return a / b;
    case Kind::Pow:
      return std::pow(a, b);
    default:
      break;
  }
  if (n.name == "exp") return std::exp(a);
  if (n.name == "log") return std::log(a);
  if (n.name == "sqrt") return std::sqrt(a);
  if (n.name == "abs") return std::fabs(a);
  if (n.name == "pow") return std::pow(a, b);
  if (n.name == "min") return std::min(a, b);
  return std::max(a, b);
}

template <class Leaf>
double eval(const Node& n, const Leaf& leaf) {
  switch (n.kind) {
    case Kind::Num:
    case Kind::Const:
      return n.value;
    case Kind::VarT:
    case Kind::VarX:
    case Kind::Norm:
      return leaf(n);
    default: {
      const double a = eval(*n.args[0], leaf);
      const double b = n.args.size() > 1 ? eval(*n.args[1], leaf) : 0.0;
      return apply(n, a, b);
    }
  }
}

}  // namespace detail

/// Parses `source`; throws ParseError with a 1-based column on failure.
inline NodePtr parse(std::string_view source, Scope scope) { return detail::Parser(source, scope).parse(); }

/// Text form with the fewest parentheses that reparse to the same tree.
inline std::string to_string(const Node& n) {
  std::string out;
  detail::write(n, out);
  return out;
}

/// Structural equality; numbers compare bitwise-equal as doubles.
inline bool equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.index != b.index || a.name != b.name || a.args.size() != b.args.size()) return false;
  if ((a.kind == Kind::Num || a.kind == Kind::Const) && a.value != b.value) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal(*a.args[i], *b.args[i])) return false;
  return true;
}

inline double eval_t(const Node& n, double t) {
  return detail::eval(n, [t](const Node&) { return t; });
}

inline double eval_x(const Node& n, std::span<const double> x) {
  double norm = -1.0;
  return detail::eval(n, [&](const Node& leaf) {
    if (leaf.kind == Kind::VarX) return x[static_cast<std::size_t>(leaf.index - 1)];
    if (norm < 0) norm = euclidean_norm(x);
    return norm;
  });
}

/// True iff the tree uses coordinates x1..xn (so it is not a function of |x| alone).
inline bool uses_coordinates(const Node& n) {
  if (n.kind == Kind::VarX) return true;
  for (const auto& a : n.args)
    if (uses_coordinates(*a)) return true;
  return false;
}

}  // namespace intcond::expr
