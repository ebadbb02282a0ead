#include "chainrec/map_expr.h"

#include <cctype>
#include <charconv>
#include <limits>
#include <system_error>

#include "chainrec/errors.h"

namespace chainrec {

namespace {

using Node = MapExpr::Node;
using Kind = MapExpr::Kind;

// Binary exponentiation shared by the point and box evaluators so that both
// perform the same sequence of squarings and products.
template <class T, class Sq, class Mul>
T power(T base, std::uint64_t n, const T& one, Sq sq, Mul mul) {
  if (n == 0) return one;
  bool have = false;
  T result = one;
  for (;;) {
    if (n & 1U) {
      result = have ? mul(result, base) : base;
      have = true;
    }
    n >>= 1U;
    if (n == 0) break;
    base = sq(base);
  }
  return result;
}

Point point_mul(Point a, Point b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

Point point_square(Point a) {
  return {a.real() * a.real() - a.imag() * a.imag(), 2.0 * (a.real() * a.imag())};
}

Point eval_node(const Node& n, Point p) {
  switch (n.kind) {
    case Kind::kVar:
      return p;
    case Kind::kConst:
      return n.value;
    case Kind::kAdd: {
      const Point a = eval_node(*n.lhs, p);
      const Point b = eval_node(*n.rhs, p);
      return {a.real() + b.real(), a.imag() + b.imag()};
    }
    case Kind::kSub: {
      const Point a = eval_node(*n.lhs, p);
      const Point b = eval_node(*n.rhs, p);
      return {a.real() - b.real(), a.imag() - b.imag()};
    }
    case Kind::kMul:
      return point_mul(eval_node(*n.lhs, p), eval_node(*n.rhs, p));
    case Kind::kScale: {
      const Point a = eval_node(*n.lhs, p);
      return {n.factor * a.real(), n.factor * a.imag()};
    }
    case Kind::kPow:
      return power(eval_node(*n.lhs, p), n.exponent, Point{1.0, 0.0}, point_square, point_mul);
  }
  return p;
}

IntervalBox2 eval_node(const Node& n, const IntervalBox2& b) {
  switch (n.kind) {
    case Kind::kVar:
      return b;
    case Kind::kConst:
      return IntervalBox2::point(n.value);
    case Kind::kAdd:
      return eval_node(*n.lhs, b) + eval_node(*n.rhs, b);
    case Kind::kSub:
      return eval_node(*n.lhs, b) - eval_node(*n.rhs, b);
    case Kind::kMul:
      return eval_node(*n.lhs, b) * eval_node(*n.rhs, b);
    case Kind::kScale:
      return scale(n.factor, eval_node(*n.lhs, b));
    case Kind::kPow: {
      auto sq = [](const IntervalBox2& x) { return square(x); };
      auto mul = [](const IntervalBox2& x, const IntervalBox2& y) { return x * y; };
      return power(eval_node(*n.lhs, b), n.exponent, IntervalBox2::point({1.0, 0.0}), sq, mul);
    }
  }
  return b;
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::kVar:
      return true;
    case Kind::kConst:
      return a.value == b.value;
    case Kind::kScale:
      return a.factor == b.factor && equal_nodes(*a.lhs, *b.lhs);
    case Kind::kPow:
      return a.exponent == b.exponent && equal_nodes(*a.lhs, *b.lhs);
    default:
      return equal_nodes(*a.lhs, *b.lhs) && equal_nodes(*a.rhs, *b.rhs);
  }
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  MapExpr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    MapExpr e = expr();
    skip_ws();
    if (pos_ < src_.size()) fail_unexpected();
    return e;
  }

 private:
  MapExpr expr() {
    MapExpr acc = term();
    for (;;) {
      skip_ws();
      if (peek('+')) {
        ++pos_;
        acc = MapExpr::add(acc, term());
      } else if (peek('-')) {
        ++pos_;
        acc = MapExpr::sub(acc, term());
      } else {
        return acc;
      }
    }
  }

  MapExpr term() {
    MapExpr acc = factor();
    for (;;) {
      skip_ws();
      if (!peek('*')) return acc;
      ++pos_;
      MapExpr rhs = factor();
      const Node& l = acc.root();
      if (l.kind == Kind::kConst && l.value.imag() == 0.0) {
        acc = MapExpr::scaled(l.value.real(), rhs);
      } else {
        acc = MapExpr::mul(acc, rhs);
      }
    }
  }

  MapExpr factor() {
    MapExpr base = atom();
    skip_ws();
    if (!peek('^')) return base;
    ++pos_;
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const bool fractional = pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' ||
                                                   src_[pos_] == 'E');
    if (start == pos_ || fractional) {
      throw ParseError("exponent must be a nonnegative integer", start);
    }
    std::uint64_t n = 0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, n);
    if (ec != std::errc{}) throw ParseError("exponent out of range", start);
    return MapExpr::pow(base, n);
  }

  MapExpr atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      MapExpr inner = expr();
      skip_ws();
      if (!peek(')')) {
        if (pos_ >= src_.size()) throw ParseError("expected ')'", pos_);
        fail_unexpected();
      }
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string_view ident = src_.substr(start, pos_ - start);
      if (ident == "z") return MapExpr::var();
      if (ident == "i") return MapExpr::constant({0.0, 1.0});
      throw ParseError("unknown identifier '" + std::string(ident) + "'", start);
    }
    fail_unexpected();
  }

  MapExpr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t from = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return pos_ - from;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      const std::size_t frac = digits();
      if (frac == 0) throw ParseError("malformed number", start);
      mantissa += frac;
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed number", start);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc{} || ptr != src_.data() + pos_ || !std::isfinite(v)) {
      throw ParseError("number out of range", start);
    }
    return MapExpr::constant({v, 0.0});
  }

  [[noreturn]] void fail_unexpected() const {
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '/') throw ParseError("division is not supported", pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  bool peek(char c) const { return pos_ < src_.size() && src_[pos_] == c; }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// --------------------------------------------------------------- printer

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

bool is_literal_atom(const Node& n) {
  return n.kind == Kind::kConst &&
         ((n.value.imag() == 0.0 && !std::signbit(n.value.real())) ||
          (n.value == Point{0.0, 1.0}));
}

int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::kAdd:
    case Kind::kSub:
      return 1;
    case Kind::kMul:
    case Kind::kScale:
      return 2;
    case Kind::kPow:
      return 3;
    case Kind::kVar:
      return 4;
    case Kind::kConst:
      return is_literal_atom(n) ? 4 : 0;
  }
  return 0;
}

void print(const Node& n, int min_prec, std::string& out);

void print_operand(const Node& n, int min_prec, std::string& out) {
  if (precedence(n) < min_prec) {
    out += '(';
    print(n, 0, out);
    out += ')';
  } else {
    print(n, min_prec, out);
  }
}

void print(const Node& n, int /*min_prec*/, std::string& out) {
  switch (n.kind) {
    case Kind::kVar:
      out += 'z';
      return;
    case Kind::kConst:
      if (n.value == Point{0.0, 1.0}) {
        out += 'i';
      } else if (n.value.imag() == 0.0) {
        out += format_number(n.value.real());
      } else {
        out += format_number(n.value.real()) + "+" + format_number(n.value.imag()) + "*i";
      }
      return;
    case Kind::kAdd:
    case Kind::kSub:
      print_operand(*n.lhs, 1, out);
      out += n.kind == Kind::kAdd ? " + " : " - ";
      print_operand(*n.rhs, 2, out);
      return;
    case Kind::kMul:
      print_operand(*n.lhs, 2, out);
      out += '*';
      print_operand(*n.rhs, 3, out);
      return;
    case Kind::kScale:
      out += format_number(n.factor);
      out += '*';
      print_operand(*n.lhs, 3, out);
      return;
    case Kind::kPow:
      print_operand(*n.lhs, 4, out);
      out += '^';
      out += std::to_string(n.exponent);
      return;
  }
}

MapExpr::NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

}  // namespace

MapExpr MapExpr::var() { return MapExpr(make({Kind::kVar, {}, 0.0, 0, nullptr, nullptr})); }

MapExpr MapExpr::constant(Point c) {
  return MapExpr(make({Kind::kConst, c, 0.0, 0, nullptr, nullptr}));
}

MapExpr MapExpr::add(const MapExpr& a, const MapExpr& b) {
  return MapExpr(make({Kind::kAdd, {}, 0.0, 0, a.root_, b.root_}));
}

MapExpr MapExpr::sub(const MapExpr& a, const MapExpr& b) {
  return MapExpr(make({Kind::kSub, {}, 0.0, 0, a.root_, b.root_}));
}

MapExpr MapExpr::mul(const MapExpr& a, const MapExpr& b) {
  return MapExpr(make({Kind::kMul, {}, 0.0, 0, a.root_, b.root_}));
}

MapExpr MapExpr::pow(const MapExpr& base, std::uint64_t exponent) {
  return MapExpr(make({Kind::kPow, {}, 0.0, exponent, base.root_, nullptr}));
}

MapExpr MapExpr::scaled(double factor, const MapExpr& e) {
  return MapExpr(make({Kind::kScale, {}, factor, 0, e.root_, nullptr}));
}

bool operator==(const MapExpr& a, const MapExpr& b) {
  return a.root_ == b.root_ || equal_nodes(*a.root_, *b.root_);
}

MapExpr parse_map_expr(std::string_view source) { return Parser(source).parse(); }

std::string to_string(const MapExpr& e) {
  std::string out;
  print(e.root(), 0, out);
  return out;
}

Point eval_point(const MapExpr& e, Point p) { return eval_node(e.root(), p); }

IntervalBox2 eval_box(const MapExpr& e, const IntervalBox2& b) { return eval_node(e.root(), b); }

}  // namespace chainrec
