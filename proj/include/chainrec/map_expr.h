#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "chainrec/interval.h"

namespace chainrec {

// Immutable polynomial expression in one complex variable z.
//
// Grammar (whitespace-insensitive):
//   expr   := term (('+' | '-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' uint)?
//   atom   := 'z' | number | 'i' | '(' expr ')'
//
// A product whose left operand is a real literal parses as Scale(c, rhs).
class MapExpr {
 public:
  enum class Kind { kVar, kConst, kAdd, kSub, kMul, kPow, kScale };

  struct Node {
    Kind kind;
    Point value{};            // kConst
    double factor = 0.0;      // kScale
    std::uint64_t exponent = 0;  // kPow
    std::shared_ptr<const Node> lhs;  // operand of kPow / kScale, left of binary ops
    std::shared_ptr<const Node> rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  static MapExpr var();
  static MapExpr constant(Point c);
  static MapExpr add(const MapExpr& a, const MapExpr& b);
  static MapExpr sub(const MapExpr& a, const MapExpr& b);
  static MapExpr mul(const MapExpr& a, const MapExpr& b);
  static MapExpr pow(const MapExpr& base, std::uint64_t exponent);
  static MapExpr scaled(double factor, const MapExpr& e);

  const Node& root() const { return *root_; }
  Kind kind() const { return root_->kind; }

  friend bool operator==(const MapExpr& a, const MapExpr& b);

 private:
  explicit MapExpr(NodePtr root) : root_(std::move(root)) {}
  NodePtr root_;
};

// Throws ParseError carrying the byte offset of the first offending token.
MapExpr parse_map_expr(std::string_view source);

// Canonical text; parse_map_expr(to_string(e)) == e for every parsed e.
std::string to_string(const MapExpr& e);

Point eval_point(const MapExpr& e, Point p);

// Rigorous enclosure of { e(p) : p in b } with outward rounding.
IntervalBox2 eval_box(const MapExpr& e, const IntervalBox2& b);

}  // namespace chainrec
