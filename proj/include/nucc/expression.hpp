#pragma once

#include <memory>
#include <string>

namespace nucc::expr {

class Node {
 public:
  virtual ~Node() = default;
  virtual double eval(double t) const = 0;
};

using NodePtr = std::shared_ptr<const Node>;

// A scalar function of t parsed from the grammar documented in
// docs/formats.md (+ - * /, ^ with nonnegative integer exponent, sin, cos,
// exp, the variable t, numeric literals). Keeps its source text so system
// specs serialize back verbatim.
class ScalarFn {
 public:
  ScalarFn() = default;

  double operator()(double t) const { return root_->eval(t); }
  const std::string& source() const { return source_; }
  bool valid() const { return root_ != nullptr; }

  // Throws SchemaError with a position marker on syntax errors.
  static ScalarFn parse(const std::string& text);

 private:
  NodePtr root_;
  std::string source_;
};

}  // namespace nucc::expr
