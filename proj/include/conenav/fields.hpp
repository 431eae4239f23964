#pragma once

// Coefficient fields given as arithmetic expressions over (t, x1..xn) and,
// optionally, direction components v0..v{m-1}.
//
// Grammar (whitelist, no user functions):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | variable | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | sqrt | abs
//
// `abs` is accepted but not smooth at 0; evaluating tensors at its kink is the
// caller's problem.

#include "conenav/core.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace conenav {

namespace detail {

enum class Op : unsigned char { push, var_t, var_x, var_v, neg, add, sub, mul, div, pow, sin, cos, exp, sqrt, abs };

struct Instr {
  Op op;
  int index = 0;
  double value = 0.0;
};

struct Node {
  Op op;
  int index = 0;
  double value = 0.0;
  std::unique_ptr<Node> lhs;
  std::unique_ptr<Node> rhs;
};

inline std::string format_number(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data());
}

class Parser {
 public:
  Parser(std::string_view src, int arity, int direction_arity)
      : src_(src), arity_(arity), direction_arity_(direction_arity) {}

  std::unique_ptr<Node> parse() {
    auto node = expr();
    skip_ws();
    if (pos_ != src_.size()) fail_syntax("unexpected trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail_syntax(const std::string& msg) const {
    throw ParseError(ParseError::Kind::syntax, pos_, "syntax error: " + msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> lhs = nullptr,
                                    std::unique_ptr<Node> rhs = nullptr) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  std::unique_ptr<Node> expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = make(Op::sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::mul, std::move(lhs), unary());
      } else if (accept('/')) {
        lhs = make(Op::div, std::move(lhs), unary());
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> unary() {
    if (accept('-')) return make(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  std::unique_ptr<Node> power() {
    auto base = primary();
    if (accept('^')) return make(Op::pow, std::move(base), unary());
    return base;
  }

  std::unique_ptr<Node> primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail_syntax("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = expr();
      if (!accept(')')) fail_syntax("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail_syntax(std::string("unexpected character '") + c + "'");
  }

  std::unique_ptr<Node> number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size()) {
      pos_ = start;
      fail_syntax("malformed number '" + text + "'");
    }
    auto n = make(Op::push);
    n->value = value;
    return n;
  }

  std::unique_ptr<Node> identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(src_.substr(start, pos_ - start));

    static constexpr std::array<std::pair<std::string_view, Op>, 5> functions{{
        {"sin", Op::sin}, {"cos", Op::cos}, {"exp", Op::exp}, {"sqrt", Op::sqrt}, {"abs", Op::abs}}};
    for (const auto& [fname, op] : functions) {
      if (name == fname) {
        if (!accept('(')) fail_syntax("expected '(' after " + name);
        auto arg = expr();
        if (!accept(')')) fail_syntax("expected ')'");
        return make(op, std::move(arg));
      }
    }

    if (name == "t") return make(Op::var_t);
    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'v') &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int k = std::stoi(name.substr(1));
      auto n = make(name[0] == 'x' ? Op::var_x : Op::var_v);
      if (name[0] == 'x') {
        if (k < 1 || k > arity_) {
          throw ParseError(ParseError::Kind::arity, start,
                           "variable '" + name + "' outside arity " + std::to_string(arity_));
        }
        n->index = k - 1;
      } else {
        if (k < 0 || k >= direction_arity_) {
          throw ParseError(ParseError::Kind::arity, start,
                           "direction variable '" + name + "' outside direction arity " +
                               std::to_string(direction_arity_));
        }
        n->index = k;
      }
      return n;
    }
    throw ParseError(ParseError::Kind::unknown_identifier, start, "unknown identifier '" + name + "'");
  }

  std::string_view src_;
  int arity_;
  int direction_arity_;
  std::size_t pos_ = 0;
};

inline void compile(const Node& n, std::vector<Instr>& code, int& depth, int& max_depth) {
  switch (n.op) {
    case Op::push:
    case Op::var_t:
    case Op::var_x:
    case Op::var_v:
      code.push_back({n.op, n.index, n.value});
      max_depth = std::max(max_depth, ++depth);
      return;
    case Op::neg:
    case Op::sin:
    case Op::cos:
    case Op::exp:
    case Op::sqrt:
    case Op::abs:
      compile(*n.lhs, code, depth, max_depth);
      code.push_back({n.op});
      return;
    default:
      compile(*n.lhs, code, depth, max_depth);
      compile(*n.rhs, code, depth, max_depth);
      code.push_back({n.op});
      --depth;
      return;
  }
}

inline std::string serialize(const Node& n) {
  switch (n.op) {
    case Op::push: {
      const std::string s = format_number(n.value);
      return n.value < 0 ? "(" + s + ")" : s;
    }
    case Op::var_t: return "t";
    case Op::var_x: return "x" + std::to_string(n.index + 1);
    case Op::var_v: return "v" + std::to_string(n.index);
    case Op::neg: return "(-" + serialize(*n.lhs) + ")";
    case Op::add: return "(" + serialize(*n.lhs) + " + " + serialize(*n.rhs) + ")";
    case Op::sub: return "(" + serialize(*n.lhs) + " - " + serialize(*n.rhs) + ")";
    case Op::mul: return "(" + serialize(*n.lhs) + " * " + serialize(*n.rhs) + ")";
    case Op::div: return "(" + serialize(*n.lhs) + " / " + serialize(*n.rhs) + ")";
    case Op::pow: return "(" + serialize(*n.lhs) + " ^ " + serialize(*n.rhs) + ")";
    case Op::sin: return "sin(" + serialize(*n.lhs) + ")";
    case Op::cos: return "cos(" + serialize(*n.lhs) + ")";
    case Op::exp: return "exp(" + serialize(*n.lhs) + ")";
    case Op::sqrt: return "sqrt(" + serialize(*n.lhs) + ")";
    case Op::abs: return "abs(" + serialize(*n.lhs) + ")";
  }
  return {};
}

inline double checked(double value, const char* what) {
  if (!std::isfinite(value)) throw DomainError(std::string("non-finite result in ") + what);
  return value;
}

}  // namespace detail

/// Parsed, immutable scalar field. Copies share the compiled program.
class FieldExpr {
 public:
  static constexpr int kMaxStack = 64;

  FieldExpr() : FieldExpr(constant(0.0)) {}

  static FieldExpr constant(double value, int arity = 0) {
    FieldExpr f(arity, 0);
    auto prog = std::make_shared<Program>();
    prog->code.push_back({detail::Op::push, 0, value});
    prog->text = detail::format_number(value);
    prog->constant = value;
    f.program_ = std::move(prog);
    return f;
  }

  /// Parse `source` with spatial arity n (variables t, x1..xn) and optional
  /// direction arity m (variables v0..v{m-1}).
  static FieldExpr parse(std::string_view source, int arity, int direction_arity = 0) {
    if (source.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      throw ParseError(ParseError::Kind::syntax, 0, "syntax error: empty expression");
    }
    if (arity < 0 || arity > 3) {
      throw ParseError(ParseError::Kind::arity, 0, "arity must be in {0,1,2,3}");
    }
    detail::Parser parser(source, arity, direction_arity);
    const auto root = parser.parse();
    FieldExpr f(arity, direction_arity);
    auto prog = std::make_shared<Program>();
    int depth = 0;
    int max_depth = 0;
    detail::compile(*root, prog->code, depth, max_depth);
    if (max_depth > kMaxStack) {
      throw ParseError(ParseError::Kind::syntax, 0, "syntax error: expression nested too deeply");
    }
    prog->text = detail::serialize(*root);
    bool has_vars = false;
    for (const auto& ins : prog->code) {
      has_vars |= ins.op == detail::Op::var_t || ins.op == detail::Op::var_x || ins.op == detail::Op::var_v;
    }
    if (!has_vars) {
      std::array<double, 1> dummy{};
      prog->constant = f.run(*prog, 0.0, std::span<const double>(dummy.data(), 0), {});
    }
    f.program_ = std::move(prog);
    return f;
  }

  int arity() const noexcept { return arity_; }
  int direction_arity() const noexcept { return direction_arity_; }
  bool is_constant() const noexcept { return program_->constant.has_value(); }

  /// Fully parenthesized text that parses back to an equivalent expression.
  const std::string& serialize() const noexcept { return program_->text; }

  double eval(double t, std::span<const double> x, std::span<const double> v = {}) const {
    if (program_->constant) return *program_->constant;
    if (static_cast<int>(x.size()) < arity_) {
      throw ValidationError("field evaluated at a point of dimension " + std::to_string(x.size()) +
                            ", arity is " + std::to_string(arity_));
    }
    if (static_cast<int>(v.size()) < direction_arity_) {
      throw ValidationError("field evaluated with too few direction components");
    }
    return run(*program_, t, x, v);
  }

  double eval(double t, const Vec& x) const {
    return eval(t, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }

  double eval(double t, const Vec& x, const Vec& v) const {
    return eval(t, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
  }

 private:
  struct Program {
    std::vector<detail::Instr> code;
    std::string text;
    std::optional<double> constant;
  };

  FieldExpr(int arity, int direction_arity) : arity_(arity), direction_arity_(direction_arity) {}

  static double run(const Program& prog, double t, std::span<const double> x, std::span<const double> v) {
    using detail::Op;
    std::array<double, kMaxStack> stack{};
    int top = -1;
    for (const auto& ins : prog.code) {
      switch (ins.op) {
        case Op::push: stack[++top] = ins.value; break;
        case Op::var_t: stack[++top] = t; break;
        case Op::var_x: stack[++top] = x[static_cast<std::size_t>(ins.index)]; break;
        case Op::var_v: stack[++top] = v[static_cast<std::size_t>(ins.index)]; break;
        case Op::neg: stack[top] = -stack[top]; break;
        case Op::add: stack[top - 1] += stack[top]; --top; break;
        case Op::sub: stack[top - 1] -= stack[top]; --top; break;
        case Op::mul: stack[top - 1] *= stack[top]; --top; break;
        case Op::div:
          if (stack[top] == 0.0) throw DomainError("division by zero");
          stack[top - 1] /= stack[top];
          --top;
          break;
        case Op::pow: {
          const double base = stack[top - 1];
          const double ex = stack[top];
          if (base < 0.0 && ex != std::floor(ex)) {
            throw DomainError("negative base raised to a non-integer power");
          }
          if (base == 0.0 && ex < 0.0) throw DomainError("division by zero in power");
          stack[top - 1] = ex == 2.0 ? base * base : std::pow(base, ex);
          --top;
          break;
        }
        case Op::sin: stack[top] = std::sin(stack[top]); break;
        case Op::cos: stack[top] = std::cos(stack[top]); break;
        case Op::exp: stack[top] = detail::checked(std::exp(stack[top]), "exp"); break;
        case Op::sqrt:
          if (stack[top] < 0.0) throw DomainError("sqrt of a negative number");
          stack[top] = std::sqrt(stack[top]);
          break;
        case Op::abs: stack[top] = std::abs(stack[top]); break;
      }
    }
    return detail::checked(stack[0], "expression");
  }

  int arity_ = 0;
  int direction_arity_ = 0;
  std::shared_ptr<const Program> program_;
};

inline FieldExpr parse_field(std::string_view source, int arity, int direction_arity = 0) {
  return FieldExpr::parse(source, arity, direction_arity);
}

inline double eval_field(const FieldExpr& f, double t, const Vec& x) { return f.eval(t, x); }

/// Vector or covector field: one expression per component.
struct VectorField {
  std::vector<FieldExpr> components;

  static VectorField constant(const Vec& value) {
    VectorField f;
    for (Eigen::Index i = 0; i < value.size(); ++i) f.components.push_back(FieldExpr::constant(value(i)));
    return f;
  }

  int size() const noexcept { return static_cast<int>(components.size()); }

  Vec eval(double t, const Vec& x) const {
    Vec out(size());
    for (int i = 0; i < size(); ++i) out(i) = components[static_cast<std::size_t>(i)].eval(t, x);
    return out;
  }
};

/// Square matrix field stored row-major.
struct MatrixField {
  int dim = 0;
  std::vector<FieldExpr> entries;

  static MatrixField constant(const Mat& value) {
    MatrixField f;
    f.dim = static_cast<int>(value.rows());
    for (int i = 0; i < f.dim; ++i) {
      for (int j = 0; j < f.dim; ++j) f.entries.push_back(FieldExpr::constant(value(i, j)));
    }
    return f;
  }

  Mat eval(double t, const Vec& x) const {
    Mat out(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        out(i, j) = entries[static_cast<std::size_t>(i * dim + j)].eval(t, x);
      }
    }
    return out;
  }
};

}  // namespace conenav
