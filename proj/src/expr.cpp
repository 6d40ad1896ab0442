#include "perorbit/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "perorbit/error.hpp"

namespace perorbit {

namespace {

struct FunctionInfo {
  std::string_view name;
  Op op;
  int arity;  // -1: one or more
};

constexpr std::array<FunctionInfo, 7> kFunctions{{
    {"sin", Op::Sin, 1},
    {"cos", Op::Cos, 1},
    {"exp", Op::Exp, 1},
    {"tanh", Op::Tanh, 1},
    {"sqrt", Op::Sqrt, 1},
    {"abs", Op::Abs, 1},
    {"norm", Op::Norm, -1},
}};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::string_view function_name(Op op) {
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  return "?";
}

int stack_effect(const Node& n) {
  switch (n.op) {
    case Op::Const:
    case Op::Var:
      return 1;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return -1;
    case Op::Norm:
      return 1 - n.arg;
    default:
      return 0;
  }
}

int arity(const Node& n) {
  switch (n.op) {
    case Op::Const:
    case Op::Var:
      return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return 2;
    case Op::Norm:
      return n.arg;
    default:
      return 1;
  }
}

bool is_integer(double v) { return std::isfinite(v) && std::nearbyint(v) == v; }

// ---------------------------------------------------------------------------
// Lexer / parser

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind = Tok::End;
  std::size_t offset = 0;
  std::string_view text;
  double number = 0.0;
};

class Parser {
 public:
  Parser(std::string_view src, const Signature& sig) : src_(src), sig_(sig) { advance(); }

  std::vector<Node> run() {
    expression();
    if (tok_.kind != Tok::End) {
      fail({"+", "-", "*", "/", "^", "end of input"});
    }
    return std::move(code_);
  }

 private:
  void advance() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
      ++pos_;
    }
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Tok::End;
      return;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_ + 1;
      while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) ++end;
      tok_.kind = Tok::Ident;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    switch (c) {
      case '+': tok_.kind = Tok::Plus; break;
      case '-': tok_.kind = Tok::Minus; break;
      case '*': tok_.kind = Tok::Star; break;
      case '/': tok_.kind = Tok::Slash; break;
      case '^': tok_.kind = Tok::Caret; break;
      case '(': tok_.kind = Tok::LParen; break;
      case ')': tok_.kind = Tok::RParen; break;
      case ',': tok_.kind = Tok::Comma; break;
      default:
        throw ParseError(pos_, {}, "unexpected character '" + std::string(1, c) + "' at offset " + std::to_string(pos_));
    }
    tok_.text = src_.substr(pos_, 1);
    ++pos_;
  }

  void lex_number() {
    std::size_t end = pos_;
    auto digits = [&] {
      std::size_t start = end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
      return end - start;
    };
    std::size_t count = digits();
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      count += digits();
    }
    if (count == 0) throw ParseError(pos_, {"number"}, "malformed number at offset " + std::to_string(pos_));
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t save = end;
      ++end;
      if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
      if (digits() == 0) {
        throw ParseError(save, {"exponent digits"}, "malformed exponent at offset " + std::to_string(save));
      }
    }
    tok_.kind = Tok::Number;
    tok_.text = src_.substr(pos_, end - pos_);
    auto [ptr, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), tok_.number);
    if (ec != std::errc{} || ptr != tok_.text.data() + tok_.text.size() || !std::isfinite(tok_.number)) {
      throw ParseError(pos_, {"number"}, "number out of range at offset " + std::to_string(pos_));
    }
    pos_ = end;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    std::string found = tok_.kind == Tok::End ? "end of input" : "'" + std::string(tok_.text) + "'";
    std::string msg = "syntax error at offset " + std::to_string(tok_.offset) + ": found " + found + ", expected one of {";
    for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? ", " : "") + expected[i];
    msg += "}";
    throw ParseError(tok_.offset, std::move(expected), msg);
  }

  void emit(Op op, std::size_t offset, int arg = 0, double value = 0.0) {
    code_.push_back(Node{op, arg, value, static_cast<std::uint32_t>(offset)});
  }

  void expression() {
    term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const Op op = tok_.kind == Tok::Plus ? Op::Add : Op::Sub;
      const std::size_t at = tok_.offset;
      advance();
      term();
      emit(op, at);
    }
  }

  void term() {
    unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const Op op = tok_.kind == Tok::Star ? Op::Mul : Op::Div;
      const std::size_t at = tok_.offset;
      advance();
      unary();
      emit(op, at);
    }
  }

  void unary() {
    if (tok_.kind == Tok::Minus) {
      const std::size_t at = tok_.offset;
      advance();
      unary();
      emit(Op::Neg, at);
      return;
    }
    power();
  }

  void power() {
    primary();
    if (tok_.kind == Tok::Caret) {
      const std::size_t at = tok_.offset;
      advance();
      unary();
      emit(Op::Pow, at);
    }
  }

  void primary() {
    switch (tok_.kind) {
      case Tok::Number:
        emit(Op::Const, tok_.offset, 0, tok_.number);
        advance();
        return;
      case Tok::LParen:
        advance();
        expression();
        if (tok_.kind != Tok::RParen) fail({")", "+", "-", "*", "/", "^"});
        advance();
        return;
      case Tok::Ident:
        identifier();
        return;
      default:
        fail({"number", "identifier", "(", "-"});
    }
  }

  void identifier() {
    const Token name = tok_;
    advance();
    if (const auto* fn = find_function(name.text)) {
      if (tok_.kind != Tok::LParen) fail({"("});
      advance();
      int args = 0;
      expression();
      ++args;
      while (tok_.kind == Tok::Comma) {
        advance();
        expression();
        ++args;
      }
      if (tok_.kind != Tok::RParen) fail({")", ","});
      advance();
      if (fn->arity > 0 && args != fn->arity) {
        throw ParseError(name.offset, {}, std::string(fn->name) + " takes " + std::to_string(fn->arity) +
                                              " argument(s), got " + std::to_string(args) + " at offset " +
                                              std::to_string(name.offset));
      }
      emit(fn->op, name.offset, fn->op == Op::Norm ? args : 0);
      return;
    }
    if (name.text == "pi") {
      emit(Op::Const, name.offset, 0, std::numbers::pi);
      return;
    }
    const auto slot = sig_.slot_of(name.text);
    if (!slot) throw UnknownIdentifier(name.offset, std::string(name.text));
    emit(Op::Var, name.offset, *slot);
  }

  std::string_view src_;
  const Signature& sig_;
  std::size_t pos_ = 0;
  Token tok_;
  std::vector<Node> code_;
};

// ---------------------------------------------------------------------------
// Evaluation

template <typename T, typename F>
T with_stack(int depth, F&& f) {
  if (depth <= 32) {
    std::array<T, 32> buf;
    return f(buf.data());
  }
  std::vector<T> buf(static_cast<std::size_t>(depth));
  return f(buf.data());
}

[[noreturn]] void domain_error(const char* operation, std::size_t node, const Node& n, const std::string& what) {
  throw DomainError(operation, node, n.offset, what);
}

}  // namespace

std::optional<int> Signature::slot_of(std::string_view name) const {
  if (name == "t") return 0;
  auto indexed = [&](char prefix, int count, int base) -> std::optional<int> {
    if (name.size() < 2 || name[0] != prefix || name[1] == '0') return std::nullopt;
    int idx = 0;
    auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
    if (ec != std::errc{} || ptr != name.data() + name.size()) return std::nullopt;
    if (idx < 1 || idx > count) return std::nullopt;
    return base + idx - 1;
  };
  if (auto s = indexed('x', k, 1)) return s;
  if (auto s = indexed('y', m, 1 + k)) return s;
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    if (parameters[i] == name) return 1 + k + m + static_cast<int>(i);
  }
  return std::nullopt;
}

std::string Signature::slot_name(int slot) const {
  if (slot == 0) return "t";
  if (slot <= k) return "x" + std::to_string(slot);
  if (slot <= k + m) return "y" + std::to_string(slot - k);
  return parameters.at(static_cast<std::size_t>(slot - 1 - k - m));
}

Expr::Expr(std::vector<Node> code, Signature signature) : code_(std::move(code)), signature_(std::move(signature)) {
  int depth = 0;
  for (const auto& n : code_) {
    if (depth < arity(n)) throw InvalidArgument("sysdsl", "Expr", "malformed postfix code");
    if (n.op == Op::Var && (n.arg < 0 || n.arg >= signature_.slot_count())) {
      throw InvalidArgument("sysdsl", "Expr", "variable slot outside signature");
    }
    if (n.op == Op::Norm && n.arg < 1) throw InvalidArgument("sysdsl", "Expr", "norm needs at least one argument");
    depth += stack_effect(n);
    max_depth_ = std::max(max_depth_, depth);
  }
  if (depth != 1) throw InvalidArgument("sysdsl", "Expr", "postfix code does not reduce to one value");
}

Expr Expr::constant(double value, Signature signature) {
  return Expr({Node{Op::Const, 0, value, 0}}, std::move(signature));
}

double Expr::eval(std::span<const double> env) const {
  return with_stack<double>(max_depth_, [&](double* st) {
    int sp = 0;
    for (std::size_t i = 0; i < code_.size(); ++i) {
      const Node& n = code_[i];
      switch (n.op) {
        case Op::Const: st[sp++] = n.value; break;
        case Op::Var: st[sp++] = env[static_cast<std::size_t>(n.arg)]; break;
        case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
        case Op::Add: --sp; st[sp - 1] += st[sp]; break;
        case Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
        case Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
        case Op::Div:
          --sp;
          if (st[sp] == 0.0) domain_error("eval", i, n, "division by zero");
          st[sp - 1] /= st[sp];
          break;
        case Op::Pow: {
          --sp;
          const double a = st[sp - 1], b = st[sp];
          if (a < 0.0 && !is_integer(b)) domain_error("eval", i, n, "negative base with non-integer exponent");
          if (a == 0.0 && b < 0.0) domain_error("eval", i, n, "zero raised to a negative power");
          st[sp - 1] = std::pow(a, b);
          break;
        }
        case Op::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
        case Op::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
        case Op::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
        case Op::Tanh: st[sp - 1] = std::tanh(st[sp - 1]); break;
        case Op::Sqrt:
          if (st[sp - 1] < 0.0) domain_error("eval", i, n, "sqrt of a negative value");
          st[sp - 1] = std::sqrt(st[sp - 1]);
          break;
        case Op::Abs: st[sp - 1] = std::fabs(st[sp - 1]); break;
        case Op::Norm: {
          double s = 0.0;
          for (int j = sp - n.arg; j < sp; ++j) s += st[j] * st[j];
          sp -= n.arg;
          st[sp++] = std::sqrt(s);
          break;
        }
      }
    }
    return st[0];
  });
}

Dual Expr::eval_dual(std::span<const double> env, int seed_slot, bool& nonsmooth) const {
  return with_stack<Dual>(max_depth_, [&](Dual* st) {
    int sp = 0;
    for (std::size_t i = 0; i < code_.size(); ++i) {
      const Node& n = code_[i];
      switch (n.op) {
        case Op::Const: st[sp++] = {n.value, 0.0}; break;
        case Op::Var:
          st[sp++] = {env[static_cast<std::size_t>(n.arg)], n.arg == seed_slot ? 1.0 : 0.0};
          break;
        case Op::Neg: st[sp - 1] = {-st[sp - 1].v, -st[sp - 1].d}; break;
        case Op::Add: --sp; st[sp - 1] = {st[sp - 1].v + st[sp].v, st[sp - 1].d + st[sp].d}; break;
        case Op::Sub: --sp; st[sp - 1] = {st[sp - 1].v - st[sp].v, st[sp - 1].d - st[sp].d}; break;
        case Op::Mul: {
          --sp;
          const Dual a = st[sp - 1], b = st[sp];
          st[sp - 1] = {a.v * b.v, a.d * b.v + a.v * b.d};
          break;
        }
        case Op::Div: {
          --sp;
          const Dual a = st[sp - 1], b = st[sp];
          if (b.v == 0.0) domain_error("jacobian", i, n, "division by zero");
          const double q = a.v / b.v;
          st[sp - 1] = {q, (a.d - q * b.d) / b.v};
          break;
        }
        case Op::Pow: {
          --sp;
          const Dual a = st[sp - 1], b = st[sp];
          if (a.v < 0.0 && !is_integer(b.v)) domain_error("jacobian", i, n, "negative base with non-integer exponent");
          if (a.v == 0.0 && b.v < 0.0) domain_error("jacobian", i, n, "zero raised to a negative power");
          const double p = std::pow(a.v, b.v);
          double d = 0.0;
          if (a.d != 0.0) d += b.v * std::pow(a.v, b.v - 1.0) * a.d;
          if (b.d != 0.0) {
            if (a.v > 0.0) {
              d += p * std::log(a.v) * b.d;
            } else if (!(a.v == 0.0 && b.v > 0.0)) {
              domain_error("jacobian", i, n, "exponent derivative undefined for a non-positive base");
            }
          }
          st[sp - 1] = {p, d};
          break;
        }
        case Op::Sin: {
          const Dual a = st[sp - 1];
          st[sp - 1] = {std::sin(a.v), std::cos(a.v) * a.d};
          break;
        }
        case Op::Cos: {
          const Dual a = st[sp - 1];
          st[sp - 1] = {std::cos(a.v), -std::sin(a.v) * a.d};
          break;
        }
        case Op::Exp: {
          const double e = std::exp(st[sp - 1].v);
          st[sp - 1] = {e, e * st[sp - 1].d};
          break;
        }
        case Op::Tanh: {
          const double th = std::tanh(st[sp - 1].v);
          st[sp - 1] = {th, (1.0 - th * th) * st[sp - 1].d};
          break;
        }
        case Op::Sqrt: {
          const Dual a = st[sp - 1];
          if (a.v < 0.0) domain_error("jacobian", i, n, "sqrt of a negative value");
          const double r = std::sqrt(a.v);
          if (r == 0.0) {
            if (a.d != 0.0) nonsmooth = true;
            st[sp - 1] = {0.0, 0.0};
          } else {
            st[sp - 1] = {r, 0.5 * a.d / r};
          }
          break;
        }
        case Op::Abs: {
          const Dual a = st[sp - 1];
          if (a.v == 0.0) {
            if (a.d != 0.0) nonsmooth = true;
            st[sp - 1] = {0.0, 0.0};
          } else {
            st[sp - 1] = {std::fabs(a.v), a.v > 0.0 ? a.d : -a.d};
          }
          break;
        }
        case Op::Norm: {
          double s = 0.0, ds = 0.0;
          for (int j = sp - n.arg; j < sp; ++j) {
            s += st[j].v * st[j].v;
            ds += st[j].v * st[j].d;
          }
          sp -= n.arg;
          const double r = std::sqrt(s);
          if (r == 0.0) {
            nonsmooth = true;
            st[sp++] = {0.0, 0.0};
          } else {
            st[sp++] = {r, ds / r};
          }
          break;
        }
      }
    }
    return st[0];
  });
}

bool Expr::depends_on(int slot) const {
  for (const auto& n : code_) {
    if (n.op == Op::Var && n.arg == slot) return true;
  }
  return false;
}

bool Expr::has_nonsmooth_nodes() const {
  for (const auto& n : code_) {
    if (n.op == Op::Abs || n.op == Op::Norm || n.op == Op::Sqrt) return true;
  }
  return false;
}

Expr Expr::bind_parameters(std::span<const double> values) const {
  if (values.size() != signature_.parameters.size()) {
    throw InvalidArgument("sysdsl", "bind_parameters", "expected " + std::to_string(signature_.parameters.size()) +
                                                           " parameter values, got " + std::to_string(values.size()));
  }
  Signature bare{signature_.k, signature_.m, {}};
  const int first_param = 1 + signature_.k + signature_.m;
  std::vector<Node> code = code_;
  for (auto& n : code) {
    if (n.op == Op::Var && n.arg >= first_param) {
      n.value = values[static_cast<std::size_t>(n.arg - first_param)];
      n.op = Op::Const;
      n.arg = 0;
    }
  }
  return Expr(std::move(code), std::move(bare));
}

Expr parse(std::string_view source, const Signature& signature) {
  if (signature.k < 0 || signature.m < 0) throw InvalidArgument("sysdsl", "parse", "negative dimension in signature");
  Parser p(source, signature);
  return Expr(p.run(), signature);
}

std::string print(const Expr& expr) {
  std::vector<std::string> st;
  char buf[64];
  for (const auto& n : expr.code()) {
    switch (n.op) {
      case Op::Const:
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        st.emplace_back(n.value < 0.0 || std::signbit(n.value) ? "(" + std::string(buf) + ")" : std::string(buf));
        break;
      case Op::Var: st.push_back(expr.signature().slot_name(n.arg)); break;
      case Op::Neg: st.back() = "(-" + st.back() + ")"; break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Pow: {
        static constexpr char sym[] = {'+', '-', '*', '/', '^'};
        const char c = sym[static_cast<int>(n.op) - static_cast<int>(Op::Add)];
        std::string b = std::move(st.back());
        st.pop_back();
        st.back() = "(" + st.back() + " " + c + " " + b + ")";
        break;
      }
      default: {
        const int args = n.op == Op::Norm ? n.arg : 1;
        std::string call = std::string(function_name(n.op)) + "(";
        for (int j = static_cast<int>(st.size()) - args; j < static_cast<int>(st.size()); ++j) {
          call += st[static_cast<std::size_t>(j)];
          if (j + 1 < static_cast<int>(st.size())) call += ", ";
        }
        call += ")";
        st.resize(st.size() - static_cast<std::size_t>(args));
        st.push_back(std::move(call));
      }
    }
  }
  return st.empty() ? std::string("0") : st.back();
}

double eval(const Expr& expr, std::span<const double> env) { return expr.eval(env); }

JacobianResult jacobian(std::span<const Expr> exprs, std::span<const double> env, std::span<const int> wrt) {
  for (std::size_t a = 0; a < wrt.size(); ++a) {
    for (std::size_t b = a + 1; b < wrt.size(); ++b) {
      if (wrt[a] == wrt[b]) throw InvalidArgument("sysdsl", "jacobian", "wrt slots must be distinct");
    }
  }
  JacobianResult out;
  out.values.resize(static_cast<Eigen::Index>(exprs.size()), static_cast<Eigen::Index>(wrt.size()));
  for (std::size_t j = 0; j < wrt.size(); ++j) {
    for (std::size_t i = 0; i < exprs.size(); ++i) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          exprs[i].eval_dual(env, wrt[j], out.nonsmooth).d;
    }
  }
  return out;
}

}  // namespace perorbit
