#include "fmean/exprlang.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

namespace fmean {

namespace {

ExprPtr num(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Number;
  n->number = v;
  return n;
}

ExprPtr var(int idx) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Var;
  n->var_index = idx;
  return n;
}

bool is_num(const ExprPtr& e, double v) {
  return e->kind == NodeKind::Number && e->number == v;
}

double apply_call(const std::string& name, double u) {
  if (name == "sin") return std::sin(u);
  if (name == "cos") return std::cos(u);
  if (name == "tan") return std::tan(u);
  if (name == "exp") return std::exp(u);
  if (name == "atan") return std::atan(u);
  if (name == "ln") {
    if (u <= 0.0) throw EvalDomainError("ln of a non-positive argument");
    return std::log(u);
  }
  if (name == "sqrt") {
    if (u < 0.0) throw EvalDomainError("sqrt of a negative argument");
    return std::sqrt(u);
  }
  throw ParameterError("unknown function: " + name);
}

bool known_call(const std::string& name) {
  return name == "sin" || name == "cos" || name == "tan" || name == "exp" ||
         name == "ln" || name == "sqrt" || name == "atan";
}

// Smart constructors: fold when all operands are numeric literals.
ExprPtr mk_binary(NodeKind kind, ExprPtr a, ExprPtr b);
ExprPtr mk_unary(NodeKind kind, ExprPtr a);
ExprPtr mk_call(const std::string& name, ExprPtr a);

double eval_node(const ExprNode& e, std::span<const double> args);

ExprPtr mk_binary(NodeKind kind, ExprPtr a, ExprPtr b) {
  if (a->kind == NodeKind::Number && b->kind == NodeKind::Number) {
    auto fake = std::make_shared<ExprNode>();
    fake->kind = kind;
    fake->a = a;
    fake->b = b;
    return num(eval_node(*fake, {}));
  }
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

ExprPtr mk_unary(NodeKind kind, ExprPtr a) {
  if (a->kind == NodeKind::Number) return num(-a->number);
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->a = std::move(a);
  return n;
}

ExprPtr mk_call(const std::string& name, ExprPtr a) {
  if (a->kind == NodeKind::Number) return num(apply_call(name, a->number));
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Call;
  n->call_name = name;
  n->a = std::move(a);
  return n;
}

double eval_node(const ExprNode& e, std::span<const double> args) {
  switch (e.kind) {
    case NodeKind::Number:
      return e.number;
    case NodeKind::Var:
      if (e.var_index < 0 || static_cast<std::size_t>(e.var_index) >= args.size())
        throw ParameterError("expression arity mismatch");
      return args[e.var_index];
    case NodeKind::Add:
      return eval_node(*e.a, args) + eval_node(*e.b, args);
    case NodeKind::Sub:
      return eval_node(*e.a, args) - eval_node(*e.b, args);
    case NodeKind::Mul:
      return eval_node(*e.a, args) * eval_node(*e.b, args);
    case NodeKind::Div:
      return eval_node(*e.a, args) / eval_node(*e.b, args);
    case NodeKind::Pow: {
      double base = eval_node(*e.a, args);
      double exponent = eval_node(*e.b, args);
      double r = std::pow(base, exponent);
      if (std::isnan(r) && !std::isnan(base) && !std::isnan(exponent))
        throw EvalDomainError("pow outside the real domain");
      return r;
    }
    case NodeKind::Neg:
      return -eval_node(*e.a, args);
    case NodeKind::Call:
      return apply_call(e.call_name, eval_node(*e.a, args));
  }
  throw ParameterError("corrupt expression node");
}

// --- parsing ---------------------------------------------------------------

struct Token {
  enum Kind { Num, Ident, Op, LParen, RParen, End } kind;
  double value = 0.0;
  std::string text;
  char op = 0;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::End;
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
        ++pos_;
      // exponent suffix, accepted so folded constants reparse exactly
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t p = pos_ + 1;
        if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
        if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
          ++p;
          while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
          pos_ = p;
        }
      }
      std::string text = src_.substr(start, pos_ - start);
      try {
        std::size_t used = 0;
        tok_.value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
      } catch (const std::exception&) {
        throw ParseError("malformed number '" + text + "'", start);
      }
      tok_.kind = Token::Num;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.kind = Token::Ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    if (c == '(') {
      tok_.kind = Token::LParen;
      ++pos_;
      return;
    }
    if (c == ')') {
      tok_.kind = Token::RParen;
      ++pos_;
      return;
    }
    if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      tok_.kind = Token::Op;
      tok_.op = c;
      ++pos_;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  Token tok_;
};

// Resolves an identifier to a variable index, or nullopt for unknown names.
using VarResolver = std::function<std::optional<int>(const std::string&)>;

class Parser {
 public:
  Parser(const std::string& src, VarResolver resolve)
      : lex_(src), resolve_(std::move(resolve)) {}

  ExprPtr parse() {
    ExprPtr e = parse_sum();
    const Token& t = lex_.peek();
    if (t.kind != Token::End)
      throw ParseError("trailing input", t.offset);
    return e;
  }

 private:
  ExprPtr parse_sum() {
    ExprPtr e = parse_term();
    while (lex_.peek().kind == Token::Op &&
           (lex_.peek().op == '+' || lex_.peek().op == '-')) {
      char op = lex_.take().op;
      ExprPtr rhs = parse_term();
      e = mk_binary(op == '+' ? NodeKind::Add : NodeKind::Sub, e, rhs);
    }
    return e;
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_unary();
    while (lex_.peek().kind == Token::Op &&
           (lex_.peek().op == '*' || lex_.peek().op == '/')) {
      char op = lex_.take().op;
      ExprPtr rhs = parse_unary();
      e = mk_binary(op == '*' ? NodeKind::Mul : NodeKind::Div, e, rhs);
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (lex_.peek().kind == Token::Op && lex_.peek().op == '-') {
      lex_.take();
      return mk_unary(NodeKind::Neg, parse_unary());
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (lex_.peek().kind == Token::Op && lex_.peek().op == '^') {
      lex_.take();
      // right-associative, and binds tighter than the unary minus of the
      // exponent's own operand
      ExprPtr expo = parse_unary_power();
      return mk_binary(NodeKind::Pow, base, expo);
    }
    return base;
  }

  // Exponent position: allow a leading minus, then recurse for right assoc.
  ExprPtr parse_unary_power() {
    if (lex_.peek().kind == Token::Op && lex_.peek().op == '-') {
      lex_.take();
      return mk_unary(NodeKind::Neg, parse_unary_power());
    }
    return parse_power();
  }

  ExprPtr parse_atom() {
    Token t = lex_.take();
    switch (t.kind) {
      case Token::Num:
        return num(t.value);
      case Token::Ident: {
        if (lex_.peek().kind == Token::LParen) {
          if (!known_call(t.text))
            throw ParseError("unknown function '" + t.text + "'", t.offset);
          lex_.take();
          ExprPtr arg = parse_sum();
          const Token& close = lex_.peek();
          if (close.kind != Token::RParen)
            throw ParseError("expected ')'", close.offset);
          lex_.take();
          return mk_call(t.text, arg);
        }
        if (auto idx = resolve_(t.text)) return var(*idx);
        throw ParseError("unknown identifier '" + t.text + "'", t.offset);
      }
      case Token::LParen: {
        ExprPtr e = parse_sum();
        const Token& close = lex_.peek();
        if (close.kind != Token::RParen)
          throw ParseError("expected ')'", close.offset);
        lex_.take();
        return e;
      }
      default:
        throw ParseError("expected a value", t.offset);
    }
  }

  Lexer lex_;
  VarResolver resolve_;
};

// --- printing --------------------------------------------------------------

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::Add:
    case NodeKind::Sub:
      return 1;
    case NodeKind::Mul:
    case NodeKind::Div:
      return 2;
    case NodeKind::Neg:
      return 3;
    case NodeKind::Pow:
      return 4;
    default:
      return 5;
  }
}

void print_node(const ExprNode& e, std::ostringstream& out, bool multi);

void print_child(const ExprPtr& c, std::ostringstream& out, bool multi,
                 int parent_prec, bool needs_paren_on_equal) {
  int cp = precedence(c->kind);
  bool paren = cp < parent_prec || (cp == parent_prec && needs_paren_on_equal);
  if (paren) out << '(';
  print_node(*c, out, multi);
  if (paren) out << ')';
}

void print_node(const ExprNode& e, std::ostringstream& out, bool multi) {
  switch (e.kind) {
    case NodeKind::Number: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << e.number;
      std::string s = tmp.str();
      if (e.number < 0) {
        out << '(' << s << ')';
      } else {
        out << s;
      }
      return;
    }
    case NodeKind::Var:
      if (multi)
        out << 'y' << (e.var_index + 1);
      else
        out << 'x';
      return;
    case NodeKind::Add:
      print_child(e.a, out, multi, 1, false);
      out << '+';
      print_child(e.b, out, multi, 1, true);
      return;
    case NodeKind::Sub:
      print_child(e.a, out, multi, 1, false);
      out << '-';
      print_child(e.b, out, multi, 1, true);
      return;
    case NodeKind::Mul:
      print_child(e.a, out, multi, 2, false);
      out << '*';
      print_child(e.b, out, multi, 2, true);
      return;
    case NodeKind::Div:
      print_child(e.a, out, multi, 2, false);
      out << '/';
      print_child(e.b, out, multi, 2, true);
      return;
    case NodeKind::Neg:
      out << '-';
      print_child(e.a, out, multi, 3, true);
      return;
    case NodeKind::Pow:
      print_child(e.a, out, multi, 5, false);  // left side of ^ fully wrapped
      out << '^';
      print_child(e.b, out, multi, 4, false);
      return;
    case NodeKind::Call:
      out << e.call_name << '(';
      print_node(*e.a, out, multi);
      out << ')';
      return;
  }
}

std::string print_expr(const ExprPtr& root, bool multi) {
  std::ostringstream out;
  print_node(*root, out, multi);
  return out.str();
}

// --- differentiation -------------------------------------------------------

ExprPtr diff_node(const ExprPtr& e) {
  switch (e->kind) {
    case NodeKind::Number:
      return num(0.0);
    case NodeKind::Var:
      return num(1.0);
    case NodeKind::Add:
      return mk_binary(NodeKind::Add, diff_node(e->a), diff_node(e->b));
    case NodeKind::Sub:
      return mk_binary(NodeKind::Sub, diff_node(e->a), diff_node(e->b));
    case NodeKind::Mul:
      return mk_binary(NodeKind::Add,
                       mk_binary(NodeKind::Mul, diff_node(e->a), e->b),
                       mk_binary(NodeKind::Mul, e->a, diff_node(e->b)));
    case NodeKind::Div:
      return mk_binary(
          NodeKind::Div,
          mk_binary(NodeKind::Sub,
                    mk_binary(NodeKind::Mul, diff_node(e->a), e->b),
                    mk_binary(NodeKind::Mul, e->a, diff_node(e->b))),
          mk_binary(NodeKind::Pow, e->b, num(2.0)));
    case NodeKind::Neg:
      return mk_unary(NodeKind::Neg, diff_node(e->a));
    case NodeKind::Pow: {
      if (e->b->kind == NodeKind::Number) {
        double c = e->b->number;
        // c * a^(c-1) * a'
        return mk_binary(
            NodeKind::Mul,
            mk_binary(NodeKind::Mul, num(c),
                      mk_binary(NodeKind::Pow, e->a, num(c - 1.0))),
            diff_node(e->a));
      }
      // a^b * (b' ln a + b a'/a)
      return mk_binary(
          NodeKind::Mul, e,
          mk_binary(NodeKind::Add,
                    mk_binary(NodeKind::Mul, diff_node(e->b),
                              mk_call("ln", e->a)),
                    mk_binary(NodeKind::Div,
                              mk_binary(NodeKind::Mul, e->b, diff_node(e->a)),
                              e->a)));
    }
    case NodeKind::Call: {
      ExprPtr inner = diff_node(e->a);
      ExprPtr outer;
      const std::string& f = e->call_name;
      if (f == "sin") {
        outer = mk_call("cos", e->a);
      } else if (f == "cos") {
        outer = mk_unary(NodeKind::Neg, mk_call("sin", e->a));
      } else if (f == "tan") {
        outer = mk_binary(NodeKind::Div, num(1.0),
                          mk_binary(NodeKind::Pow, mk_call("cos", e->a), num(2.0)));
      } else if (f == "exp") {
        outer = mk_call("exp", e->a);
      } else if (f == "ln") {
        outer = mk_binary(NodeKind::Div, num(1.0), e->a);
      } else if (f == "sqrt") {
        outer = mk_binary(NodeKind::Div, num(1.0),
                          mk_binary(NodeKind::Mul, num(2.0), mk_call("sqrt", e->a)));
      } else if (f == "atan") {
        outer = mk_binary(NodeKind::Div, num(1.0),
                          mk_binary(NodeKind::Add, num(1.0),
                                    mk_binary(NodeKind::Pow, e->a, num(2.0))));
      } else {
        throw ParameterError("unknown function: " + f);
      }
      return mk_binary(NodeKind::Mul, outer, inner);
    }
  }
  throw ParameterError("corrupt expression node");
}

}  // namespace

// --- public API ------------------------------------------------------------

double ScalarFn::operator()(double x) const {
  if (!root_) throw ParameterError("empty expression");
  const double args[1] = {x};
  return eval_node(*root_, args);
}

std::string ScalarFn::str() const {
  if (!root_) return "";
  return print_expr(root_, /*multi=*/false);
}

bool ScalarFn::is_var() const {
  return root_ && root_->kind == NodeKind::Var;
}

bool ScalarFn::is_square_of_var() const {
  if (!root_) return false;
  const ExprNode& e = *root_;
  if (e.kind == NodeKind::Pow && e.a->kind == NodeKind::Var && is_num(e.b, 2.0))
    return true;
  if (e.kind == NodeKind::Mul && e.a->kind == NodeKind::Var &&
      e.b->kind == NodeKind::Var)
    return true;
  return false;
}

std::optional<double> ScalarFn::constant_value() const {
  if (root_ && root_->kind == NodeKind::Number) return root_->number;
  return std::nullopt;
}

double MultiFn::operator()(std::span<const double> args) const {
  if (!root_) throw ParameterError("empty expression");
  if (static_cast<int>(args.size()) != arity_)
    throw ParameterError("expression arity mismatch");
  return eval_node(*root_, args);
}

std::string MultiFn::str() const {
  if (!root_) return "";
  return print_expr(root_, /*multi=*/true);
}

ScalarFn parse_scalar(const std::string& src) {
  if (src.empty()) throw ParseError("empty expression", 0);
  Parser p(src, [](const std::string& name) -> std::optional<int> {
    if (name == "x") return 0;
    return std::nullopt;
  });
  return ScalarFn(p.parse());
}

MultiFn parse_multi(const std::string& src, int declared_arity) {
  if (src.empty()) throw ParseError("empty expression", 0);
  int max_used = 0;
  Parser p(src, [&](const std::string& name) -> std::optional<int> {
    if (name.size() >= 2 && name[0] == 'y') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      if (digits && name[1] != '0') {
        int idx = std::stoi(name.substr(1));
        if (declared_arity > 0 && idx > declared_arity) return std::nullopt;
        if (idx > max_used) max_used = idx;
        return idx - 1;
      }
    }
    return std::nullopt;
  });
  ExprPtr root = p.parse();
  int arity = declared_arity > 0 ? declared_arity : std::max(max_used, 1);
  return MultiFn(std::move(root), arity);
}

ScalarFn differentiate(const ScalarFn& f) {
  if (!f.root()) throw ParameterError("empty expression");
  return ScalarFn(diff_node(f.root()));
}

}  // namespace fmean
