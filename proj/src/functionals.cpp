#include "fmean/functionals.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace fmean {

namespace {

const Eigen::VectorXd& path_values(const Sample& s) {
  if (const auto* p = std::get_if<PathSample>(&s)) return p->values;
  if (const auto* d = std::get_if<DerivSample>(&s)) return d->path;
  throw UnsupportedQuery("this atom needs pointwise path values");
}

bool has_node0(const Sample& s) {
  if (const auto* p = std::get_if<PathSample>(&s)) return p->x0.has_value();
  return std::holds_alternative<DerivSample>(s);
}

double node0_value(const Sample& s) {
  if (const auto* p = std::get_if<PathSample>(&s)) return *p->x0;
  return 0.0;  // derivative-constrained paths start at 0
}

}  // namespace

int snap_node(double t, int n, bool node0) {
  if (!(t >= 0.0 && t <= 1.0))
    throw ParameterError("point evaluations need t in [0,1]");
  double pos = t * n;
  int k = static_cast<int>(std::floor(pos + 0.5));
  if (k - pos == 0.5) --k;  // exact midpoint: lower node
  int lowest = node0 ? 0 : 1;
  if (k < lowest) k = lowest;
  if (k > n) k = n;
  return k;
}

double eval_atom(const Atom& atom, const Sample& sample, const Grid& grid) {
  const int n = grid.n;
  struct V {
    const Sample& sample;
    const Grid& grid;
    int n;

    double operator()(const IntegralAtom& a) const {
      if (const auto* layer = std::get_if<LayerSample>(&sample)) {
        if (!a.I.is_full())
          throw UnsupportedQuery(
              "layer weights support only full-interval integrals");
        double sum = 0.0;
        for (int k = 1; k <= n; ++k)
          sum += a.g(grid.t(k)) * layer->weights[k - 1];
        return sum;
      }
      const Eigen::VectorXd& x = path_values(sample);
      double sum = 0.0;
      for (int k = 1; k <= n; ++k)
        if (a.I.contains(grid.t(k))) sum += a.g(x[k - 1]);
      return sum / n;
    }
    double operator()(const WeightedLinearAtom& a) const {
      const Eigen::VectorXd& x = path_values(sample);
      double sum = 0.0;
      for (int k = 1; k <= n; ++k) {
        double t = grid.t(k);
        if (a.I.contains(t)) sum += a.c(t) * x[k - 1];
      }
      return sum / n;
    }
    double operator()(const DerivIntegralAtom& a) const {
      const auto* d = std::get_if<DerivSample>(&sample);
      if (!d)
        throw UnsupportedQuery(
            "derivative integrands need a derivative-constrained sample");
      double sum = 0.0;
      for (int k = 1; k <= n; ++k)
        if (a.I.contains(grid.t(k))) sum += a.g(d->deriv[k - 1]);
      return sum / n;
    }
    double operator()(const PointAtom& a) const {
      bool node0 = has_node0(sample);
      const Eigen::VectorXd& x = path_values(sample);
      int k = snap_node(a.t, n, node0);
      return k == 0 ? node0_value(sample) : x[k - 1];
    }
    double operator()(const MultiIntegralAtom& a) const {
      const Eigen::VectorXd& x = path_values(sample);
      int m = a.g.arity();
      if (m < 1 || m > 3)
        throw ParameterError("multi-integral arity must be 1..3");
      if (static_cast<int>(a.I.size()) != m)
        throw ParameterError("multi-integral needs one interval per argument");
      double budget = std::pow(static_cast<double>(n), m);
      if (budget > static_cast<double>(kMultiSumBudget))
        throw BudgetError("multi-integral grid sum exceeds the budget");
      // nodes participating per axis
      std::vector<std::vector<int>> idx(m);
      for (int d = 0; d < m; ++d)
        for (int k = 1; k <= n; ++k)
          if (a.I[d].contains(grid.t(k))) idx[d].push_back(k - 1);
      double args[3] = {0, 0, 0};
      double sum = 0.0;
      if (m == 1) {
        for (int i : idx[0]) {
          args[0] = x[i];
          sum += a.g(std::span<const double>(args, 1));
        }
      } else if (m == 2) {
        for (int i : idx[0]) {
          args[0] = x[i];
          for (int j : idx[1]) {
            args[1] = x[j];
            sum += a.g(std::span<const double>(args, 2));
          }
        }
      } else {
        for (int i : idx[0]) {
          args[0] = x[i];
          for (int j : idx[1]) {
            args[1] = x[j];
            for (int l : idx[2]) {
              args[2] = x[l];
              sum += a.g(std::span<const double>(args, 3));
            }
          }
        }
      }
      return sum / budget;
    }
    double operator()(const DiffQuotAtom& a) const {
      if (!has_node0(sample))
        throw UnsupportedQuery(
            "difference quotients need a path with a value at t = 0");
      if (const auto* d = std::get_if<DerivSample>(&sample)) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += a.g(d->deriv[k]);
        return sum / n;
      }
      const Eigen::VectorXd& x = path_values(sample);
      double prev = node0_value(sample);
      double sum = 0.0;
      for (int k = 0; k < n; ++k) {
        sum += a.g(n * (x[k] - prev));
        prev = x[k];
      }
      return sum / n;
    }
  };
  return std::visit(V{sample, grid, n}, atom);
}

double eval_functional(const FunctionalExpr& expr, const Sample& sample,
                       const Grid& grid) {
  if (expr.atoms.empty()) throw ParameterError("functional has no atoms");
  if (!expr.h) {
    if (expr.atoms.size() != 1)
      throw ParameterError("several atoms need an outer function");
    return eval_atom(expr.atoms[0], sample, grid);
  }
  if (expr.h->arity() != static_cast<int>(expr.atoms.size()))
    throw ParameterError("outer function arity must match the atom count");
  std::vector<double> vals(expr.atoms.size());
  for (std::size_t i = 0; i < expr.atoms.size(); ++i)
    vals[i] = eval_atom(expr.atoms[i], sample, grid);
  return (*expr.h)(vals);
}

FunctionalClass classify(const FunctionalExpr& expr) {
  if (expr.atoms.empty()) throw ParameterError("functional has no atoms");
  std::size_t points = 0;
  for (const Atom& a : expr.atoms)
    if (std::holds_alternative<PointAtom>(a)) ++points;
  if (points == 0) return FunctionalClass::PurelyIntegral;
  if (points == expr.atoms.size()) return FunctionalClass::PurelyPointwise;
  return FunctionalClass::MixedPointwise;
}

// --- text form -------------------------------------------------------------

namespace {

std::vector<std::string> split_args(const std::string& body) {
  // split on ';' at paren depth zero
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : body) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ';' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used])))
      ++used;
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("malformed " + what + " '" + s + "'", 0);
  }
}

Interval parse_interval_pair(const std::string& part) {
  auto comma = part.find(',');
  if (comma == std::string::npos)
    throw ParseError("interval needs 'lo,hi'", 0);
  double lo = parse_number(part.substr(0, comma), "interval bound");
  double hi = parse_number(part.substr(comma + 1), "interval bound");
  return Interval(lo, hi);
}

std::string fmt_num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

Atom parse_atom(const std::string& src) {
  auto open = src.find('(');
  if (open == std::string::npos || src.empty() || src.back() != ')')
    throw ParseError("atom must look like kind(...)", 0);
  std::string kind = src.substr(0, open);
  std::string body = src.substr(open + 1, src.size() - open - 2);
  std::vector<std::string> parts = split_args(body);
  if (kind == "pt") {
    if (parts.size() != 1) throw ParseError("pt takes one argument", 0);
    return PointAtom{parse_number(parts[0], "point location")};
  }
  if (kind == "dq") {
    if (parts.size() != 1) throw ParseError("dq takes one argument", 0);
    return DiffQuotAtom{parse_scalar(parts[0])};
  }
  if (kind == "mint") {
    if (parts.size() < 2 || parts.size() > 4)
      throw ParseError("mint takes a function and 1..3 intervals", 0);
    MultiFn g = parse_multi(parts[0], static_cast<int>(parts.size()) - 1);
    std::vector<Interval> iv;
    for (std::size_t i = 1; i < parts.size(); ++i)
      iv.push_back(parse_interval_pair(parts[i]));
    return MultiIntegralAtom{std::move(g), std::move(iv)};
  }
  if (kind == "int" || kind == "lin" || kind == "dint") {
    if (parts.size() != 2)
      throw ParseError(kind + " takes a function and an interval", 0);
    ScalarFn f = parse_scalar(parts[0]);
    Interval I = parse_interval_pair(parts[1]);
    if (kind == "int") return IntegralAtom{std::move(f), I};
    if (kind == "lin") return WeightedLinearAtom{std::move(f), I};
    return DerivIntegralAtom{std::move(f), I};
  }
  throw ParseError("unknown atom kind '" + kind + "'", 0);
}

std::string atom_str(const Atom& atom) {
  struct V {
    std::string operator()(const IntegralAtom& a) const {
      return "int(" + a.g.str() + ";" + fmt_num(a.I.lo) + "," + fmt_num(a.I.hi) +
             ")";
    }
    std::string operator()(const WeightedLinearAtom& a) const {
      return "lin(" + a.c.str() + ";" + fmt_num(a.I.lo) + "," + fmt_num(a.I.hi) +
             ")";
    }
    std::string operator()(const DerivIntegralAtom& a) const {
      return "dint(" + a.g.str() + ";" + fmt_num(a.I.lo) + "," +
             fmt_num(a.I.hi) + ")";
    }
    std::string operator()(const PointAtom& a) const {
      return "pt(" + fmt_num(a.t) + ")";
    }
    std::string operator()(const MultiIntegralAtom& a) const {
      std::string s = "mint(" + a.g.str();
      for (const Interval& I : a.I)
        s += ";" + fmt_num(I.lo) + "," + fmt_num(I.hi);
      return s + ")";
    }
    std::string operator()(const DiffQuotAtom& a) const {
      return "dq(" + a.g.str() + ")";
    }
  };
  return std::visit(V{}, atom);
}

std::string functional_str(const FunctionalExpr& expr) {
  if (!expr.h && expr.atoms.size() == 1) return atom_str(expr.atoms[0]);
  std::string s = "compose(" + (expr.h ? expr.h->str() : std::string());
  for (const Atom& a : expr.atoms) s += ";" + atom_str(a);
  return s + ")";
}

FunctionalExpr single_atom(Atom atom) {
  FunctionalExpr e;
  e.atoms.push_back(std::move(atom));
  return e;
}

FunctionalExpr composite(MultiFn h, std::vector<Atom> atoms) {
  FunctionalExpr e;
  e.h = std::move(h);
  e.atoms = std::move(atoms);
  if (e.h->arity() != static_cast<int>(e.atoms.size()))
    throw ParameterError("outer function arity must match the atom count");
  return e;
}

}  // namespace fmean
