#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fmean/exprlang.hpp"
#include "fmean/numcore.hpp"
#include "fmean/spaces.hpp"

namespace fmean {

struct Interval {
  double lo = 0.0, hi = 1.0;

  Interval() = default;
  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0))
      throw ParameterError("interval must satisfy 0 <= lo <= hi <= 1");
  }
  double length() const { return hi - lo; }
  // half-open membership so adjacent atoms tile [0,1] without double counting
  bool contains(double t) const { return t > lo && t <= hi; }
  bool is_full() const { return lo == 0.0 && hi == 1.0; }
};

struct IntegralAtom {
  ScalarFn g;
  Interval I;
};
struct WeightedLinearAtom {
  ScalarFn c;
  Interval I;
};
struct DerivIntegralAtom {
  ScalarFn g;
  Interval I;
};
struct PointAtom {
  double t;
};
struct MultiIntegralAtom {
  MultiFn g;
  std::vector<Interval> I;  // one per argument, arity <= 3
};
// Difference-quotient sum (1/n) sum g(n(x_k - x_{k-1})) over the whole
// interval; the discrete stand-in for int g(x'(t)) dt on unconstrained paths.
struct DiffQuotAtom {
  ScalarFn g;
};

using Atom = std::variant<IntegralAtom, WeightedLinearAtom, DerivIntegralAtom,
                          PointAtom, MultiIntegralAtom, DiffQuotAtom>;

// Outer function h over the atom values; h absent means a single bare atom.
struct FunctionalExpr {
  std::optional<MultiFn> h;
  std::vector<Atom> atoms;
};

enum class FunctionalClass { PurelyIntegral, MixedPointwise, PurelyPointwise };

inline constexpr long kMultiSumBudget = 100'000'000;

double eval_atom(const Atom& atom, const Sample& sample, const Grid& grid);
double eval_functional(const FunctionalExpr& expr, const Sample& sample,
                       const Grid& grid);
FunctionalClass classify(const FunctionalExpr& expr);

// Text forms: int(g;lo,hi), lin(c;lo,hi), dint(g;lo,hi), pt(t),
// mint(g;lo,hi;lo,hi), dq(g).
Atom parse_atom(const std::string& src);
std::string atom_str(const Atom& atom);
std::string functional_str(const FunctionalExpr& expr);

// Nearest grid node for a point evaluation; ties snap to the lower node.
// Node 0 is only available when the sample defines a value at t = 0.
int snap_node(double t, int n, bool has_node0);

FunctionalExpr single_atom(Atom atom);
FunctionalExpr composite(MultiFn h, std::vector<Atom> atoms);

}  // namespace fmean
