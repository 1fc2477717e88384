#include "fmean/runner.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fmean {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg, const std::string& where) {
  throw ConfigError(msg, where);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) bad("unknown key '" + it.key() + "'", where);
}

double need_number(const json& obj, const std::string& key,
                   const std::string& where) {
  if (!obj.contains(key)) bad("missing key '" + key + "'", where);
  if (!obj[key].is_number()) bad("'" + key + "' must be a number", where);
  return obj[key].get<double>();
}

std::string need_string(const json& obj, const std::string& key,
                        const std::string& where) {
  if (!obj.contains(key)) bad("missing key '" + key + "'", where);
  if (!obj[key].is_string()) bad("'" + key + "' must be a string", where);
  return obj[key].get<std::string>();
}

SpaceModel parse_space(const json& obj, const std::string& where) {
  if (!obj.is_object()) bad("space must be an object", where);
  std::string kind = need_string(obj, "kind", where);
  if (kind == "bounded_uniform") {
    reject_unknown(obj, {"kind", "m1", "m2"}, where);
    return BoundedUniform{need_number(obj, "m1", where),
                          need_number(obj, "m2", where)};
  }
  if (kind == "iid") {
    std::string dist = need_string(obj, "dist", where);
    if (dist == "gaussian") {
      reject_unknown(obj, {"kind", "dist", "mu", "sigma"}, where);
      return IidDensity{GaussianDist{need_number(obj, "mu", where),
                                     need_number(obj, "sigma", where)}};
    }
    if (dist == "cauchy") {
      reject_unknown(obj, {"kind", "dist"}, where);
      return IidDensity{CauchyDist{}};
    }
    if (dist == "uniform") {
      reject_unknown(obj, {"kind", "dist", "a", "b"}, where);
      return IidDensity{UniformDist{need_number(obj, "a", where),
                                    need_number(obj, "b", where)}};
    }
    bad("unknown dist '" + dist + "'", where + ".dist");
  }
  if (kind == "layer_simplex") {
    reject_unknown(obj, {"kind"}, where);
    return LayerSimplex{};
  }
  if (kind == "deriv_constrained") {
    reject_unknown(obj, {"kind"}, where);
    return DerivConstrained{};
  }
  if (kind == "codim1") {
    reject_unknown(obj, {"kind", "a", "s"}, where);
    return Codim1{parse_scalar(need_string(obj, "a", where)),
                  need_number(obj, "s", where)};
  }
  if (kind == "codim2") {
    reject_unknown(obj, {"kind", "a", "b", "r", "s"}, where);
    return Codim2{parse_scalar(need_string(obj, "a", where)),
                  parse_scalar(need_string(obj, "b", where)),
                  need_number(obj, "r", where), need_number(obj, "s", where)};
  }
  if (kind == "ball2") {
    reject_unknown(obj, {"kind", "R"}, where);
    return Ball2{need_number(obj, "R", where)};
  }
  if (kind == "cauchy") {
    reject_unknown(obj, {"kind"}, where);
    return CauchySpace{};
  }
  if (kind == "wiener") {
    reject_unknown(obj, {"kind"}, where);
    return WienerSpace{};
  }
  bad("unknown space kind '" + kind + "'", where + ".kind");
}

FunctionalExpr parse_functional(const json& obj, const std::string& where) {
  if (obj.is_string())
    return single_atom(parse_atom(obj.get<std::string>()));
  if (!obj.is_object())
    bad("functional must be an atom string or {h, atoms}", where);
  reject_unknown(obj, {"h", "atoms"}, where);
  if (!obj.contains("atoms") || !obj["atoms"].is_array() ||
      obj["atoms"].empty())
    bad("'atoms' must be a nonempty array", where);
  std::vector<Atom> atoms;
  for (const auto& a : obj["atoms"]) {
    if (!a.is_string()) bad("atoms must be strings", where + ".atoms");
    atoms.push_back(parse_atom(a.get<std::string>()));
  }
  MultiFn h = parse_multi(need_string(obj, "h", where),
                          static_cast<int>(atoms.size()));
  return composite(std::move(h), std::move(atoms));
}

const std::set<std::string> kKnownChecks = {
    "mean", "variance_decay", "ks", "exchange_gap", "divergence", "cf",
    "events"};

ExperimentPlan parse_plan(const json& obj, const std::string& where) {
  if (!obj.is_object()) bad("experiment must be an object", where);
  reject_unknown(obj,
                 {"id", "space", "functional", "n_list", "N", "seed",
                  "checks", "event"},
                 where);
  ExperimentPlan plan;
  plan.id = need_string(obj, "id", where);
  if (!obj.contains("space")) bad("missing key 'space'", where);
  plan.space = parse_space(obj["space"], where + ".space");
  if (!obj.contains("functional")) bad("missing key 'functional'", where);
  plan.functional = parse_functional(obj["functional"], where + ".functional");
  if (!obj.contains("n_list") || !obj["n_list"].is_array() ||
      obj["n_list"].empty())
    bad("'n_list' must be a nonempty array", where);
  for (const auto& v : obj["n_list"]) {
    if (!v.is_number_integer() || v.get<long>() < 1)
      bad("'n_list' entries must be positive integers", where + ".n_list");
    plan.n_list.push_back(v.get<int>());
  }
  double N = need_number(obj, "N", where);
  if (N < 100) bad("'N' must be >= 100", where + ".N");
  plan.N = static_cast<long>(N);
  double seed = need_number(obj, "seed", where);
  if (seed < 0) bad("'seed' must be >= 0", where + ".seed");
  plan.seed = static_cast<std::uint64_t>(seed);
  if (!obj.contains("checks") || !obj["checks"].is_array() ||
      obj["checks"].empty())
    bad("'checks' must be a nonempty array", where);
  for (const auto& c : obj["checks"]) {
    if (!c.is_string() || !kKnownChecks.count(c.get<std::string>()))
      bad("unknown check '" + c.dump() + "'", where + ".checks");
    plan.checks.push_back(c.get<std::string>());
  }
  if (obj.contains("event")) {
    const auto& e = obj["event"];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
        !e[1].is_number())
      bad("'event' must be [a, b]", where + ".event");
    plan.event = EventBounds{e[0].get<double>(), e[1].get<double>()};
    if (!(plan.event->a <= plan.event->b))
      bad("'event' bounds must satisfy a <= b", where + ".event");
  }
  bool wants_events =
      std::count(plan.checks.begin(), plan.checks.end(), "events") > 0;
  if (wants_events && !plan.event)
    bad("the events check needs 'event' bounds", where);
  return plan;
}

// --- row helpers -----------------------------------------------------------

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::complex<double> law_cf(const Law& law, double t) {
  if (const auto* d = std::get_if<DiracLaw>(&law))
    return std::exp(std::complex<double>(0.0, t * d->c));
  if (std::holds_alternative<CauchyLaw>(law))
    return {std::exp(-std::abs(t)), 0.0};
  if (const auto* g = std::get_if<GaussianLaw>(&law))
    return std::exp(std::complex<double>(-0.5 * g->var * t * t, t * g->mu));
  throw UnsupportedQuery("no characteristic function for an unknown law");
}

double law_event_probability(const Law& law, double a, double b) {
  if (const auto* d = std::get_if<DiracLaw>(&law))
    return (d->c >= a && d->c <= b) ? 1.0 : 0.0;
  if (std::holds_alternative<CauchyLaw>(law))
    return cauchy_interval_measure(a, b);
  if (const auto* g = std::get_if<GaussianLaw>(&law)) {
    GaussianDensity gd{g->mu, g->var};
    return cdf(gd, b) - cdf(gd, a);
  }
  throw UnsupportedQuery("no event probability for an unknown law");
}

Density law_density(const Law& law) {
  if (const auto* d = std::get_if<DiracLaw>(&law)) return DiracDensity{d->c};
  if (std::holds_alternative<CauchyLaw>(law)) return CauchyDensity{};
  if (const auto* g = std::get_if<GaussianLaw>(&law))
    return GaussianDensity{g->mu, g->var};
  throw UnsupportedQuery("no reference density for an unknown law");
}

std::string status_of(const Error& e) {
  if (dynamic_cast<const IllPosedConstraint*>(&e)) return "ILL_POSED";
  if (dynamic_cast<const NonConcentrating*>(&e)) return "NONCONCENTRATING";
  if (dynamic_cast<const DivergentMean*>(&e)) return "DIVERGENT";
  return "UNSUPPORTED";
}

struct RowBuilder {
  const ExperimentPlan& plan;
  std::vector<ReportRow>& rows;

  ReportRow base(int n, const std::string& suffix = "") const {
    ReportRow row;
    row.experiment_id = plan.id;
    row.space = space_name(plan.space);
    row.functional = functional_str(plan.functional) + suffix;
    row.n = n;
    row.N = plan.N;
    row.seed = plan.seed;
    return row;
  }
};

// Fills the analytic columns and reports why they are absent.
std::string analytic_columns(const ExperimentPlan& plan, ReportRow& row) {
  try {
    AnalyticResult ar = functional_mean(plan.space, plan.functional);
    row.analytic_mean = ar.mean;
    row.analytic_var = ar.variance;
    return "";
  } catch (const Error& e) {
    return status_of(e);
  }
}

void check_mean(const RowBuilder& rb, int workers) {
  const ExperimentPlan& plan = rb.plan;
  for (int n : plan.n_list) {
    ReportRow row = rb.base(n);
    std::string analytic_status = analytic_columns(plan, row);
    try {
      EstimateReport rep =
          estimate(plan.space, plan.functional, n, plan.N, plan.seed, workers);
      row.mc_mean = rep.mc_mean;
      row.mc_var = rep.mc_var;
      row.mc_stderr = rep.stderr_;
      row.z_score = rep.z_score;
      if (row.analytic_mean)
        row.abs_error = std::abs(rep.mc_mean - *row.analytic_mean);
      if (rep.heavy_tailed)
        row.status = "HEAVY_TAIL";
      else
        row.status = analytic_status.empty() ? "OK" : analytic_status;
    } catch (const Error& e) {
      row.status = status_of(e);
    }
    rb.rows.push_back(row);
  }
}

void check_variance_decay(const RowBuilder& rb, int workers) {
  const ExperimentPlan& plan = rb.plan;
  try {
    VarianceDecay vd = variance_decay(plan.space, plan.functional,
                                      plan.n_list, plan.N, plan.seed, workers);
    for (std::size_t i = 0; i < vd.n_list.size(); ++i) {
      ReportRow row = rb.base(vd.n_list[i], "@variance_decay");
      row.mc_var = vd.variances[i];
      row.mc_mean = vd.variances[i];
      row.status = "OK";
      rb.rows.push_back(row);
    }
    ReportRow row = rb.base(0, "@variance_decay_slope");
    row.mc_mean = vd.slope;
    row.status = "OK";
    rb.rows.push_back(row);
  } catch (const Error& e) {
    ReportRow row = rb.base(0, "@variance_decay_slope");
    row.status = status_of(e);
    rb.rows.push_back(row);
  }
}

void check_ks(const RowBuilder& rb, int workers) {
  const ExperimentPlan& plan = rb.plan;
  for (int n : plan.n_list) {
    ReportRow row = rb.base(n, "@ks");
    try {
      Density ref = [&]() -> Density {
        // a bare point atom is compared against its coordinate marginal,
        // anything else against the functional's limiting law
        if (!plan.functional.h && plan.functional.atoms.size() == 1) {
          if (const auto* pt =
                  std::get_if<PointAtom>(&plan.functional.atoms[0]))
            return coordinate_density(plan.space, pt->t, n).density;
          return law_density(
              functional_law(plan.space, plan.functional.atoms[0]));
        }
        throw UnsupportedQuery(
            "no reference law for a composite functional");
      }();
      std::vector<double> values = collect_values(
          plan.space, plan.functional, n, plan.N, plan.seed, workers);
      row.mc_mean = ks_statistic(std::move(values), ref);
      row.status = "OK";
    } catch (const Error& e) {
      row.status = status_of(e);
    }
    rb.rows.push_back(row);
  }
}

void check_exchange_gap(const RowBuilder& rb, int workers) {
  const ExperimentPlan& plan = rb.plan;
  bool nonconc = std::holds_alternative<CauchySpace>(plan.space) ||
                 std::holds_alternative<WienerSpace>(plan.space);
  for (int n : plan.n_list) {
    ReportRow row = rb.base(n, "@exchange_gap");
    try {
      ExchangeGap gap = exchange_gap(plan.space, plan.functional, n, plan.N,
                                     plan.seed, workers);
      row.analytic_mean = gap.predicted;
      row.mc_mean = gap.mc_mean;
      row.mc_stderr = gap.stderr_;
      row.abs_error = gap.gap;
      row.status = nonconc ? "NONCONCENTRATING" : "OK";
    } catch (const Error& e) {
      row.status = status_of(e);
    }
    rb.rows.push_back(row);
  }
}

void check_divergence(const RowBuilder& rb, int workers) {
  const ExperimentPlan& plan = rb.plan;
  try {
    DivergenceScan scan =
        divergence_scan(plan.space, plan.functional, plan.n_list, plan.N,
                        plan.seed, workers);
    for (std::size_t i = 0; i < scan.n_list.size(); ++i) {
      ReportRow row = rb.base(scan.n_list[i], "@divergence");
      row.mc_mean = scan.means[i];
      row.status = "OK";
      rb.rows.push_back(row);
    }
    ReportRow row = rb.base(0, "@divergence_exponent");
    row.mc_mean = scan.exponent;
    row.status = scan.divergent ? "DIVERGENT" : "OK";
    rb.rows.push_back(row);
  } catch (const Error& e) {
    ReportRow row = rb.base(0, "@divergence_exponent");
    row.status = status_of(e);
    rb.rows.push_back(row);
  }
}

void check_cf(const RowBuilder& rb, int workers) {
  const ExperimentPlan& plan = rb.plan;
  const double t = 1.0;
  for (int n : plan.n_list) {
    ReportRow row = rb.base(n, "@cf");
    try {
      std::vector<double> values = collect_values(
          plan.space, plan.functional, n, plan.N, plan.seed, workers);
      double grid[1] = {t};
      std::complex<double> emp = empirical_cf(values, grid)[0];
      row.mc_mean = emp.real();
      row.mc_var = emp.imag();
      std::string analytic_status;
      try {
        Law law = plan.functional.h
                      ? Law{UnknownLaw{}}
                      : functional_law(plan.space, plan.functional.atoms[0]);
        std::complex<double> ref = law_cf(law, t);
        row.analytic_mean = ref.real();
        row.analytic_var = ref.imag();
        row.abs_error = std::abs(emp - ref);
      } catch (const Error& e) {
        analytic_status = status_of(e);
      }
      row.status = analytic_status.empty() ? "OK" : analytic_status;
    } catch (const Error& e) {
      row.status = status_of(e);
    }
    rb.rows.push_back(row);
  }
}

void check_events(const RowBuilder& rb, int workers) {
  const ExperimentPlan& plan = rb.plan;
  const double a = plan.event->a, b = plan.event->b;
  std::string suffix = "@event[" + fmt17(a) + "," + fmt17(b) + "]";
  for (int n : plan.n_list) {
    ReportRow row = rb.base(n, suffix);
    try {
      std::vector<double> values = collect_values(
          plan.space, plan.functional, n, plan.N, plan.seed, workers);
      long hits = 0;
      for (double v : values)
        if (v >= a && v <= b) ++hits;
      double N = static_cast<double>(values.size());
      double p = hits / N;
      // Wilson 95% half-width
      const double z = 1.959963984540054;
      double half = z * std::sqrt(p * (1.0 - p) / N + z * z / (4 * N * N)) /
                    (1.0 + z * z / N);
      row.mc_mean = p;
      row.mc_stderr = half;
      std::string analytic_status;
      try {
        Law law = plan.functional.h
                      ? Law{UnknownLaw{}}
                      : functional_law(plan.space, plan.functional.atoms[0]);
        row.analytic_mean = law_event_probability(law, a, b);
        row.abs_error = std::abs(p - *row.analytic_mean);
      } catch (const Error& e) {
        analytic_status = status_of(e);
      }
      row.status = analytic_status.empty() ? "OK" : analytic_status;
    } catch (const Error& e) {
      row.status = status_of(e);
    }
    rb.rows.push_back(row);
  }
}

std::string csv_cell(const std::optional<double>& v) {
  return v ? fmt17(*v) : std::string();
}

}  // namespace

std::vector<ExperimentPlan> parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what(), "<config>");
  }
  if (!root.is_object()) bad("config root must be an object", "<config>");
  reject_unknown(root, {"experiments"}, "<config>");
  if (!root.contains("experiments") || !root["experiments"].is_array() ||
      root["experiments"].empty())
    bad("'experiments' must be a nonempty array", "<config>");
  std::vector<ExperimentPlan> plans;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < root["experiments"].size(); ++i) {
    std::string where = "experiments[" + std::to_string(i) + "]";
    plans.push_back(parse_plan(root["experiments"][i], where));
    if (!ids.insert(plans.back().id).second)
      bad("duplicate experiment id '" + plans.back().id + "'", where + ".id");
  }
  return plans;
}

std::vector<ExperimentPlan> parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot open config file", path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

SpaceModel parse_space_json(const std::string& text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what(), "<space>");
  }
  return parse_space(obj, "<space>");
}

std::vector<std::string> list_space_kinds() {
  return {
      "bounded_uniform  {m1, m2}          paths confined to the band [m1, m2]",
      "iid              {dist, ...}       iid coordinates: gaussian {mu, sigma}, cauchy, uniform {a, b}",
      "layer_simplex    {}                level-set weights on the probability simplex",
      "deriv_constrained{}                x(0)=0 with slopes drawn uniformly from [0, 1]",
      "codim1           {a, s}            nonnegative paths with (1/n) sum a(t_k) x_k = s",
      "codim2           {a, b, r, s}      two linear constraints with weights a and b",
      "ball2            {R}               uniform law on the L2 ball of radius R",
      "cauchy           {}                iid standard Cauchy coordinates",
      "wiener           {}                Brownian paths, increments N(0, 1/n)",
  };
}

std::vector<ReportRow> run_plan(const std::vector<ExperimentPlan>& plans,
                                int workers) {
  std::vector<ReportRow> rows;
  for (const ExperimentPlan& plan : plans) {
    RowBuilder rb{plan, rows};
    for (const std::string& check : plan.checks) {
      if (check == "mean")
        check_mean(rb, workers);
      else if (check == "variance_decay")
        check_variance_decay(rb, workers);
      else if (check == "ks")
        check_ks(rb, workers);
      else if (check == "exchange_gap")
        check_exchange_gap(rb, workers);
      else if (check == "divergence")
        check_divergence(rb, workers);
      else if (check == "cf")
        check_cf(rb, workers);
      else if (check == "events")
        check_events(rb, workers);
    }
  }
  return rows;
}

std::string emit_report(const std::vector<ReportRow>& rows,
                        ReportFormat format) {
  if (rows.empty()) throw ParameterError("report needs at least one row");
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    out << "experiment_id,space,functional,n,N,seed,analytic_mean,"
           "analytic_var,mc_mean,mc_var,mc_stderr,abs_error,z_score,status\n";
    for (const ReportRow& r : rows) {
      out << r.experiment_id << ',' << r.space << ',' << r.functional << ','
          << r.n << ',' << r.N << ',' << r.seed << ','
          << csv_cell(r.analytic_mean) << ',' << csv_cell(r.analytic_var)
          << ',' << csv_cell(r.mc_mean) << ',' << csv_cell(r.mc_var) << ','
          << csv_cell(r.mc_stderr) << ',' << csv_cell(r.abs_error) << ','
          << csv_cell(r.z_score) << ',' << r.status << '\n';
    }
    return out.str();
  }
  for (const ReportRow& r : rows) {
    json obj;
    obj["experiment_id"] = r.experiment_id;
    obj["space"] = r.space;
    obj["functional"] = r.functional;
    obj["n"] = r.n;
    obj["N"] = r.N;
    obj["seed"] = r.seed;
    auto put = [&obj](const char* key, const std::optional<double>& v) {
      if (v)
        obj[key] = *v;
      else
        obj[key] = nullptr;
    };
    put("analytic_mean", r.analytic_mean);
    put("analytic_var", r.analytic_var);
    put("mc_mean", r.mc_mean);
    put("mc_var", r.mc_var);
    put("mc_stderr", r.mc_stderr);
    put("abs_error", r.abs_error);
    put("z_score", r.z_score);
    obj["status"] = r.status;
    out << obj.dump() << '\n';
  }
  return out.str();
}

}  // namespace fmean
