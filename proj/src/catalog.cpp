#include "nucc/catalog.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "nucc/errors.hpp"

namespace nucc {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  std::string s = os.str();
  // Parenthesize negatives so they can sit inside products.
  if (!s.empty() && s[0] == '-') return "(" + s + ")";
  return s;
}

TimeMatrixPtr scalar_expr(const std::string& text) {
  return std::make_shared<ExprMatrix>(1, 1, std::vector<std::string>{text});
}

// Resolves defaults + overrides, rejecting unknown parameter names.
std::map<std::string, double> resolve(const CatalogEntry& entry,
                                      const std::map<std::string, double>& in) {
  std::map<std::string, double> out = entry.defaults;
  for (const auto& [k, v] : in) {
    auto it = out.find(k);
    if (it == out.end())
      throw SchemaError("catalog " + entry.id + ": unknown parameter '" + k +
                        "'");
    it->second = v;
  }
  return out;
}

// x' = [lambda0 + a t sin t] x has the closed-form exponent
// lambda0 (t-s) + a [sin t - t cos t - sin s + s cos s].
std::function<double(double, double)> oscillatory_log_phi(double lambda0,
                                                          double a) {
  return [lambda0, a](double t, double s) {
    return lambda0 * (t - s) + a * (std::sin(t) - t * std::cos(t) -
                                    std::sin(s) + s * std::cos(s));
  };
}

void require_oscillatory_params(const std::string& id, double lambda0,
                                double a) {
  if (!(lambda0 < a && a < 0.0))
    throw SchemaError("catalog " + id + ": requires lambda0 < a < 0");
}

}  // namespace

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = {
      {"kalman_cc",
       {},
       "scalar plant x' = -t x + sqrt(2(t-1)) e^(-t+1/2) u on [1, inf); "
       "controllable on every window, with window gramian bounds that decay "
       "in the window start"},
      {"barreira",
       {{"lambda0", -2.0}, {"a", -1.0}},
       "scalar input-free plant x' = [lambda0 + a t sin t] x, lambda0 < a < "
       "0; oscillatory exponent whose growth constants are nonuniform in the "
       "start time"},
      {"nucc_bounded_b",
       {{"lambda0", -0.2},
        {"a", -0.1},
        {"b0", 1.0},
        {"b1", 1.0},
        {"beta0", 0.0},
        {"beta1", 0.0}},
       "oscillatory-exponent plant with a scalar input channel b(t) swinging "
       "between b0 e^(-beta0 t) and b1 e^(beta1 t); defaults give b == 1"},
      {"lti_scalar",
       {{"A", -1.0}, {"B", 1.0}},
       "constant scalar plant x' = A x + B u"},
  };
  return entries;
}

SystemDef make_catalog_system(const CatalogRef& ref) {
  const CatalogEntry* entry = nullptr;
  for (const auto& e : catalog_entries())
    if (e.id == ref.id) {
      entry = &e;
      break;
    }
  if (!entry)
    throw SchemaError("catalog: unknown id '" + ref.id + "'");
  const auto p = resolve(*entry, ref.params);

  SystemDef sys;
  sys.name = ref.id;
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.catalog = CatalogRef{ref.id, p};

  if (ref.id == "kalman_cc") {
    sys.domain = Domain{1.0, std::numeric_limits<double>::infinity()};
    sys.A = scalar_expr("-t");
    sys.B = std::make_shared<CallbackMatrix>(
        "kalman_cc_b", 1, 1, [](double t, Eigen::MatrixXd& out) {
          out(0, 0) = std::sqrt(2.0 * (t - 1.0)) * std::exp(-t + 0.5);
        });
    sys.analytic_log_phi = [](double t, double s) {
      return 0.5 * (s * s - t * t);
    };
    return sys;
  }

  if (ref.id == "barreira") {
    const double lambda0 = p.at("lambda0"), a = p.at("a");
    require_oscillatory_params(ref.id, lambda0, a);
    sys.A = scalar_expr(num(lambda0) + " + " + num(a) + "*t*sin(t)");
    sys.B = scalar_expr("0");
    sys.analytic_log_phi = oscillatory_log_phi(lambda0, a);
    return sys;
  }

  if (ref.id == "nucc_bounded_b") {
    const double lambda0 = p.at("lambda0"), a = p.at("a");
    const double b0 = p.at("b0"), b1 = p.at("b1");
    const double beta0 = p.at("beta0"), beta1 = p.at("beta1");
    require_oscillatory_params(ref.id, lambda0, a);
    if (!(b0 > 0.0) || !(b1 > 0.0) || b0 > b1)
      throw SchemaError("catalog nucc_bounded_b: requires 0 < b0 <= b1");
    if (beta0 < 0.0 || beta1 < 0.0)
      throw SchemaError("catalog nucc_bounded_b: requires beta0, beta1 >= 0");
    sys.A = scalar_expr(num(lambda0) + " + " + num(a) + "*t*sin(t)");
    // b(t) sweeps the band [b0 e^(-beta0 t), b1 e^(beta1 t)].
    const std::string lo = num(b0) + "*exp(" + num(-beta0) + "*t)";
    const std::string hi = num(b1) + "*exp(" + num(beta1) + "*t)";
    sys.B = scalar_expr(lo + " + (" + hi + " - " + lo + ")*(1 + cos(t))/2");
    sys.analytic_log_phi = oscillatory_log_phi(lambda0, a);
    return sys;
  }

  if (ref.id == "lti_scalar") {
    const double A = p.at("A"), B = p.at("B");
    sys.A = scalar_expr(num(A));
    sys.B = scalar_expr(num(B));
    sys.analytic_log_phi = [A](double t, double s) { return A * (t - s); };
    return sys;
  }

  throw SchemaError("catalog: unhandled id '" + ref.id + "'");
}

SystemDef make_catalog_system(const std::string& id) {
  return make_catalog_system(CatalogRef{id, {}});
}

}  // namespace nucc
