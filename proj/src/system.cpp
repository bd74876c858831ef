#include "nucc/system.hpp"

#include <cmath>
#include <sstream>

#include "nucc/errors.hpp"

namespace nucc {

// Defined in catalog.cpp; used when a spec names a catalog entry.
SystemDef make_catalog_system(const CatalogRef& ref);

void Domain::require(double t, const char* who) const {
  if (!contains(t)) {
    std::ostringstream os;
    os << who << ": t=" << t << " outside domain [" << t_min << ", " << t_max
       << "]";
    throw PreconditionError(os.str());
  }
}

nlohmann::json Domain::to_json() const {
  nlohmann::json j;
  j["t_min"] = t_min;
  j["t_max"] = std::isfinite(t_max) ? nlohmann::json(t_max) : nlohmann::json();
  return j;
}

Domain Domain::from_json(const nlohmann::json& j) {
  Domain d;
  if (!j.is_object()) throw SchemaError("domain: expected an object");
  d.t_min = j.value("t_min", 0.0);
  if (j.contains("t_max") && !j.at("t_max").is_null())
    d.t_max = j.at("t_max").get<double>();
  if (!(d.t_min >= 0.0))
    throw SchemaError("domain: t_min must be >= 0");
  if (!(d.t_max > d.t_min))
    throw SchemaError("domain: t_max must exceed t_min");
  return d;
}

ExprMatrix::ExprMatrix(int rows, int cols, std::vector<std::string> entries)
    : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0)
    throw SchemaError("expression matrix: dimensions must be positive");
  if (static_cast<int>(entries.size()) != rows * cols)
    throw SchemaError("expression matrix: entry count does not match shape");
  fns_.reserve(entries.size());
  for (const auto& e : entries) fns_.push_back(expr::ScalarFn::parse(e));
}

void ExprMatrix::eval(double t, Eigen::MatrixXd& out) const {
  out.resize(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = fns_[i * cols_ + j](t);
}

nlohmann::json ExprMatrix::spec_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < rows_; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < cols_; ++j) row.push_back(fns_[i * cols_ + j].source());
    rows.push_back(std::move(row));
  }
  return {{"kind", "expr"}, {"entries", std::move(rows)}};
}

SampledMatrix::SampledMatrix(double t0, double dt,
                             std::vector<Eigen::MatrixXd> samples)
    : t0_(t0), dt_(dt), samples_(std::move(samples)) {
  if (!(dt_ > 0.0)) throw SchemaError("sampled matrix: spacing must be > 0");
  if (samples_.size() < 2)
    throw SchemaError("sampled matrix: need at least 2 samples");
  for (const auto& m : samples_)
    if (m.rows() != samples_[0].rows() || m.cols() != samples_[0].cols())
      throw SchemaError("sampled matrix: inconsistent sample shapes");
}

void SampledMatrix::eval(double t, Eigen::MatrixXd& out) const {
  const int last = static_cast<int>(samples_.size()) - 1;
  double u = (t - t0_) / dt_;
  int i = static_cast<int>(std::floor(u));
  if (i < 0) i = 0;
  if (i > last - 1) i = last - 1;
  double w = u - i;
  if (w < 0.0) w = 0.0;
  if (w > 1.0) w = 1.0;
  out = (1.0 - w) * samples_[i] + w * samples_[i + 1];
}

nlohmann::json SampledMatrix::spec_json() const {
  nlohmann::json vals = nlohmann::json::array();
  for (const auto& m : samples_) {
    nlohmann::json flat = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
    vals.push_back(std::move(flat));
  }
  return {{"kind", "samples"}, {"t0", t0_},          {"dt", dt_},
          {"rows", rows()},    {"cols", cols()},     {"values", std::move(vals)}};
}

nlohmann::json CallbackMatrix::spec_json() const {
  return {{"kind", "callback"}, {"name", name_}, {"rows", rows_},
          {"cols", cols_}};
}

void SystemDef::validate() const {
  if (state_dim <= 0 || input_dim <= 0)
    throw SchemaError("system: dimensions must be positive");
  if (!A || !B) throw SchemaError("system: missing A or B spec");
  if (A->rows() != state_dim || A->cols() != state_dim)
    throw SchemaError("system: A must be state_dim x state_dim");
  if (B->rows() != state_dim || B->cols() != input_dim)
    throw SchemaError("system: B must be state_dim x input_dim");
  if (!(domain.t_min >= 0.0) || !(domain.t_max > domain.t_min))
    throw SchemaError("system: bad domain");
}

nlohmann::json SystemDef::to_json() const {
  nlohmann::json j;
  j["state_dim"] = state_dim;
  j["input_dim"] = input_dim;
  j["a_spec"] = A->spec_json();
  j["b_spec"] = B->spec_json();
  j["domain"] = domain.to_json();
  if (catalog) {
    nlohmann::json c;
    c["id"] = catalog->id;
    c["params"] = catalog->params;
    j["catalog"] = std::move(c);
  }
  return j;
}

namespace {

TimeMatrixPtr matrix_from_json(const nlohmann::json& j, const char* which) {
  if (!j.is_object() || !j.contains("kind"))
    throw SchemaError(std::string(which) + ": expected an object with 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "expr") {
    const auto& rows = j.at("entries");
    if (!rows.is_array() || rows.empty())
      throw SchemaError(std::string(which) + ": 'entries' must be a nonempty array");
    const int nr = static_cast<int>(rows.size());
    const int nc = static_cast<int>(rows[0].size());
    std::vector<std::string> flat;
    flat.reserve(static_cast<size_t>(nr) * nc);
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != nc)
        throw SchemaError(std::string(which) + ": ragged entry rows");
      for (const auto& e : row) flat.push_back(e.get<std::string>());
    }
    return std::make_shared<ExprMatrix>(nr, nc, std::move(flat));
  }
  if (kind == "samples") {
    const double t0 = j.at("t0").get<double>();
    const double dt = j.at("dt").get<double>();
    const int nr = j.at("rows").get<int>();
    const int nc = j.at("cols").get<int>();
    std::vector<Eigen::MatrixXd> samples;
    for (const auto& flat : j.at("values")) {
      if (static_cast<int>(flat.size()) != nr * nc)
        throw SchemaError(std::string(which) + ": sample size mismatch");
      Eigen::MatrixXd m(nr, nc);
      int k = 0;
      for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nc; ++c) m(r, c) = flat[k++].get<double>();
      samples.push_back(std::move(m));
    }
    return std::make_shared<SampledMatrix>(t0, dt, std::move(samples));
  }
  if (kind == "callback")
    throw SchemaError(std::string(which) +
                      ": callback specs cannot be loaded from JSON");
  throw SchemaError(std::string(which) + ": unknown spec kind '" + kind + "'");
}

}  // namespace

SystemDef SystemDef::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("system: expected a JSON object");
  if (j.contains("catalog")) {
    const auto& c = j.at("catalog");
    CatalogRef ref;
    ref.id = c.at("id").get<std::string>();
    if (c.contains("params"))
      for (auto it = c.at("params").begin(); it != c.at("params").end(); ++it)
        ref.params[it.key()] = it.value().get<double>();
    return make_catalog_system(ref);
  }
  SystemDef sys;
  sys.state_dim = j.at("state_dim").get<int>();
  sys.input_dim = j.at("input_dim").get<int>();
  sys.A = matrix_from_json(j.at("a_spec"), "a_spec");
  sys.B = matrix_from_json(j.at("b_spec"), "b_spec");
  sys.domain = j.contains("domain") ? Domain::from_json(j.at("domain"))
                                    : Domain{};
  sys.name = j.value("name", std::string("custom"));
  sys.validate();
  return sys;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> evaluate(const SystemDef& sys,
                                                     double t) {
  sys.domain.require(t, "evaluate");
  return {(*sys.A)(t), (*sys.B)(t)};
}

}  // namespace nucc
