#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nucc/expression.hpp"

namespace nucc {

// Closed time interval [t_min, t_max] inside [0, inf). t_max may be +inf.
struct Domain {
  double t_min = 0.0;
  double t_max = std::numeric_limits<double>::infinity();

  bool contains(double t) const { return t >= t_min && t <= t_max; }
  // Throws PreconditionError naming `who` when t is outside the interval.
  void require(double t, const char* who) const;

  nlohmann::json to_json() const;
  static Domain from_json(const nlohmann::json& j);
};

// A time-dependent real matrix. Implementations must be pure functions of t
// and safe to evaluate concurrently.
class TimeMatrix {
 public:
  virtual ~TimeMatrix() = default;
  virtual int rows() const = 0;
  virtual int cols() const = 0;
  virtual void eval(double t, Eigen::MatrixXd& out) const = 0;
  Eigen::MatrixXd operator()(double t) const {
    Eigen::MatrixXd m(rows(), cols());
    eval(t, m);
    return m;
  }
  // Serializable description; see docs/formats.md for the accepted kinds.
  virtual nlohmann::json spec_json() const = 0;
};

using TimeMatrixPtr = std::shared_ptr<const TimeMatrix>;

// Matrix whose entries are scalar expressions in t (row-major text entries).
class ExprMatrix final : public TimeMatrix {
 public:
  ExprMatrix(int rows, int cols, std::vector<std::string> entries);
  int rows() const override { return rows_; }
  int cols() const override { return cols_; }
  void eval(double t, Eigen::MatrixXd& out) const override;
  nlohmann::json spec_json() const override;

 private:
  int rows_, cols_;
  std::vector<expr::ScalarFn> fns_;  // row-major
};

// Uniformly spaced samples with linear interpolation between them; constant
// extension outside the sampled range. Needs dt > 0 and at least 2 samples.
class SampledMatrix final : public TimeMatrix {
 public:
  SampledMatrix(double t0, double dt, std::vector<Eigen::MatrixXd> samples);
  int rows() const override { return static_cast<int>(samples_[0].rows()); }
  int cols() const override { return static_cast<int>(samples_[0].cols()); }
  void eval(double t, Eigen::MatrixXd& out) const override;
  nlohmann::json spec_json() const override;

 private:
  double t0_, dt_;
  std::vector<Eigen::MatrixXd> samples_;
};

// In-process callback. Not reloadable from JSON; spec_json records the name
// so reports stay meaningful.
class CallbackMatrix final : public TimeMatrix {
 public:
  using Fn = std::function<void(double, Eigen::MatrixXd&)>;
  CallbackMatrix(std::string name, int rows, int cols, Fn fn)
      : name_(std::move(name)), rows_(rows), cols_(cols), fn_(std::move(fn)) {}
  int rows() const override { return rows_; }
  int cols() const override { return cols_; }
  void eval(double t, Eigen::MatrixXd& out) const override {
    out.resize(rows_, cols_);
    fn_(t, out);
  }
  nlohmann::json spec_json() const override;

 private:
  std::string name_;
  int rows_, cols_;
  Fn fn_;
};

struct CatalogRef {
  std::string id;
  std::map<std::string, double> params;  // ordered => stable serialization
};

// An LTV plant x' = A(t)x + B(t)u on a time domain.
struct SystemDef {
  std::string name;
  int state_dim = 1;
  int input_dim = 1;
  TimeMatrixPtr A;
  TimeMatrixPtr B;
  Domain domain;
  std::optional<CatalogRef> catalog;
  // Closed-form ln|Phi(t,s)| for scalar catalog entries that have one.
  std::function<double(double, double)> analytic_log_phi;

  // Checks dimensions and domain sanity; throws SchemaError on violation.
  void validate() const;

  nlohmann::json to_json() const;
  static SystemDef from_json(const nlohmann::json& j);
};

// (A(t), B(t)) with a domain check.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> evaluate(const SystemDef& sys,
                                                     double t);

}  // namespace nucc
