#pragma once

// Solver-neutral MILP in row form plus a backend interface.

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace clcrc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct MilpColumn {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  bool integer = false;
};

struct MilpRow {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
  std::vector<std::pair<std::size_t, double>> terms;
};

class MilpInstance {
 public:
  std::size_t add_column(std::string name, double lower, double upper, double cost = 0.0,
                         bool integer = false);
  std::size_t add_binary(std::string name, double cost = 0.0) {
    return add_column(std::move(name), 0.0, 1.0, cost, true);
  }
  std::size_t add_row(std::string name, double lower, double upper,
                      std::vector<std::pair<std::size_t, double>> terms);

  const std::vector<MilpColumn>& columns() const { return columns_; }
  const std::vector<MilpRow>& rows() const { return rows_; }
  MilpColumn& column(std::size_t j) { return columns_.at(j); }
  std::size_t binaries() const;

  double objective_constant = 0.0;

  /// Objective value of `x` (including the constant).
  double evaluate(const std::vector<double>& x) const;
  /// Largest bound or row violation of `x`, and integrality violation.
  double max_violation(const std::vector<double>& x) const;

  /// CPLEX LP text format.
  void write_lp(std::ostream& out) const;

 private:
  std::vector<MilpColumn> columns_;
  std::vector<MilpRow> rows_;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, Error };
std::string to_string(SolveStatus s);

struct SolveOptions {
  double mip_gap = 1e-3;
  double time_limit = kInf;  ///< seconds
  unsigned random_seed = 0;
  bool log = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Error;
  std::vector<double> x;
  double objective = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  bool warm_start_accepted = false;
  /// Names of constraints in an irreducible infeasible subset, when known.
  std::vector<std::string> conflict;
  std::string message;

  bool has_solution() const {
    return status == SolveStatus::Optimal || status == SolveStatus::Feasible;
  }
};

class MilpBackend {
 public:
  virtual ~MilpBackend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const MilpInstance& instance, const SolveOptions& options,
                            const std::vector<double>* warm_start = nullptr) = 0;
};

/// Backend by name; currently "highs". Throws SolverError if unknown.
std::unique_ptr<MilpBackend> make_backend(const std::string& name);

}  // namespace clcrc
