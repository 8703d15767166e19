// MILP backend on the bundled HiGHS solver.

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "Highs.h"
#include "clcrc/errors.hpp"
#include "clcrc/milp.hpp"

namespace clcrc {

namespace {

double to_highs(double v, double inf) {
  if (v == kInf) return inf;
  if (v == -kInf) return -inf;
  return v;
}

HighsModel to_model(const MilpInstance& instance, double inf, bool relax) {
  HighsModel model;
  HighsLp& lp = model.lp_;
  const auto& cols = instance.columns();
  const auto& rows = instance.rows();
  lp.num_col_ = static_cast<HighsInt>(cols.size());
  lp.num_row_ = static_cast<HighsInt>(rows.size());
  lp.sense_ = ObjSense::kMinimize;
  lp.offset_ = instance.objective_constant;
  for (const auto& c : cols) {
    lp.col_cost_.push_back(c.cost);
    lp.col_lower_.push_back(to_highs(c.lower, inf));
    lp.col_upper_.push_back(to_highs(c.upper, inf));
    lp.col_names_.push_back(c.name);
    lp.integrality_.push_back(c.integer && !relax ? HighsVarType::kInteger
                                                   : HighsVarType::kContinuous);
  }
  lp.a_matrix_.format_ = MatrixFormat::kRowwise;
  lp.a_matrix_.num_col_ = lp.num_col_;
  lp.a_matrix_.num_row_ = lp.num_row_;
  lp.a_matrix_.start_.assign(1, 0);
  for (const auto& r : rows) {
    lp.row_lower_.push_back(to_highs(r.lower, inf));
    lp.row_upper_.push_back(to_highs(r.upper, inf));
    lp.row_names_.push_back(r.name);
    for (const auto& [j, a] : r.terms) {
      lp.a_matrix_.index_.push_back(static_cast<HighsInt>(j));
      lp.a_matrix_.value_.push_back(a);
    }
    lp.a_matrix_.start_.push_back(static_cast<HighsInt>(lp.a_matrix_.index_.size()));
  }
  return model;
}

void configure(Highs& h, const SolveOptions& options) {
  h.setOptionValue("output_flag", options.log);
  h.setOptionValue("threads", 1);
  h.setOptionValue("random_seed", static_cast<HighsInt>(options.random_seed));
  h.setOptionValue("mip_rel_gap", options.mip_gap);
  h.setOptionValue("mip_abs_gap", 1e-9);
  if (std::isfinite(options.time_limit)) h.setOptionValue("time_limit", options.time_limit);
}

std::vector<std::string> conflict_rows(const MilpInstance& instance, const SolveOptions& options) {
  Highs h;
  configure(h, options);
  h.setOptionValue("output_flag", false);
  h.setOptionValue("iis_strategy", kIisStrategyFromLp + kIisStrategyIrreducible);
  if (h.passModel(to_model(instance, h.getInfinity(), true)) == HighsStatus::kError) return {};
  h.run();
  if (h.getModelStatus() != HighsModelStatus::kInfeasible) {
    return {"(relaxation feasible; infeasibility comes from integrality)"};
  }
  HighsIis iis;
  if (h.getIis(iis) == HighsStatus::kError || !iis.valid_) return {};
  std::vector<std::string> names;
  for (HighsInt r : iis.row_index_) names.push_back(instance.rows().at(static_cast<std::size_t>(r)).name);
  for (HighsInt c : iis.col_index_) {
    names.push_back("bound:" + instance.columns().at(static_cast<std::size_t>(c)).name);
  }
  return names;
}

class HighsBackend final : public MilpBackend {
 public:
  std::string name() const override { return "highs"; }

  SolveResult solve(const MilpInstance& instance, const SolveOptions& options,
                    const std::vector<double>* warm_start) override {
    SolveResult out;
    if (instance.columns().empty()) {
      // Everything was fixed before solving; HiGHS reports such models as empty.
      const bool ok = std::all_of(instance.rows().begin(), instance.rows().end(),
                                  [](const MilpRow& r) { return r.lower <= 0.0 && 0.0 <= r.upper; });
      out.status = ok ? SolveStatus::Optimal : SolveStatus::Infeasible;
      out.objective = out.bound = instance.objective_constant;
      out.warm_start_accepted = warm_start != nullptr;
      return out;
    }
    Highs h;
    configure(h, options);
    if (h.passModel(to_model(instance, h.getInfinity(), false)) == HighsStatus::kError) {
      throw SolverError("HiGHS rejected the model");
    }
    if (const char* path = std::getenv("CLCRC_WRITE_MODEL")) h.writeModel(path);
    if (warm_start != nullptr) {
      if (warm_start->size() != instance.columns().size()) {
        throw UsageError("warm start length differs from column count");
      }
      HighsSolution start;
      start.col_value = *warm_start;
      start.value_valid = true;
      out.warm_start_accepted = h.setSolution(start) != HighsStatus::kError;
    }
    const HighsStatus run = h.run();
    const HighsModelStatus ms = h.getModelStatus();
    const HighsInfo& info = h.getInfo();
    const bool has_point = info.primal_solution_status == kSolutionStatusFeasible;
    if (run == HighsStatus::kError && !has_point) {
      out.status = SolveStatus::Error;
      out.message = "HiGHS error: " + h.modelStatusToString(ms);
      return out;
    }
    switch (ms) {
      case HighsModelStatus::kOptimal:
        out.status = SolveStatus::Optimal;
        break;
      case HighsModelStatus::kInfeasible:
        out.status = SolveStatus::Infeasible;
        break;
      case HighsModelStatus::kUnbounded:
        out.status = SolveStatus::Unbounded;
        break;
      case HighsModelStatus::kUnboundedOrInfeasible:
        out.status = SolveStatus::Infeasible;
        break;
      default:
        out.status = has_point ? SolveStatus::Feasible : SolveStatus::Error;
        break;
    }
    out.message = h.modelStatusToString(ms);
    if (out.status == SolveStatus::Infeasible) {
      out.conflict = conflict_rows(instance, options);
      return out;
    }
    if (has_point) {
      out.x = h.getSolution().col_value;
      out.objective = info.objective_function_value;
      out.bound = info.mip_dual_bound;
      out.gap = info.mip_gap;
      // Snap integers so downstream logic sees clean binaries.
      const auto& cols = instance.columns();
      for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].integer) out.x[j] = std::round(out.x[j]);
      }
    }
    return out;
  }
};

}  // namespace

std::unique_ptr<MilpBackend> make_backend(const std::string& name) {
  if (name == "highs") return std::make_unique<HighsBackend>();
  throw SolverError("unknown MILP backend '" + name + "' (available: highs)");
}

}  // namespace clcrc
