#include "clcrc/milp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "clcrc/errors.hpp"

namespace clcrc {

namespace {

// LP names may not contain arithmetic or bracket characters.
std::string lp_name(const std::string& s) {
  std::string out = s;
  for (char& ch : out) {
    if (ch == '[' || ch == ']' || ch == ',' || ch == ' ' || ch == '+' || ch == '-' || ch == ':' ||
        ch == '<' || ch == '>' || ch == '=' || ch == '*' || ch == '/' || ch == '^') {
      ch = '_';
    }
  }
  return out;
}

void write_terms(std::ostream& out, const std::vector<std::pair<std::size_t, double>>& terms,
                 const std::vector<MilpColumn>& cols) {
  if (terms.empty()) {
    out << " 0 " << lp_name(cols.front().name);
    return;
  }
  std::size_t on_line = 0;
  for (const auto& [j, a] : terms) {
    out << (a < 0 ? " - " : " + ") << std::abs(a) << ' ' << lp_name(cols[j].name);
    if (++on_line % 8 == 0) out << "\n   ";
  }
}

}  // namespace

std::size_t MilpInstance::add_column(std::string name, double lower, double upper, double cost,
                                     bool integer) {
  if (lower > upper) throw UsageError("column '" + name + "' has lower bound above upper bound");
  columns_.push_back({std::move(name), lower, upper, cost, integer});
  return columns_.size() - 1;
}

std::size_t MilpInstance::add_row(std::string name, double lower, double upper,
                                  std::vector<std::pair<std::size_t, double>> terms) {
  for (const auto& t : terms) {
    if (t.first >= columns_.size()) throw UsageError("row '" + name + "' references unknown column");
  }
  rows_.push_back({std::move(name), lower, upper, std::move(terms)});
  return rows_.size() - 1;
}

std::size_t MilpInstance::binaries() const {
  return static_cast<std::size_t>(
      std::count_if(columns_.begin(), columns_.end(), [](const MilpColumn& c) { return c.integer; }));
}

double MilpInstance::evaluate(const std::vector<double>& x) const {
  double v = objective_constant;
  for (std::size_t j = 0; j < columns_.size(); ++j) v += columns_[j].cost * x.at(j);
  return v;
}

double MilpInstance::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    const auto& c = columns_[j];
    worst = std::max({worst, c.lower - x.at(j), x.at(j) - c.upper});
    if (c.integer) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  for (const auto& r : rows_) {
    double act = 0.0;
    for (const auto& [j, a] : r.terms) act += a * x[j];
    worst = std::max({worst, r.lower - act, act - r.upper});
  }
  return worst;
}

void MilpInstance::write_lp(std::ostream& out) const {
  out << std::setprecision(12);
  out << "\\ objective constant " << objective_constant << "\nMinimize\n obj:";
  std::vector<std::pair<std::size_t, double>> obj;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].cost != 0.0) obj.emplace_back(j, columns_[j].cost);
  }
  if (!columns_.empty()) write_terms(out, obj, columns_);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    const std::string name = lp_name(r.name);
    if (r.lower == r.upper) {
      out << ' ' << name << ':';
      write_terms(out, r.terms, columns_);
      out << " = " << r.upper << '\n';
      continue;
    }
    if (std::isfinite(r.lower)) {
      out << ' ' << name << (std::isfinite(r.upper) ? "_lo" : "") << ':';
      write_terms(out, r.terms, columns_);
      out << " >= " << r.lower << '\n';
    }
    if (std::isfinite(r.upper)) {
      out << ' ' << name << (std::isfinite(r.lower) ? "_up" : "") << ':';
      write_terms(out, r.terms, columns_);
      out << " <= " << r.upper << '\n';
    }
  }
  out << "Bounds\n";
  for (const auto& c : columns_) {
    const std::string name = lp_name(c.name);
    if (c.lower == c.upper) {
      out << ' ' << name << " = " << c.lower << '\n';
    } else if (!std::isfinite(c.lower) && !std::isfinite(c.upper)) {
      out << ' ' << name << " free\n";
    } else {
      out << ' ';
      if (std::isfinite(c.lower)) out << c.lower; else out << "-inf";
      out << " <= " << name << " <= ";
      if (std::isfinite(c.upper)) out << c.upper; else out << "+inf";
      out << '\n';
    }
  }
  bool any = false;
  for (const auto& c : columns_) {
    if (!c.integer) continue;
    if (!any) out << "General\n";
    any = true;
    out << ' ' << lp_name(c.name) << '\n';
  }
  out << "End\n";
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Error: return "error";
  }
  return "error";
}

}  // namespace clcrc
