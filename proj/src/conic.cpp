// SPDX-License-Identifier: Apache-2.0
#include "envforge/conic.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "envforge/errors.hpp"
#include "envforge/ipm.hpp"

namespace envforge::conic {

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::numerical_limit: return "numerical-limit";
  }
  return "unknown";
}

int ConicProblem::add_variable(std::string name, double lb, double ub) {
  if (std::isnan(lb) || std::isnan(ub) || lb > ub)
    throw InvalidArgument("variable '" + name + "': invalid bounds");
  vars_.push_back({std::move(name), lb, ub});
  return static_cast<int>(vars_.size()) - 1;
}

int ConicProblem::add_variables(const std::string& base, int count, double lb, double ub) {
  if (count < 1) throw InvalidArgument("add_variables: count must be >= 1");
  int first = num_variables();
  for (int i = 0; i < count; ++i)
    add_variable(base + "[" + std::to_string(i) + "]", lb, ub);
  return first;
}

void ConicProblem::set_variable_bounds(int var, double lb, double ub) {
  if (var < 0 || var >= num_variables())
    throw InvalidArgument("set_variable_bounds: unknown variable index " + std::to_string(var));
  if (std::isnan(lb) || std::isnan(ub) || lb > ub)
    throw InvalidArgument("variable '" + vars_[var].name + "': invalid bounds");
  vars_[var].lb = lb;
  vars_[var].ub = ub;
}

void ConicProblem::set_objective(Sense sense, std::vector<LinearTerm> terms) {
  sense_ = sense;
  objective_ = std::move(terms);
}

void ConicProblem::add_row(LinearRow row) { rows_.push_back(std::move(row)); }

void ConicProblem::add_row(std::vector<LinearTerm> terms, Relation rel, double rhs,
                           std::string label) {
  rows_.push_back({std::move(terms), rel, rhs, std::move(label)});
}

void ConicProblem::add_soc(ConeBlock block) {
  if (block.entries.empty()) throw InvalidArgument("cone block must have at least one entry");
  cones_.push_back(std::move(block));
}

namespace {

void check_terms(const std::vector<LinearTerm>& terms, int nvar, const char* where) {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= nvar)
      throw InvalidArgument(std::string(where) + ": reference to unknown variable index " +
                            std::to_string(t.var));
    if (!std::isfinite(t.coeff))
      throw InvalidArgument(std::string(where) + ": non-finite coefficient");
  }
}

}  // namespace

void ConicProblem::validate() const {
  const int n = num_variables();
  check_terms(objective_, n, "objective");
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    check_terms(rows_[r].terms, n, ("row " + std::to_string(r)).c_str());
    if (!std::isfinite(rows_[r].rhs))
      throw InvalidArgument("row " + std::to_string(r) + ": non-finite rhs");
  }
  for (std::size_t c = 0; c < cones_.size(); ++c) {
    for (const auto& e : cones_[c].entries) {
      check_terms(e.terms, n, ("cone " + std::to_string(c)).c_str());
      if (!std::isfinite(e.constant))
        throw InvalidArgument("cone " + std::to_string(c) + ": non-finite constant");
    }
  }
}

namespace {

std::string fmt(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_num(const std::string& tok) {
  if (tok == "inf") return kInf;
  if (tok == "-inf") return -kInf;
  return std::strtod(tok.c_str(), nullptr);
}

void dump_terms(std::ostringstream& os, const std::vector<LinearTerm>& terms) {
  os << terms.size();
  for (const auto& t : terms) os << ' ' << t.var << ':' << fmt(t.coeff);
}

std::vector<LinearTerm> read_terms(std::istringstream& is) {
  std::size_t n;
  is >> n;
  std::vector<LinearTerm> terms(n);
  for (auto& t : terms) {
    std::string tok;
    is >> tok;
    auto colon = tok.find(':');
    if (colon == std::string::npos) throw InvalidArgument("conic parse: malformed term '" + tok + "'");
    t.var = std::atoi(tok.substr(0, colon).c_str());
    t.coeff = parse_num(tok.substr(colon + 1));
  }
  return terms;
}

// labels are stored URL-ish escaped so the format stays one-token-per-field
std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == ' ') out += "%20";
    else if (c == '%') out += "%25";
    else if (c == '\n') out += "%0A";
    else out += c;
  }
  return out.empty() ? "-" : out;
}

std::string unescape(const std::string& s) {
  if (s == "-") return "";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int hi = std::isdigit(s[i + 1]) ? s[i + 1] - '0' : 10 + (std::toupper(s[i + 1]) - 'A');
      int lo = std::isdigit(s[i + 2]) ? s[i + 2] - '0' : 10 + (std::toupper(s[i + 2]) - 'A');
      out += static_cast<char>(hi * 16 + lo);
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace

std::string ConicProblem::dump() const {
  std::ostringstream os;
  os << "envforge-conic 1\n";
  os << (sense_ == Sense::minimize ? "minimize" : "maximize") << '\n';
  os << "vars " << vars_.size() << '\n';
  for (const auto& v : vars_)
    os << "var " << escape(v.name) << ' ' << fmt(v.lb) << ' ' << fmt(v.ub) << '\n';
  os << "obj ";
  dump_terms(os, objective_);
  os << '\n';
  os << "rows " << rows_.size() << '\n';
  for (const auto& r : rows_) {
    os << "row " << (r.rel == Relation::le ? "le" : "eq") << ' ' << fmt(r.rhs) << ' '
       << escape(r.label) << ' ';
    dump_terms(os, r.terms);
    os << '\n';
  }
  os << "cones " << cones_.size() << '\n';
  for (const auto& c : cones_) {
    os << "cone " << c.entries.size() << ' ' << escape(c.label) << '\n';
    for (const auto& e : c.entries) {
      os << "entry " << fmt(e.constant) << ' ';
      dump_terms(os, e.terms);
      os << '\n';
    }
  }
  return os.str();
}

ConicProblem ConicProblem::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw InvalidArgument("conic parse: unexpected end of input");
    return std::istringstream(line);
  };

  auto header = next_line();
  std::string magic;
  int version = 0;
  header >> magic >> version;
  if (magic != "envforge-conic" || version != 1)
    throw InvalidArgument("conic parse: bad header");

  ConicProblem p;
  auto sense_line = next_line();
  std::string sense;
  sense_line >> sense;
  Sense s = sense == "maximize" ? Sense::maximize : Sense::minimize;

  std::string kw;
  std::size_t count;
  {
    auto is = next_line();
    is >> kw >> count;
    if (kw != "vars") throw InvalidArgument("conic parse: expected 'vars'");
    for (std::size_t i = 0; i < count; ++i) {
      auto vl = next_line();
      std::string tag, name, lb, ub;
      vl >> tag >> name >> lb >> ub;
      if (tag != "var") throw InvalidArgument("conic parse: expected 'var'");
      p.add_variable(unescape(name), parse_num(lb), parse_num(ub));
    }
  }
  {
    auto is = next_line();
    is >> kw;
    if (kw != "obj") throw InvalidArgument("conic parse: expected 'obj'");
    p.set_objective(s, read_terms(is));
  }
  {
    auto is = next_line();
    is >> kw >> count;
    if (kw != "rows") throw InvalidArgument("conic parse: expected 'rows'");
    for (std::size_t i = 0; i < count; ++i) {
      auto rl = next_line();
      std::string tag, rel, rhs, label;
      rl >> tag >> rel >> rhs >> label;
      if (tag != "row") throw InvalidArgument("conic parse: expected 'row'");
      LinearRow row;
      row.rel = rel == "eq" ? Relation::eq : Relation::le;
      row.rhs = parse_num(rhs);
      row.label = unescape(label);
      row.terms = read_terms(rl);
      p.add_row(std::move(row));
    }
  }
  {
    auto is = next_line();
    is >> kw >> count;
    if (kw != "cones") throw InvalidArgument("conic parse: expected 'cones'");
    for (std::size_t i = 0; i < count; ++i) {
      auto cl = next_line();
      std::string tag, label;
      std::size_t entries;
      cl >> tag >> entries >> label;
      if (tag != "cone") throw InvalidArgument("conic parse: expected 'cone'");
      ConeBlock block;
      block.label = unescape(label);
      for (std::size_t e = 0; e < entries; ++e) {
        auto el = next_line();
        std::string etag, cst;
        el >> etag >> cst;
        if (etag != "entry") throw InvalidArgument("conic parse: expected 'entry'");
        AffineExpr expr;
        expr.constant = parse_num(cst);
        expr.terms = read_terms(el);
        block.entries.push_back(std::move(expr));
      }
      p.add_soc(std::move(block));
    }
  }
  p.validate();
  return p;
}

namespace {

SolveOptions resolve_backend(const SolveOptions& options) {
  SolveOptions opts = options;
  if (opts.backend.empty()) {
    if (const char* env = std::getenv("ENVFORGE_BACKEND")) opts.backend = env;
    if (opts.backend.empty()) opts.backend = "ipm";
  }
  if (opts.backend == "ipm-strict") {
    opts.feastol = std::min(opts.feastol, 1e-9);
    opts.reltol = std::min(opts.reltol, 1e-9);
  } else if (opts.backend != "ipm") {
    throw InvalidArgument("unknown conic backend '" + opts.backend +
                          "' (available: ipm, ipm-strict)");
  }
  return opts;
}

}  // namespace

std::vector<std::string> backend_names() { return {"ipm", "ipm-strict"}; }

SolveReport solve(const ConicProblem& problem, const SolveOptions& options) {
  problem.validate();
  SolveOptions opts = resolve_backend(options);
  SolveReport report = ipm::solve_hsd(problem, opts);
  report.backend = opts.backend;
  return report;
}

SolveReport solve_lp(const ConicProblem& problem, const SolveOptions& options) {
  if (!problem.cones().empty())
    throw InvalidArgument("solve_lp: problem contains cone blocks");
  return solve(problem, options);
}

}  // namespace envforge::conic
