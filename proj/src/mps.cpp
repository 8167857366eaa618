#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fleetmix/mip.hpp"

namespace fleetmix {

namespace {

constexpr double kInfty = std::numeric_limits<double>::infinity();

std::string num(double v, bool full_precision) {
  char buf[32];
  std::snprintf(buf, sizeof buf, full_precision ? "%.17g" : "%.12g", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  std::string out = s;
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

char sense_char(lp::RowSense s) {
  switch (s) {
    case lp::RowSense::kLe: return 'L';
    case lp::RowSense::kGe: return 'G';
    case lp::RowSense::kEq: return 'E';
  }
  return 'E';
}

}  // namespace

MpsWriteResult export_mps(const MipModel& model, const std::string& name) {
  model.validate();
  MpsWriteResult out;

  std::set<std::string> seen;
  bool fixed_ok = true;
  auto check = [&](const std::string& n) {
    if (n.size() > 8 || !seen.insert(n).second) fixed_ok = false;
  };
  check("COST");
  for (const auto& c : model.constraints) check(c.name);
  seen.clear();
  for (const auto& v : model.variables) {
    if (v.name.size() > 8 || !seen.insert(v.name).second) fixed_ok = false;
  }
  out.free_format = !fixed_ok;
  const bool fp = out.free_format;  // free format carries full precision

  std::ostringstream os;
  os << "NAME          " << name << "\n";
  os << "ROWS\n";
  os << " N  COST\n";
  for (const auto& c : model.constraints)
    os << " " << sense_char(c.sense) << "  " << c.name << "\n";

  // column-major view of the constraint matrix
  std::vector<std::vector<std::pair<int, double>>> by_col(model.num_vars());
  for (int r = 0; r < model.num_constraints(); ++r)
    for (const auto& [j, coef] : model.constraints[r].terms)
      by_col[j].emplace_back(r, coef);

  os << "COLUMNS\n";
  bool in_int = false;
  int marker_id = 0;
  auto marker = [&](const char* kind) {
    os << "    MARK" << pad(std::to_string(marker_id++), 4)
       << "  'MARKER'                 '" << kind << "'\n";
  };
  auto entry = [&](const std::string& col, const std::string& row, double v) {
    if (fp)
      os << "    " << col << "  " << row << "  " << num(v, true) << "\n";
    else
      os << "    " << pad(col, 8) << "  " << pad(row, 8) << "  " << num(v, false)
         << "\n";
  };
  for (int j = 0; j < model.num_vars(); ++j) {
    const bool want_int = model.variables[j].kind == VarKind::kBinary;
    if (want_int && !in_int) {
      marker("INTORG");
      in_int = true;
    }
    if (!want_int && in_int) {
      marker("INTEND");
      in_int = false;
    }
    const std::string& cname = model.variables[j].name;
    if (model.objective[j] != 0.0) entry(cname, "COST", model.objective[j]);
    for (const auto& [r, coef] : by_col[j])
      entry(cname, model.constraints[r].name, coef);
    if (model.objective[j] == 0.0 && by_col[j].empty())
      entry(cname, "COST", 0.0);  // keep empty columns visible
  }
  if (in_int) marker("INTEND");

  os << "RHS\n";
  if (model.objective_constant != 0.0)
    entry("RHS", "COST", -model.objective_constant);
  for (const auto& c : model.constraints)
    if (c.rhs != 0.0) entry("RHS", c.name, c.rhs);

  os << "BOUNDS\n";
  for (const auto& v : model.variables) {
    auto bline = [&](const char* type, bool with_value, double value) {
      os << " " << type << " BND       ";
      if (fp)
        os << v.name;
      else
        os << pad(v.name, 8);
      if (with_value) os << "  " << num(value, fp);
      os << "\n";
    };
    if (v.lower == v.upper) {
      bline("FX", true, v.lower);
      continue;
    }
    if (v.lower == -kInfty)
      bline("MI", false, 0.0);
    else if (v.lower != 0.0)
      bline("LO", true, v.lower);
    if (v.upper == kInfty) {
      if (v.kind == VarKind::kBinary || v.lower == -kInfty) bline("PL", false, 0.0);
    } else {
      bline("UP", true, v.upper);
    }
  }
  os << "ENDATA\n";
  out.text = os.str();
  return out;
}

MipModel parse_mps(const std::string& text) {
  MipModel model;
  std::istringstream in(text);
  std::string line;
  enum Section { kNone, kRows, kColumns, kRhs, kRanges, kBounds, kDone };
  Section section = kNone;
  std::string obj_row;
  std::map<std::string, int> row_index;
  bool in_int = false;

  auto ensure_var = [&](const std::string& name) {
    auto it = model.var_index.find(name);
    if (it != model.var_index.end()) return it->second;
    // integer columns default to [0,1]; continuous to [0, +inf)
    if (in_int) return model.add_var(name, VarKind::kBinary, 0.0, 1.0);
    return model.add_var(name, VarKind::kContinuous, 0.0, kInfty);
  };

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*') continue;
    if (line[0] != ' ' && line[0] != '\t') {
      std::istringstream hs(line);
      std::string kw;
      hs >> kw;
      if (kw == "NAME") continue;
      if (kw == "ROWS") { section = kRows; continue; }
      if (kw == "COLUMNS") { section = kColumns; continue; }
      if (kw == "RHS") { section = kRhs; continue; }
      if (kw == "RANGES") { section = kRanges; continue; }
      if (kw == "BOUNDS") { section = kBounds; continue; }
      if (kw == "ENDATA") { section = kDone; break; }
      if (kw == "OBJSENSE" || kw == "OBJSENSE:") { section = kNone; continue; }
      throw std::runtime_error("MPS: unknown section " + kw);
    }
    std::istringstream ls(line);
    switch (section) {
      case kRows: {
        std::string sense, rname;
        ls >> sense >> rname;
        if (sense == "N") {
          if (obj_row.empty()) obj_row = rname;
          // extra free rows are ignored
        } else {
          lp::RowSense rs = sense == "L"   ? lp::RowSense::kLe
                            : sense == "G" ? lp::RowSense::kGe
                                           : lp::RowSense::kEq;
          if (sense != "L" && sense != "G" && sense != "E")
            throw std::runtime_error("MPS: bad row sense " + sense);
          row_index[rname] = model.num_constraints();
          model.add_constraint(rname, {}, rs, 0.0);
        }
        break;
      }
      case kColumns: {
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.size() >= 3 && tok[1] == "'MARKER'") {
          if (tok[2] == "'INTORG'") in_int = true;
          else if (tok[2] == "'INTEND'") in_int = false;
          break;
        }
        if (tok.size() < 3 || tok.size() % 2 == 0)
          throw std::runtime_error("MPS: malformed COLUMNS line: " + line);
        const int j = ensure_var(tok[0]);
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const std::string& rname = tok[k];
          const double v = std::stod(tok[k + 1]);
          if (rname == obj_row) {
            model.objective[j] = v;
          } else {
            auto it = row_index.find(rname);
            if (it == row_index.end())
              throw std::runtime_error("MPS: unknown row " + rname);
            model.constraints[it->second].terms.emplace_back(j, v);
          }
        }
        break;
      }
      case kRhs: {
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.size() < 3 || tok.size() % 2 == 0)
          throw std::runtime_error("MPS: malformed RHS line: " + line);
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const std::string& rname = tok[k];
          const double v = std::stod(tok[k + 1]);
          if (rname == obj_row) {
            model.objective_constant = -v;
          } else {
            auto it = row_index.find(rname);
            if (it == row_index.end())
              throw std::runtime_error("MPS: unknown RHS row " + rname);
            model.constraints[it->second].rhs = v;
          }
        }
        break;
      }
      case kRanges:
        throw std::runtime_error("MPS: RANGES section not supported");
      case kBounds: {
        std::string type, set, vname;
        ls >> type >> set >> vname;
        const int j = ensure_var(vname);
        MipVar& v = model.variables[j];
        double value = 0.0;
        if (type == "UP" || type == "LO" || type == "FX" || type == "UI" ||
            type == "LI") {
          if (!(ls >> value))
            throw std::runtime_error("MPS: bound needs a value: " + line);
        }
        if (type == "UP" || type == "UI") v.upper = value;
        else if (type == "LO" || type == "LI") v.lower = value;
        else if (type == "FX") v.lower = v.upper = value;
        else if (type == "MI") v.lower = -kInfty;
        else if (type == "PL") v.upper = kInfty;
        else if (type == "BV") { v.kind = VarKind::kBinary; v.lower = 0.0; v.upper = 1.0; }
        else throw std::runtime_error("MPS: unknown bound type " + type);
        break;
      }
      case kNone:
      case kDone:
        break;
    }
  }
  if (obj_row.empty()) throw std::runtime_error("MPS: no objective row");
  model.validate();
  return model;
}

}  // namespace fleetmix
