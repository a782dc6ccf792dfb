#include "dflow/flow_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace dflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

CubeId parse_paren_cube(const std::string& s) {
  const std::string x = trim(s);
  if (x.size() < 2 || x.front() != '(' || x.back() != ')') throw FormatError("expected (coords), got '" + x + "'");
  return parse_cube(x.substr(1, x.size() - 2));
}

std::size_t checked_index(const Tiling& t, const CubeId& k) {
  if (!t.contains(k)) throw FormatError("cube (" + format_cube(k) + ") outside tiling");
  return t.index(k);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_movement(const Tiling& t, const Movement& m) {
  std::string out;
  if (const auto* s = std::get_if<SMovement>(&m)) {
    out = "S:";
    for (std::size_t i = 0; i < s->pairs.size(); ++i) {
      out += i ? "; " : " ";
      out += "(" + format_cube(t.coords(s->pairs[i].first)) + ")-(" + format_cube(t.coords(s->pairs[i].second)) + ")";
    }
    return out;
  }
  out = "E:";
  const auto& e = std::get<EMovement>(m);
  for (std::size_t i = 0; i < e.sequences.size(); ++i) {
    const auto& seq = e.sequences[i];
    out += i ? " | " : " ";
    out += "[(" + format_cube(seq.array.lo()) + ")..(" + format_cube(seq.array.hi()) +
           ") axis=" + std::to_string(seq.array.array_axis()) + "] idx=";
    for (std::size_t j = 0; j < seq.positions.size(); ++j) {
      if (j) out += ',';
      out += std::to_string(seq.positions[j]);
    }
  }
  return out;
}

Movement parse_movement(const Tiling& t, const std::string& raw) {
  const std::string line = trim(raw);
  if (line.rfind("S:", 0) == 0) {
    SMovement s;
    const std::string body = trim(line.substr(2));
    if (body.empty()) return s;
    for (const auto& item : split(body, ';')) {
      const auto dash = item.find(")-(");
      if (dash == std::string::npos) throw FormatError("expected (a)-(b), got '" + item + "'");
      s.pairs.emplace_back(checked_index(t, parse_paren_cube(item.substr(0, dash + 1))),
                           checked_index(t, parse_paren_cube(item.substr(dash + 2))));
    }
    return s;
  }
  if (line.rfind("E:", 0) == 0) {
    EMovement e;
    const std::string body = trim(line.substr(2));
    if (body.empty()) return e;
    for (const auto& item : split(body, '|')) {
      const auto open = item.find('[');
      const auto close = item.find(']');
      const auto dots = item.find("..");
      const auto axis = item.find("axis=");
      const auto idx = item.find("idx=");
      if (open != 0 || close == std::string::npos || dots == std::string::npos || axis == std::string::npos ||
          idx == std::string::npos || !(dots < axis && axis < close && close < idx))
        throw FormatError("expected [(lo)..(hi) axis=a] idx=..., got '" + item + "'");
      const CubeId lo = parse_paren_cube(item.substr(1, dots - 1));
      const CubeId hi = parse_paren_cube(item.substr(dots + 2, axis - dots - 2));
      if (!t.contains(lo) || !t.contains(hi)) throw FormatError("array outside tiling in '" + item + "'");
      CoupleSequence seq{Box(lo, hi), {}};
      int ax = -1;
      try {
        ax = std::stoi(item.substr(axis + 5, close - axis - 5));
      } catch (const std::exception&) {
        throw FormatError("bad axis in '" + item + "'");
      }
      if (seq.array.kind() != Box::Kind::Array || (seq.array.volume() > 1 && ax != seq.array.array_axis()))
        throw FormatError("axis does not match array in '" + item + "'");
      const std::string list = trim(item.substr(idx + 4));
      if (!list.empty())
        for (const auto& v : split(list, ',')) {
          try {
            std::size_t used = 0;
            seq.positions.push_back(std::stoi(v, &used));
            if (used != v.size()) throw FormatError("");
          } catch (const std::exception&) {
            throw FormatError("bad couple index '" + v + "'");
          }
        }
      e.sequences.push_back(std::move(seq));
    }
    return e;
  }
  throw FormatError("unknown step line '" + line + "'");
}

void write_flow(std::ostream& os, const DiscreteFlow& f) {
  const Tiling& t = f.tiling();
  os << "nu=" << t.nu() << " N=" << t.n() << '\n';
  for (const auto& m : f.steps()) os << format_movement(t, m) << '\n';
  os << "total: " << format_double(f.total_cost()) << '\n';
}

DiscreteFlow read_flow(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("missing flow header");
  DiscreteFlow f(parse_header(trim(line)));
  bool have_total = false;
  double total = 0.0;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string x = trim(line);
    if (x.empty()) continue;
    if (have_total) throw FormatError("content after total line");
    if (x.rfind("total:", 0) == 0) {
      try {
        total = std::stod(x.substr(6));
      } catch (const std::exception&) {
        throw FormatError("bad total line");
      }
      have_total = true;
      continue;
    }
    try {
      f.push(parse_movement(f.tiling(), x));
    } catch (const ValidationError& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (have_total) {
    const double tol = 1e-12 * std::max(1.0, std::abs(total));
    if (std::abs(total - f.total_cost()) > tol)
      throw FormatError("stored total " + format_double(total) + " does not match recomputed " +
                        format_double(f.total_cost()));
  }
  return f;
}

}  // namespace dflow
