#include "pdsketch/diagram.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>

#include "pdsketch/errors.hpp"

namespace pdsketch {

namespace {

void check_finite(const Point& p) {
  if (!std::isfinite(p.birth) || !std::isfinite(p.death)) {
    throw UnsupportedInput("points with non-finite coordinates are not supported");
  }
}

Mass checked_add(Mass a, Mass b) {
  if (b > kMaxTotalMass || a > kMaxTotalMass - b) {
    throw ValidationError("total multiplicity exceeds 2^61");
  }
  return a + b;
}

}  // namespace

Diagram Diagram::normalized(std::vector<DiagramEntry> raw, std::size_t* dropped) {
  std::map<Point, Mass> merged;
  std::size_t zero = 0;
  Mass total = 0;
  for (const auto& e : raw) {
    check_finite(e.point);
    if (e.point.death < e.point.birth) {
      throw ValidationError("death < birth");
    }
    if (e.mult == 0) {
      throw ValidationError("multiplicity must be positive");
    }
    if (e.point.death == e.point.birth) {
      ++zero;
      continue;
    }
    total = checked_add(total, e.mult);
    merged[e.point] += e.mult;
  }
  if (dropped != nullptr) *dropped = zero;
  std::vector<DiagramEntry> entries;
  entries.reserve(merged.size());
  for (const auto& [p, m] : merged) entries.push_back({p, m});
  return Diagram(std::move(entries));
}

Diagram Diagram::from_ordered(std::vector<DiagramEntry> entries) {
  Mass total = 0;
  for (const auto& e : entries) {
    check_finite(e.point);
    if (!(e.point.birth < e.point.death)) {
      throw ValidationError("diagram entries must lie strictly above the diagonal");
    }
    if (e.mult == 0) throw ValidationError("multiplicity must be positive");
    total = checked_add(total, e.mult);
  }
  std::vector<Point> pts;
  pts.reserve(entries.size());
  for (const auto& e : entries) pts.push_back(e.point);
  std::sort(pts.begin(), pts.end());
  if (std::adjacent_find(pts.begin(), pts.end()) != pts.end()) {
    throw ValidationError("duplicate point in ordered diagram");
  }
  return Diagram(std::move(entries));
}

Mass Diagram::total_mass() const noexcept {
  Mass total = 0;
  for (const auto& e : entries_) total += e.mult;
  return total;
}

Length Diagram::max_diag_dist() const noexcept {
  Length best = 0;
  for (const auto& e : entries_) best = std::max(best, diag_dist(e.point));
  return best;
}

std::string format_real(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& token, std::size_t line) {
  double value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range) {
    throw UnsupportedInput("line " + std::to_string(line) + ": coordinate out of range");
  }
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line, "not a number: '" + token + "'");
  }
  return value;
}

Mass parse_mass(const std::string& token, std::size_t line) {
  Mass value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "not a nonnegative integer: '" + token + "'");
  }
  return value;
}

ParsedDiagram parse_diagram(std::istream& in) {
  std::vector<DiagramEntry> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() < 2 || tok.size() > 3) {
      throw ParseError(lineno, "expected 'birth death [multiplicity]'");
    }
    DiagramEntry e;
    e.point = {parse_real(tok[0], lineno), parse_real(tok[1], lineno)};
    if (tok.size() == 3) e.mult = parse_mass(tok[2], lineno);
    if (!std::isfinite(e.point.birth) || !std::isfinite(e.point.death)) {
      throw UnsupportedInput("line " + std::to_string(lineno) +
                             ": points at infinity are not supported");
    }
    if (e.point.death < e.point.birth) {
      throw ValidationError("line " + std::to_string(lineno) + ": death < birth");
    }
    if (e.mult == 0) {
      throw ValidationError("line " + std::to_string(lineno) + ": zero multiplicity");
    }
    raw.push_back(e);
  }
  ParsedDiagram out;
  out.diagram = Diagram::normalized(std::move(raw), &out.dropped);
  return out;
}

ParsedDiagram parse_diagram(const std::string& text) {
  std::istringstream in(text);
  return parse_diagram(in);
}

void write_diagram(std::ostream& out, const Diagram& d) {
  for (const auto& e : d) {
    out << format_real(e.point.birth) << ' ' << format_real(e.point.death) << ' ' << e.mult
        << '\n';
  }
}

}  // namespace pdsketch
