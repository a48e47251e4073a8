#include "pdsketch/sketch.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "pdsketch/errors.hpp"

namespace pdsketch {

Sketch::Sketch(GreedyResult g)
    : order_(std::move(g.order)), radii_(std::move(g.radii)), plans_(std::move(g.plans)) {
  const std::size_t n = order_.size();
  if (radii_.size() != n + 1) throw ValidationError("sketch needs n + 1 radii");
  if (plans_.size() != n) throw ValidationError("sketch needs one plan per point");
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    if (!(radii_[i] >= 0)) throw ValidationError("negative radius");
    if (i > 0 && radii_[i] > radii_[i - 1]) throw ValidationError("radii must be nonincreasing");
  }
  // Replaying the plans must keep every multiplicity positive.
  std::vector<Mass> mult(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& plan = plans_[i];
    if (plan.target != i) throw ValidationError("plan target out of order");
    if (plan.moves.empty()) throw ValidationError("empty transportation plan");
    for (std::size_t k = 0; k < plan.moves.size(); ++k) {
      const auto& mv = plan.moves[k];
      if (mv.mass == 0) throw ValidationError("zero mass move");
      if (k > 0 && !(plan.moves[k - 1].source < mv.source)) {
        throw ValidationError("plan sources must be sorted and distinct");
      }
      if (mv.source == kDiagonal) {
        if (mv.mass > kMaxTotalMass - total_mass_) throw ValidationError("mass overflow");
        total_mass_ += mv.mass;
      } else {
        if (mv.source >= i) throw ValidationError("plan source must precede its target");
        if (mult[mv.source] <= mv.mass) throw ValidationError("plan drains an earlier point");
        mult[mv.source] -= mv.mass;
      }
      mult[i] += mv.mass;
    }
  }
}

Sketch Sketch::build(const Diagram& d, StopRule stop) { return Sketch(build_sketch(d, stop)); }

std::vector<Mass> Sketch::multiplicities(std::size_t i) const {
  if (i > size()) throw std::out_of_range("sketch index out of range");
  std::vector<Mass> mult(i, 0);
  for (std::size_t j = 0; j < i; ++j) {
    for (const auto& mv : plans_[j].moves) {
      mult[j] += mv.mass;
      if (mv.source != kDiagonal) mult[mv.source] -= mv.mass;
    }
  }
  return mult;
}

Diagram Sketch::reconstruct(std::size_t i) const {
  const auto mult = multiplicities(i);
  std::vector<DiagramEntry> entries;
  entries.reserve(i);
  for (std::size_t j = 0; j < i; ++j) entries.push_back({order_[j], mult[j]});
  return Diagram::from_ordered(std::move(entries));
}

Length Sketch::error_at(std::size_t i) const {
  if (i >= radii_.size()) throw std::out_of_range("sketch index out of range");
  return radii_[i];
}

std::size_t Sketch::min_index_for_error(Length eps) const {
  // radii are nonincreasing: find the first entry <= eps.
  auto it = std::partition_point(radii_.begin(), radii_.end(), [&](Length r) { return r > eps; });
  if (it == radii_.end()) {
    throw PrecisionUnreachable("sketch stops at error " + format_real(radii_.back()) +
                               ", above the requested " + format_real(eps));
  }
  return static_cast<std::size_t>(it - radii_.begin());
}

std::size_t Sketch::entry_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : plans_) n += p.moves.size();
  return n;
}

std::size_t Sketch::max_fanin() const noexcept {
  std::size_t m = 0;
  for (const auto& p : plans_) m = std::max(m, p.moves.size());
  return m;
}

namespace {

constexpr const char* kMagic = "pdsketch";
constexpr const char* kVersion = "v1";

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::size_t parse_index(const std::string& tok, std::size_t line) {
  const Mass v = parse_mass(tok, line);
  return static_cast<std::size_t>(v);
}

}  // namespace

bool is_sketch_text(const std::string& first_line) {
  const auto tok = split(first_line);
  return tok.size() >= 2 && tok[0] == kMagic;
}

void write_sketch(std::ostream& out, const Sketch& s) {
  out << kMagic << ' ' << kVersion << " n=" << s.size() << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << i << ' ' << format_real(s.order()[i].birth) << ' ' << format_real(s.order()[i].death)
        << ' ' << format_real(s.radii()[i]) << '\n';
  }
  for (const auto& plan : s.plans()) {
    for (const auto& mv : plan.moves) {
      out << plan.target << " <- ";
      if (mv.source == kDiagonal) {
        out << "diag";
      } else {
        out << mv.source;
      }
      out << ' ' << mv.mass << '\n';
    }
  }
  out << "eps_n " << format_real(s.radii().back()) << '\n';
}

Sketch read_sketch(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::vector<std::string> {
    while (std::getline(in, line)) {
      ++lineno;
      auto tok = split(line);
      if (!tok.empty()) return tok;
    }
    return {};
  };

  auto head = next();
  if (head.size() != 3 || head[0] != kMagic || head[1] != kVersion ||
      head[2].rfind("n=", 0) != 0) {
    throw ParseError(lineno, "expected header 'pdsketch v1 n=<count>'");
  }
  const std::size_t n = parse_index(head[2].substr(2), lineno);

  GreedyResult g;
  g.order.reserve(n);
  g.radii.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto tok = next();
    if (tok.size() != 4) throw ParseError(lineno, "expected 'i birth death eps_i'");
    if (parse_index(tok[0], lineno) != i) throw ParseError(lineno, "point index out of order");
    g.order.push_back({parse_real(tok[1], lineno), parse_real(tok[2], lineno)});
    g.radii.push_back(parse_real(tok[3], lineno));
  }

  std::vector<std::map<Index, Mass>> moves(n);
  for (;;) {
    auto tok = next();
    if (tok.empty()) throw ParseError(lineno + 1, "missing 'eps_n' line");
    if (tok[0] == "eps_n") {
      if (tok.size() != 2) throw ParseError(lineno, "expected 'eps_n <value>'");
      g.radii.push_back(parse_real(tok[1], lineno));
      break;
    }
    if (tok.size() != 4 || tok[1] != "<-") throw ParseError(lineno, "expected 'i <- j|diag mass'");
    const std::size_t target = parse_index(tok[0], lineno);
    if (target >= n) throw ParseError(lineno, "plan target out of range");
    const Index source = tok[2] == "diag" ? kDiagonal : parse_index(tok[2], lineno);
    auto [it, fresh] = moves[target].emplace(source, parse_mass(tok[3], lineno));
    if (!fresh) throw ParseError(lineno, "duplicate plan source");
  }
  if (!next().empty()) throw ParseError(lineno, "trailing content after 'eps_n'");

  for (std::size_t i = 0; i < n; ++i) {
    TransportationPlan p;
    p.target = i;
    for (const auto& [src, mass] : moves[i]) p.moves.push_back({src, mass});
    g.plans.push_back(std::move(p));
  }
  for (const auto& p : g.order) {
    if (!std::isfinite(p.birth) || !std::isfinite(p.death) || !(p.birth < p.death)) {
      throw ValidationError("sketch point must be finite and above the diagonal");
    }
  }
  return Sketch(std::move(g));
}

Sketch read_sketch(const std::string& text) {
  std::istringstream in(text);
  return read_sketch(in);
}

}  // namespace pdsketch
