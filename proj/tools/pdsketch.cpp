// pdsketch: build greedy persistence-diagram sketches and compare diagrams.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <variant>

#include "pdsketch/diagram.hpp"
#include "pdsketch/errors.hpp"
#include "pdsketch/generators.hpp"
#include "pdsketch/greedy.hpp"
#include "pdsketch/matching.hpp"
#include "pdsketch/neighbor_graphs.hpp"
#include "pdsketch/oracle.hpp"
#include "pdsketch/sketch.hpp"

using namespace pdsketch;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kInvalid = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return buf.str();
}

// A file holds either a raw diagram or a sketch.
using Input = std::variant<Diagram, Sketch>;

Input load(const std::string& path) {
  const std::string text = slurp(path);
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (is_sketch_text(line)) return read_sketch(text);
    break;
  }
  auto parsed = parse_diagram(text);
  if (parsed.dropped > 0) {
    std::cerr << path << ": dropped " << parsed.dropped << " zero-persistence point(s)\n";
  }
  return std::move(parsed.diagram);
}

Sketch as_sketch(const Input& in, StopRule stop) {
  if (const auto* s = std::get_if<Sketch>(&in)) return *s;
  return Sketch::build(std::get<Diagram>(in), stop);
}

Diagram as_diagram(const Input& in) {
  if (const auto* d = std::get_if<Diagram>(&in)) return *d;
  const auto& s = std::get<Sketch>(in);
  if (!s.complete()) {
    throw PrecisionUnreachable("exact distances need a complete sketch; this one stops at error " +
                               format_real(s.radii().back()));
  }
  return s.reconstruct(s.size());
}

int fail(int code, const std::string& what) {
  std::cerr << "pdsketch: " << what << '\n';
  return code;
}

// Runs f and maps library exceptions to exit codes.
template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const IoError& e) {
    return fail(kIo, e.what());
  } catch (const ParseError& e) {
    return fail(kInvalid, e.what());
  } catch (const ValidationError& e) {
    return fail(kInvalid, e.what());
  } catch (const UnsupportedInput& e) {
    return fail(kInvalid, e.what());
  } catch (const PrecisionUnreachable& e) {
    return fail(kInvalid, e.what());
  }
}

// ------------------------------------------------------------------- sketch

struct SketchArgs {
  std::string input;
  std::string output;
  std::optional<double> precision;
  std::optional<std::size_t> size;
};

int cmd_sketch(const SketchArgs& a) {
  const auto parsed = parse_diagram(slurp(a.input));
  if (parsed.dropped > 0) {
    std::cerr << a.input << ": dropped " << parsed.dropped << " zero-persistence point(s)\n";
  }
  StopRule stop = StopRule::full();
  if (a.precision) {
    if (!(*a.precision >= 0)) throw ValidationError("--precision must be nonnegative");
    stop = StopRule::precision(*a.precision);
  } else if (a.size) {
    stop = StopRule::max_points(*a.size);
  }
  const Sketch s = Sketch::build(parsed.diagram, stop);

  std::ostream* summary = &std::cout;
  if (a.output.empty()) {
    write_sketch(std::cout, s);
    summary = &std::cerr;
  } else {
    std::ofstream out(a.output);
    if (!out) throw IoError("cannot write " + a.output);
    write_sketch(out, s);
    out.close();
    if (!out) throw IoError("cannot write " + a.output);
  }
  *summary << "n=" << s.size() << " eps0=" << format_real(s.radii().front())
           << " entries=" << s.entry_count() << '\n';
  return kOk;
}

// --------------------------------------------------------------------- dist

struct DistArgs {
  std::string kind;
  std::string left;
  std::string right;
  std::string pairs;
  bool exact = false;
  bool brute = false;
  std::optional<double> eps;
  double gamma = 4;
  bool json = false;
};

struct DistResult {
  Length value = 0;
  Length lower = 0;
  Length upper = 0;
  Length eps_used = 0;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
};

DistResult exact_result(Length v, std::size_t nl, std::size_t nr) { return {v, v, v, 0, nl, nr}; }

DistResult distance(const DistArgs& a, const Input& l, const Input& r) {
  const bool bottleneck = a.kind == "bottleneck";
  if (a.exact || a.brute) {
    const Diagram dl = as_diagram(l);
    const Diagram dr = as_diagram(r);
    Length v = 0;
    if (bottleneck) {
      v = a.brute ? brute_bottleneck(dl, dr) : exact_bottleneck(dl, dr).value;
    } else if (a.brute) {
      v = brute_hausdorff(flat(dl), flat(dr));
    } else {
      std::vector<Point> pl, pr;
      for (const auto& e : dl) pl.push_back(e.point);
      for (const auto& e : dr) pr.push_back(e.point);
      v = exact_hausdorff(pl, pr);
    }
    return exact_result(v, dl.size(), dr.size());
  }

  if (bottleneck) {
    const Length eps = a.eps.value_or(0);
    if (!(eps >= 0)) throw ValidationError("--eps must be nonnegative");
    const StopRule stop = StopRule::precision(eps / 2);
    const auto res = approx_bottleneck(as_sketch(l, stop), as_sketch(r, stop), eps, a.gamma);
    return {res.value, std::max<Length>(0, res.value - res.eps_used), res.value + res.eps_used,
            res.eps_used, res.left_index, res.right_index};
  }
  const Sketch sl = as_sketch(l, StopRule::full());
  const Sketch sr = as_sketch(r, StopRule::full());
  const auto h = approx_hausdorff(sl, sr, a.gamma);
  return {h.estimate, h.lower, h.upper, sl.radii().back() + sr.radii().back(), sl.size(),
          sr.size()};
}

std::string render(const DistArgs& a, const DistResult& r) {
  if (a.json) {
    const nlohmann::json j = {{"value", r.value},     {"lower", r.lower},   {"upper", r.upper},
                              {"eps_used", r.eps_used}, {"n_left", r.n_left}, {"n_right", r.n_right}};
    return j.dump();
  }
  if (a.kind == "hausdorff" && r.lower != r.upper) {
    return format_real(r.value) + " [" + format_real(r.lower) + ", " + format_real(r.upper) + "]";
  }
  return format_real(r.value);
}

int cmd_dist(const DistArgs& a) {
  if (a.exact && a.eps) throw ValidationError("--exact and --eps exclude each other");
  if (!(a.gamma > 1)) throw ValidationError("--gamma must be > 1");

  if (a.pairs.empty()) {
    if (a.left.empty() || a.right.empty()) throw ValidationError("dist needs two inputs or --pairs");
    std::cout << render(a, distance(a, load(a.left), load(a.right))) << '\n';
    return kOk;
  }

  std::vector<std::pair<std::string, std::string>> jobs;
  {
    std::istringstream in(slurp(a.pairs));
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
      ++lineno;
      std::istringstream f(line);
      std::vector<std::string> tok;
      for (std::string t; f >> t;) tok.push_back(t);
      if (tok.empty() || tok[0][0] == '#') continue;
      if (tok.size() != 2) throw ParseError(lineno, "expected 'left right'");
      jobs.push_back({tok[0], tok[1]});
    }
  }

  std::size_t threads = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PDSKETCH_THREADS")) {
    const auto cap = std::strtoul(env, nullptr, 10);
    if (cap > 0) threads = std::min<std::size_t>(threads, cap);
  }
  threads = std::min(threads, std::max<std::size_t>(1, jobs.size()));

  std::vector<std::string> lines(jobs.size());
  std::vector<int> codes(jobs.size(), kOk);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
      codes[k] = guarded([&] {
        lines[k] = render(a, distance(a, load(jobs[k].first), load(jobs[k].second)));
        return int{kOk};
      });
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int status = kOk;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (codes[k] != kOk) {
      if (status == kOk) status = codes[k];
      std::cout << "error\n";
    } else {
      std::cout << lines[k] << '\n';
    }
  }
  return status;
}

// --------------------------------------------------------------------- info

int cmd_info(const std::string& path, bool plans) {
  const Sketch s = read_sketch(slurp(path));
  std::cout << "n=" << s.size();
  if (s.size() > 0) {
    std::cout << " eps=[";
    for (std::size_t i = 0; i < s.radii().size(); ++i) {
      std::cout << (i ? "," : "") << format_real(s.radii()[i]);
    }
    std::cout << "] entries=" << s.entry_count() << " max_fanin=" << s.max_fanin();
  }
  std::cout << '\n';
  if (plans) {
    for (const auto& p : s.plans()) std::cout << "plan " << p.target << " sources=" << p.moves.size() << '\n';
  }
  return kOk;
}

// -------------------------------------------------------------------- bench

struct BenchArgs {
  std::string family = "uniform";
  std::vector<std::size_t> sizes;
  std::uint64_t seed = 1;
  bool naive = false;
};

int cmd_bench(const BenchArgs& a) {
  const auto fam = parse_family(a.family);
  if (!fam) throw ValidationError("unknown family '" + a.family + "'");
  std::cout << "n\tspread\ttouches\tseconds\n";
  for (std::size_t n : a.sizes) {
    if (n == 0) continue;
    const Diagram d = generate(*fam, n, a.seed);
    BuildOptions opt;
    opt.diagonal = a.naive ? DiagonalMode::single_point : DiagonalMode::projections;
    BuildStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    build_sketch(d, opt, &stats);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::cout << n << '\t' << format_real(spread(d)) << '\t' << stats.touches << '\t' << dt.count()
              << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy persistence-diagram sketches and fast diagram distances"};
  app.require_subcommand(1);

  SketchArgs sk;
  auto* sketch = app.add_subcommand("sketch", "Build a sketch of a diagram file");
  sketch->add_option("input", sk.input, "Diagram file")->required();
  sketch->add_option("-o,--output", sk.output, "Sketch file (stdout if omitted)");
  auto* prec = sketch->add_option("--precision", sk.precision, "Stop once the error is <= this");
  sketch->add_option("--size", sk.size, "Stop after this many points")->excludes(prec);

  DistArgs ds;
  auto* dist = app.add_subcommand("dist", "Bottleneck or Hausdorff distance of two diagrams");
  dist->add_option("kind", ds.kind, "bottleneck or hausdorff")
      ->required()
      ->check(CLI::IsMember({"bottleneck", "hausdorff"}));
  dist->add_option("left", ds.left, "Diagram or sketch file");
  dist->add_option("right", ds.right, "Diagram or sketch file");
  dist->add_option("--pairs", ds.pairs, "File of 'left right' path pairs");
  auto* exact = dist->add_flag("--exact", ds.exact, "Exact distance on the full diagrams");
  dist->add_flag("--brute", ds.brute, "Brute-force reference (small inputs only)")->excludes(exact);
  dist->add_option("--eps", ds.eps, "Additive error allowed for bottleneck (default 0)");
  dist->add_option("--gamma", ds.gamma, "Neighborhood graph parameter, > 1")->capture_default_str();
  dist->add_flag("--json", ds.json, "Print a JSON object");

  std::string info_path;
  bool info_plans = false;
  auto* info = app.add_subcommand("info", "Summarize a sketch file");
  info->add_option("sketch", info_path, "Sketch file")->required();
  info->add_flag("--plans", info_plans, "Also list the source count of every plan");

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "Time sketch construction on generated diagrams");
  bench->add_option("--family", bn.family, "uniform, clustered or collinear-adversarial")
      ->capture_default_str();
  bench->add_option("--n", bn.sizes, "Diagram sizes")->required();
  bench->add_option("--seed", bn.seed, "Generator seed")->capture_default_str();
  bench->add_flag("--naive", bn.naive, "Treat the diagonal as a single point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (sketch->parsed()) return guarded([&] { return cmd_sketch(sk); });
  if (dist->parsed()) return guarded([&] { return cmd_dist(ds); });
  if (info->parsed()) return guarded([&] { return cmd_info(info_path, info_plans); });
  return guarded([&] { return cmd_bench(bn); });
}
