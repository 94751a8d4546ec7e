#include "vwave/config.hpp"

#include "vwave/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace vw {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"physical", {"rho", "rho_bar", "g", "sigma", "d", "L", "y0", "ybar0", "kernel"}},
      {"discretization", {"N", "M"}},
      {"continuation",
       {"ds0", "ds_min", "ds_max", "newton_tol", "newton_max", "max_steps", "norm_cap", "grow",
        "delta_guard", "gap_floor", "direction", "single_solve_epsilon"}},
      {"output", {"directory", "snapshot_every"}},
  };
  return keys;
}

// Line of `key` inside `[section]`, for error messages (0 if not found).
int line_of(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line, current;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      current = line.substr(first + 1, close == std::string::npos ? std::string::npos : close - first - 1);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string k = line.substr(first, eq - first);
    k.erase(k.find_last_not_of(" \t") + 1);
    if (current == section && k == key) return n;
  }
  return 0;
}

class Reader {
 public:
  Reader(const std::string& text, const pt::ptree& tree) : text_(text), tree_(tree) {}

  std::string context(const std::string& section, const std::string& key) const {
    const int line = line_of(text_, section, key);
    return line > 0 ? fmt::format("line {}, key {}.{}", line, section, key)
                    : fmt::format("key {}.{}", section, key);
  }

  void read(const std::string& section, const std::string& key, double& out) const {
    if (auto v = raw(section, key)) {
      double x = 0.0;
      const char* end = v->data() + v->size();
      const auto [ptr, ec] = std::from_chars(v->data(), end, x);
      if (ec != std::errc() || ptr != end)
        throw ParseError(fmt::format("{}: '{}' is not a number", context(section, key), *v));
      out = x;
    }
  }

  void read(const std::string& section, const std::string& key, int& out) const {
    if (auto v = raw(section, key)) {
      int x = 0;
      const char* end = v->data() + v->size();
      const auto [ptr, ec] = std::from_chars(v->data(), end, x);
      if (ec != std::errc() || ptr != end)
        throw ParseError(fmt::format("{}: '{}' is not an integer", context(section, key), *v));
      out = x;
    }
  }

  void read(const std::string& section, const std::string& key, std::string& out) const {
    if (auto v = raw(section, key)) out = *v;
  }

 private:
  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto s = tree_.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto v = s->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    std::string value = v->data();
    const auto b = value.find_first_not_of(" \t");
    if (b == std::string::npos) return std::string{};
    value = value.substr(b, value.find_last_not_of(" \t") - b + 1);
    return value;
  }

  const std::string& text_;
  const pt::ptree& tree_;
};

}  // namespace

void RunConfig::validate() const {
  physical.validate();
  if (discretization.n_modes < 8 || discretization.n_modes % 2 != 0)
    throw ValidationError(fmt::format("N must be even, ≥ 8 (got {})", discretization.n_modes));
  if (discretization.vertical < 8)
    throw ValidationError(fmt::format("M must be ≥ 8 (got {})", discretization.vertical));
  continuation.validate();
  if (!(guards.vortex_distance > 0.0)) throw ValidationError("delta_guard must be positive");
  if (!(guards.gap_floor > 0.0 && guards.gap_floor < physical.depth))
    throw ValidationError("gap_floor must lie in (0, d)");
  if (direction != 1 && direction != -1) throw ValidationError("direction must be + or -");
  if (!std::isfinite(single_solve_epsilon)) throw ValidationError("single_solve_epsilon must be finite");
  if (snapshot_every < 1) throw ValidationError("snapshot_every must be ≥ 1");
  if (output_directory.empty()) throw ValidationError("output directory must not be empty");
}

RunConfig load_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(fmt::format("line {}: {}", e.line(), e.message()));
  }

  for (const auto& [section, body] : tree) {
    const auto known = known_keys().find(section);
    if (known == known_keys().end()) {
      if (body.empty())
        throw ParseError(fmt::format("key '{}' outside of any section", section));
      throw ParseError(fmt::format("unknown section [{}]", section));
    }
    for (const auto& [key, value] : body)
      if (!known->second.count(key))
        throw ParseError(fmt::format("{}: unknown key", Reader(text, tree).context(section, key)));
  }

  const Reader r(text, tree);
  RunConfig c;
  PhysicalParameters& p = c.physical;
  r.read("physical", "rho", p.rho);
  r.read("physical", "rho_bar", p.rho_bar);
  r.read("physical", "g", p.gravity);
  r.read("physical", "sigma", p.surface_tension);
  r.read("physical", "d", p.depth);
  r.read("physical", "L", p.half_period);
  r.read("physical", "y0", p.pair.lower.y);
  r.read("physical", "ybar0", p.pair.upper.y);
  std::string kernel = to_string(p.kernel);
  r.read("physical", "kernel", kernel);
  try {
    p.kernel = kernel_from_string(kernel);
  } catch (const ValidationError& e) {
    throw ParseError(fmt::format("{}: {}", r.context("physical", "kernel"), e.what()));
  }

  r.read("discretization", "N", c.discretization.n_modes);
  r.read("discretization", "M", c.discretization.vertical);

  ContinuationSettings& s = c.continuation;
  r.read("continuation", "ds0", s.ds0);
  r.read("continuation", "ds_min", s.ds_min);
  r.read("continuation", "ds_max", s.ds_max);
  r.read("continuation", "newton_tol", s.newton_tol);
  r.read("continuation", "newton_max", s.newton_max);
  r.read("continuation", "max_steps", s.max_steps);
  r.read("continuation", "norm_cap", s.norm_cap);
  r.read("continuation", "grow", s.grow);
  c.guards = Guards::for_depth(p.depth);
  r.read("continuation", "delta_guard", c.guards.vortex_distance);
  r.read("continuation", "gap_floor", c.guards.gap_floor);
  std::string direction = "+";
  r.read("continuation", "direction", direction);
  if (direction == "+" || direction == "+1" || direction == "1") {
    c.direction = 1;
  } else if (direction == "-" || direction == "-1") {
    c.direction = -1;
  } else {
    throw ParseError(fmt::format("{}: direction must be + or -", r.context("continuation", "direction")));
  }
  r.read("continuation", "single_solve_epsilon", c.single_solve_epsilon);

  r.read("output", "directory", c.output_directory);
  r.read("output", "snapshot_every", c.snapshot_every);

  c.validate();
  return c;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read config file {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return load_config(text.str());
}

std::string echo_config(const RunConfig& c) {
  const PhysicalParameters& p = c.physical;
  const ContinuationSettings& s = c.continuation;
  std::string out;
  out += "[physical]\n";
  out += fmt::format("rho = {}\nrho_bar = {}\ng = {}\nsigma = {}\nd = {}\nL = {}\n", p.rho, p.rho_bar,
                     p.gravity, p.surface_tension, p.depth, p.half_period);
  out += fmt::format("y0 = {}\nybar0 = {}\nkernel = {}\n", p.pair.lower.y, p.pair.upper.y,
                     to_string(p.kernel));
  out += "\n[discretization]\n";
  out += fmt::format("N = {}\nM = {}\n", c.discretization.n_modes, c.discretization.vertical);
  out += "\n[continuation]\n";
  out += fmt::format("ds0 = {}\nds_min = {}\nds_max = {}\nnewton_tol = {}\nnewton_max = {}\n", s.ds0,
                     s.ds_min, s.ds_max, s.newton_tol, s.newton_max);
  out += fmt::format("max_steps = {}\nnorm_cap = {}\ngrow = {}\n", s.max_steps, s.norm_cap, s.grow);
  out += fmt::format("delta_guard = {}\ngap_floor = {}\ndirection = {}\nsingle_solve_epsilon = {}\n",
                     c.guards.vortex_distance, c.guards.gap_floor, c.direction > 0 ? "+" : "-",
                     c.single_solve_epsilon);
  out += "\n[output]\n";
  out += fmt::format("snapshot_every = {}\n", c.snapshot_every);
  return out;
}

std::uint64_t config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : echo_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace vw
