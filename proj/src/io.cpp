#include "vwave/io.hpp"

#include "vwave/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cerrno>
#include <cstring>

namespace vw {

namespace {

using json = nlohmann::ordered_json;

std::string hex(std::uint64_t h) { return fmt::format("0x{:016x}", h); }

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd from_array(const json& a, int expected, const char* name) {
  if (!a.is_array() || static_cast<int>(a.size()) != expected)
    throw ParseError(fmt::format("snapshot field {} must hold {} coefficients", name, expected));
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) v[i] = a[i].get<double>();
  return v;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}: {}", path.string(), std::strerror(errno)));
  out << j.dump(2) << '\n';
  if (!out) throw Error(fmt::format("write to {} failed", path.string()));
}

}  // namespace

BranchTableWriter::BranchTableWriter(const std::filesystem::path& path, std::uint64_t config_hash,
                                     int direction)
    : out_(path) {
  if (!out_) throw Error(fmt::format("cannot write {}: {}", path.string(), std::strerror(errno)));
  out_ << fmt::format("# vwave branch table schema={} config_hash={} direction={}\n", schema_version,
                      hex(config_hash), direction >= 0 ? "+" : "-");
  out_ << header_row() << '\n';
  out_.flush();
}

const char* BranchTableWriter::header_row() {
  return "step,eps,c,eta_sup,eta_h3,eta0,min_vortex_distance,det_sign,sigma_min,newton_iterations,"
         "residual_norm";
}

void BranchTableWriter::write(const BranchPoint& p) {
  const PointDiagnostics& d = p.diagnostics;
  out_ << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g},{},{:.17g}\n",
                      p.step, p.eps, p.state.c, d.eta_sup, d.eta_sobolev, d.eta_at_zero,
                      d.min_vortex_distance, d.det_sign, d.sigma_min, d.newton_iterations,
                      d.residual_norm);
  out_.flush();
  if (!out_) throw Error("branch table write failed");
}

WaveState Snapshot::state() const {
  WaveState s;
  s.eta = EvenField(half_period, eta);
  s.xi_bar = EvenField(half_period, xi_bar);
  s.xi = EvenField(half_period, xi);
  s.c = c;
  return s;
}

Snapshot make_snapshot(const RunConfig& config, const WaveSystem& system, int step,
                       const WaveState& state, double eps) {
  Snapshot s;
  s.config = echo_config(config);
  s.config_hash = config_hash(config);
  s.step = step;
  s.eps = eps;
  s.half_period = system.params().half_period;
  s.depth = system.params().depth;
  s.n_modes = system.discretization().n_modes;
  s.vertical = system.discretization().vertical;
  s.eta = state.eta.coeffs();
  s.xi_bar = state.xi_bar.coeffs();
  s.xi = state.xi.coeffs();
  s.c = state.c;
  s.residual_norm = system.residual(state, eps).norm();
  return s;
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  json j;
  j["schema"] = s.schema;
  j["kind"] = "vwave_snapshot";
  j["config_hash"] = hex(s.config_hash);
  j["step"] = s.step;
  j["eps"] = s.eps;
  j["grid"] = {{"L", s.half_period}, {"d", s.depth}, {"N", s.n_modes}, {"M", s.vertical},
               {"basis", "cos(k pi x / L), k = 0..N"}};
  j["coefficient_count"] = s.n_modes + 1;
  j["eta"] = to_array(s.eta);
  j["xi_bar"] = to_array(s.xi_bar);
  j["xi"] = to_array(s.xi);
  j["c"] = s.c;
  j["residual_norm"] = s.residual_norm;
  j["config"] = s.config;
  write_json(path, j);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read snapshot {}", path.string()));
  try {
    const json j = json::parse(in);
    Snapshot s;
    s.schema = j.at("schema").get<int>();
    if (s.schema != schema_version)
      throw ParseError(fmt::format("snapshot schema {} is not supported (expected {})", s.schema,
                                   schema_version));
    if (j.at("kind").get<std::string>() != "vwave_snapshot")
      throw ParseError("file is not a vwave snapshot");
    s.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    s.step = j.at("step").get<int>();
    s.eps = j.at("eps").get<double>();
    const json& g = j.at("grid");
    s.half_period = g.at("L").get<double>();
    s.depth = g.at("d").get<double>();
    s.n_modes = g.at("N").get<int>();
    s.vertical = g.at("M").get<int>();
    const int count = j.at("coefficient_count").get<int>();
    if (count != s.n_modes + 1) throw ParseError("coefficient_count does not match N + 1");
    s.eta = from_array(j.at("eta"), count, "eta");
    s.xi_bar = from_array(j.at("xi_bar"), count, "xi_bar");
    s.xi = from_array(j.at("xi"), count, "xi");
    s.c = j.at("c").get<double>();
    s.residual_norm = j.at("residual_norm").get<double>();
    s.config = j.at("config").get<std::string>();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("snapshot {}: {}", path.string(), e.what()));
  }
}

void save_summary(const std::filesystem::path& path, const RunSummary& r, const RunConfig& config) {
  json j;
  j["schema"] = schema_version;
  j["kind"] = "vwave_summary";
  j["mode"] = r.mode;
  j["direction"] = r.direction >= 0 ? "+" : "-";
  j["termination"] = r.termination;
  j["reason"] = r.reason;
  j["exit_code"] = r.exit_code;
  j["points"] = r.points;
  j["config_hash"] = hex(config_hash(config));
  j["config"] = echo_config(config);
  write_json(path, j);
}

}  // namespace vw
