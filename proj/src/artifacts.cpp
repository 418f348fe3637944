#include "jkoflow/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "jkoflow/error.hpp"

namespace jkoflow {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

std::string frames_csv(const Trajectory& traj, const FluxColumn& ls, const std::string& fingerprint) {
  std::string out = "# fingerprint=" + fingerprint + "\nt,x,rho,p,ls\n";
  for (const auto& f : traj.frames) {
    const std::string t = format_number(f.t);
    for (std::size_t i = 0; i < f.rho.n(); ++i) {
      const double p = f.pressure.empty() ? std::nan("") : f.pressure[i];
      out += t;
      out += ',';
      out += format_number(f.rho.center(i));
      out += ',';
      out += format_number(f.rho[i]);
      out += ',';
      out += format_number(p);
      out += ',';
      out += format_number(ls(f.rho[i], p));
      out += '\n';
    }
  }
  return out;
}

std::string ledger_json(const Trajectory& traj, const std::string& fingerprint) {
  json entries = json::array();
  for (const auto& e : traj.ledger) {
    entries.push_back({{"k", e.k},
                       {"t", e.t},
                       {"energy", e.energy},
                       {"w2_step", e.w2_step},
                       {"dissipation_slack", e.dissipation_slack},
                       {"iterations", e.iterations},
                       {"optimality_residual", e.optimality_residual}});
  }
  json j = {{"fingerprint", fingerprint}, {"tau", traj.tau}, {"entries", entries}};
  if (traj.failure) {
    j["failure"] = {{"k", traj.failure->k},
                    {"message", traj.failure->message},
                    {"residual", traj.failure->residual}};
  } else {
    j["failure"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string diagnostics_json(const std::vector<DiagnosticEntry>& entries,
                             const std::string& fingerprint) {
  json checks = json::array();
  for (const auto& d : entries) {
    json tol = json::object();
    for (const auto& [k, v] : d.tolerances) tol[k] = v;
    checks.push_back({{"check_name", d.check_name},
                      {"status", d.status},
                      {"worst_value", d.worst_value},
                      {"location", d.location},
                      {"tolerances", tol}});
  }
  return json{{"fingerprint", fingerprint}, {"checks", checks}}.dump(2) + "\n";
}

std::string stationary_csv(const StationaryProfile& profile, std::size_t n,
                           const std::string& fingerprint) {
  require(n >= 1, ErrorCode::kInvalidArgument, "profile export needs at least one point");
  std::string out = "# fingerprint=" + fingerprint + "\nx,rho,p_expected\n";
  const double h = profile.l() / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * h;
    out += format_number(x) + "," + format_number(profile.density(x)) + "," +
           format_number(profile.pressure(x)) + "\n";
  }
  return out;
}

}  // namespace jkoflow
