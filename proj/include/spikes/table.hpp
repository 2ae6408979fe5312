#pragma once

// CSV tables of simulation reports and JSON experiment configurations.
//
// A table has one row per setting. The rounded table carries, per criterion,
// `<id>:success_rate` and `<id>:mean_khat` to two decimals; the full-precision
// companion adds `<id>:khats` (space separated) and round-trips exactly.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spikes/error.hpp"
#include "spikes/io.hpp"
#include "spikes/simulate.hpp"

namespace spikes {

enum class TablePrecision { rounded, full };

namespace detail {

inline std::string format_fixed2(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = line.find(sep);
    out.emplace_back(trim(line.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    line.remove_prefix(pos + 1);
  }
  return out;
}

inline void require_common_criteria(std::span<const SimReport> reports) {
  if (reports.empty()) throw DomainError("emit_table: no reports");
  const auto& first = reports.front().criteria;
  if (first.empty()) throw DomainError("emit_table: empty criteria list");
  for (const auto& r : reports) {
    if (r.criteria.size() != first.size()) {
      throw DomainError("emit_table: reports do not share a common criteria list");
    }
    for (std::size_t c = 0; c < first.size(); ++c) {
      if (r.criteria[c].criterion_id != first[c].criterion_id) {
        throw DomainError("emit_table: reports do not share a common criteria list");
      }
    }
  }
}

}  // namespace detail

/// Writes one CSV row per report.
inline void emit_table(std::span<const SimReport> reports, std::ostream& out,
                       TablePrecision precision = TablePrecision::rounded) {
  detail::require_common_criteria(reports);
  const bool full = precision == TablePrecision::full;
  auto num = [&](double x) { return full ? detail::format_exact(x) : detail::format_fixed2(x); };

  out << "n,p,k,snr,delta,noise,replications,seed,k_max";
  for (const auto& c : reports.front().criteria) {
    out << ',' << c.criterion_id << ":success_rate," << c.criterion_id << ":mean_khat";
    if (full) out << ',' << c.criterion_id << ":khats";
  }
  out << '\n';
  for (const auto& r : reports) {
    const auto& cfg = r.config;
    out << cfg.n << ',' << cfg.p << ',' << cfg.k << ',' << num(r.snr) << ',';
    if (cfg.snr.kind == SnrSpec::Kind::delta) out << detail::format_exact(cfg.snr.value);
    out << ',' << to_string(cfg.noise) << ',' << cfg.replications << ',' << cfg.seed << ',';
    if (cfg.k_max) out << *cfg.k_max;
    for (const auto& c : r.criteria) {
      out << ',' << num(c.success_rate) << ',' << num(c.mean_khat);
      if (full) {
        out << ',';
        for (std::size_t i = 0; i < c.khats.size(); ++i) out << (i ? " " : "") << c.khats[i];
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("emit_table: write failed");
}

inline void emit_table(const SimReport& report, std::ostream& out,
                       TablePrecision precision = TablePrecision::rounded) {
  emit_table(std::span<const SimReport>(&report, 1), out, precision);
}

/// `out.csv` -> `out.full.csv`.
inline std::string companion_path(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + ".full";
  }
  return path.substr(0, dot) + ".full" + path.substr(dot);
}

/// Parses a full-precision table back into reports.
inline std::vector<SimReport> read_report_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("report table is empty");
  const auto header = detail::split(line, ',');
  constexpr std::size_t kFixed = 9;
  if (header.size() < kFixed + 3 || (header.size() - kFixed) % 3 != 0) {
    throw DomainError("report table: header is not a full-precision table");
  }
  std::vector<std::string> ids;
  for (std::size_t i = kFixed; i < header.size(); i += 3) {
    const std::string& col = header[i];
    const std::string suffix = ":success_rate";
    if (!col.ends_with(suffix)) throw DomainError("report table: unexpected column " + col);
    ids.push_back(col.substr(0, col.size() - suffix.size()));
  }

  auto to_size = [](const std::string& s) -> std::size_t {
    return static_cast<std::size_t>(std::stoull(s));
  };
  std::vector<SimReport> reports;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != header.size()) {
      throw DomainError("report table: wrong field count on line " + std::to_string(line_no));
    }
    SimReport r;
    r.config.n = to_size(f[0]);
    r.config.p = to_size(f[1]);
    r.config.k = to_size(f[2]);
    r.snr = detail::parse_number(f[3], line_no);
    r.config.snr = f[4].empty() ? SnrSpec::explicit_snr(r.snr)
                                : SnrSpec::fixed_p_delta(detail::parse_number(f[4], line_no));
    r.config.noise = parse_noise_kind(f[5]);
    r.config.replications = to_size(f[6]);
    r.config.seed = std::stoull(f[7]);
    if (!f[8].empty()) r.config.k_max = to_size(f[8]);
    r.config.criteria = ids;
    for (std::size_t c = 0; c < ids.size(); ++c) {
      CriterionSummary s;
      s.criterion_id = ids[c];
      s.success_rate = detail::parse_number(f[kFixed + 3 * c], line_no);
      s.mean_khat = detail::parse_number(f[kFixed + 3 * c + 1], line_no);
      std::istringstream ks(f[kFixed + 3 * c + 2]);
      std::size_t v = 0;
      while (ks >> v) s.khats.push_back(v);
      r.criteria.push_back(std::move(s));
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// JSON experiment configuration
//
// {"n": 500, "p": 200, "k": 10, "snr": [0.5, 1, 1.5], "noise": "gaussian",
//  "criteria": ["gic-large:auto", "bcf"], "replications": 200, "seed": 1,
//  "k_max": 15}
//
// n, p and snr (or delta) may be scalars or arrays; one setting is produced
// per element of their Cartesian product, in n-major order.

namespace detail {

template <typename T>
std::vector<T> scalar_or_list(const nlohmann::json& j, std::string_view key) {
  if (j.is_array()) {
    if (j.empty()) throw DomainError("config: '" + std::string(key) + "' must not be empty");
    return j.get<std::vector<T>>();
  }
  return {j.get<T>()};
}

}  // namespace detail

inline std::vector<SimConfig> parse_sim_configs(const nlohmann::json& j) {
  static const std::vector<std::string> known = {"n",     "p",        "k",
                                                 "snr",   "delta",    "noise",
                                                 "criteria", "replications", "seed",
                                                 "k_max", "name"};
  if (!j.is_object()) throw DomainError("config: top level must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::ranges::find(known, key) == known.end()) {
      throw DomainError("config: unknown key '" + key + "'");
    }
  }
  for (const char* key : {"n", "p", "k", "criteria"}) {
    if (!j.contains(key)) throw DomainError(std::string("config: missing key '") + key + "'");
  }
  if (j.contains("snr") == j.contains("delta")) {
    throw DomainError("config: exactly one of 'snr' and 'delta' is required");
  }

  try {
    const auto ns = detail::scalar_or_list<std::size_t>(j.at("n"), "n");
    const auto ps = detail::scalar_or_list<std::size_t>(j.at("p"), "p");
    const bool by_delta = j.contains("delta");
    const auto levels =
        detail::scalar_or_list<double>(by_delta ? j.at("delta") : j.at("snr"), by_delta ? "delta" : "snr");

    SimConfig base;
    base.k = j.at("k").get<std::size_t>();
    base.criteria = j.at("criteria").get<std::vector<std::string>>();
    if (j.contains("noise")) base.noise = parse_noise_kind(j.at("noise").get<std::string>());
    if (j.contains("replications")) base.replications = j.at("replications").get<std::size_t>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("k_max")) base.k_max = j.at("k_max").get<std::size_t>();

    std::vector<SimConfig> out;
    for (auto n : ns) {
      for (auto p : ps) {
        for (double level : levels) {
          SimConfig cfg = base;
          cfg.n = n;
          cfg.p = p;
          cfg.snr = by_delta ? SnrSpec::fixed_p_delta(level) : SnrSpec::explicit_snr(level);
          cfg.validate();
          out.push_back(std::move(cfg));
        }
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
}

inline std::vector<SimConfig> parse_sim_configs(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_sim_configs(j);
}

}  // namespace spikes
