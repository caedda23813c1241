/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vqebench/error.hpp"
#include "vqebench/maxcut.hpp"
#include "vqebench/rng.hpp"
#include "vqebench/solvers.hpp"

namespace vqebench {

/// Shortest round-trip text for a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Experiment description. The text form is one `key = value` per line;
/// `#` starts a comment; lists are comma separated.
///
///   sizes          problem sizes N (variables); N + 1 nodes, so N is odd
///   n_instances    instances per size
///   n_runs         runs (initial points) per instance
///   n_shots        evaluations per iteration / checkpoint spacing
///   n_iter         iterations, so the budget is n_shots * n_iter
///   gamma          CVaR fraction in (0, 1]
///   master_seed    root of every derived random stream
///   exact_limit    largest N solved by enumeration
///   gw_roundings   hyperplane roundings in the GW normalizer
///   rho_begin      initial COBYLA trust radius
///   rho_end        final COBYLA trust radius
///   algorithms     subset of vqe, sampling, greedy
///   n_bins         correlation bins
///   bin_low        lower edge of the correlation window
///   bin_high       upper edge of the correlation window
///   confidence     two-sided level of the Wilson intervals
///   output_dir     experiment directory
///   workers        parallel jobs (does not affect results)
struct ExperimentConfig {
  std::vector<int> sizes{11, 21, 31};
  int n_instances = 25;
  int n_runs = 10;
  int n_shots = 1000;
  int n_iter = 1000;
  double gamma = 0.1;
  std::uint64_t master_seed = 1;
  int exact_limit = 32;
  int gw_roundings = 50;
  double rho_begin = 1.0;
  double rho_end = 1e-4;
  std::vector<Algorithm> algorithms{Algorithm::vqe, Algorithm::sampling,
                                    Algorithm::greedy};
  int n_bins = 12;
  double bin_low = 0.87856;
  double bin_high = 1.0;
  double confidence = 0.95;
  std::string output_dir = "results";
  int workers = 1;

  Budget budget() const { return {n_shots, n_iter}; }
  bool runs(Algorithm a) const {
    return std::find(algorithms.begin(), algorithms.end(), a) !=
           algorithms.end();
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

template <class T> T parse_number(const std::string &key, std::string_view v) {
  T out{};
  const auto *end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    fail(ErrorCode::BadConfig,
         "cannot parse '" + std::string(v) + "' for key '" + key + "'");
  return out;
}

// from_chars for double is missing in some standard libraries; strtod is
// locale-sensitive but the harness never changes the C locale.
template <>
inline double parse_number<double>(const std::string &key, std::string_view v) {
  const std::string s(v);
  char *end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    fail(ErrorCode::BadConfig,
         "cannot parse '" + s + "' for key '" + key + "'");
  return out;
}

} // namespace detail

/// Checks the invariants; throws BadConfig with the first violation.
inline void validate(const ExperimentConfig &c) {
  auto bad = [](const std::string &m) { detail::fail(ErrorCode::BadConfig, m); };
  if (c.sizes.empty())
    bad("sizes must not be empty");
  for (int n : c.sizes) {
    if (n < 3 || n > kMaxVariables)
      bad("size " + std::to_string(n) + " outside [3, " +
          std::to_string(kMaxVariables) + "]");
    if ((n + 1) % 2 != 0)
      bad("size " + std::to_string(n) +
          " gives an odd node count; sizes must be odd");
  }
  if (c.n_instances < 1 || c.n_runs < 1 || c.n_shots < 1 || c.n_iter < 1)
    bad("counts must be positive");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0))
    bad("gamma must lie in (0, 1]");
  if (c.exact_limit < 0)
    bad("exact_limit must be non-negative");
  if (c.gw_roundings < 1)
    bad("gw_roundings must be positive");
  if (!(c.rho_begin > c.rho_end && c.rho_end > 0.0))
    bad("need rho_begin > rho_end > 0");
  if (c.algorithms.empty())
    bad("algorithms must not be empty");
  if (c.n_bins < 1 || !(c.bin_high > c.bin_low))
    bad("need n_bins >= 1 and bin_high > bin_low");
  if (!(c.confidence > 0.0 && c.confidence < 1.0))
    bad("confidence must lie in (0, 1)");
  if (c.workers < 1)
    bad("workers must be positive");
}

/// Applies one `key = value` setting.
inline void set_option(ExperimentConfig &c, const std::string &key,
                       const std::string &value) {
  using detail::parse_number;
  if (key == "sizes") {
    c.sizes.clear();
    for (const auto &s : detail::split(value, ','))
      c.sizes.push_back(parse_number<int>(key, s));
  } else if (key == "n_instances") {
    c.n_instances = parse_number<int>(key, value);
  } else if (key == "n_runs") {
    c.n_runs = parse_number<int>(key, value);
  } else if (key == "n_shots") {
    c.n_shots = parse_number<int>(key, value);
  } else if (key == "n_iter") {
    c.n_iter = parse_number<int>(key, value);
  } else if (key == "gamma") {
    c.gamma = parse_number<double>(key, value);
  } else if (key == "master_seed") {
    c.master_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "exact_limit") {
    c.exact_limit = parse_number<int>(key, value);
  } else if (key == "gw_roundings") {
    c.gw_roundings = parse_number<int>(key, value);
  } else if (key == "rho_begin") {
    c.rho_begin = parse_number<double>(key, value);
  } else if (key == "rho_end") {
    c.rho_end = parse_number<double>(key, value);
  } else if (key == "algorithms") {
    c.algorithms.clear();
    for (const auto &s : detail::split(value, ',')) {
      Algorithm a;
      try {
        a = parse_algorithm(s);
      } catch (const Error &) {
        detail::fail(ErrorCode::BadConfig, "unknown algorithm '" + s + "'");
      }
      if (!c.runs(a))
        c.algorithms.push_back(a);
    }
  } else if (key == "n_bins") {
    c.n_bins = parse_number<int>(key, value);
  } else if (key == "bin_low") {
    c.bin_low = parse_number<double>(key, value);
  } else if (key == "bin_high") {
    c.bin_high = parse_number<double>(key, value);
  } else if (key == "confidence") {
    c.confidence = parse_number<double>(key, value);
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "workers") {
    c.workers = parse_number<int>(key, value);
  } else {
    detail::fail(ErrorCode::BadConfig, "unknown config key '" + key + "'");
  }
}

/// Parses config text on top of `base` (defaults unless given).
inline ExperimentConfig parse_config(std::string_view text,
                                     ExperimentConfig base = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = detail::trim(line.substr(0, hash));
    if (body.empty())
      continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      detail::fail(ErrorCode::BadConfig,
                   "line " + std::to_string(lineno) + ": expected key = value");
    const auto key = detail::trim(std::string_view(body).substr(0, eq));
    const auto value = detail::trim(std::string_view(body).substr(eq + 1));
    set_option(base, key, value);
  }
  validate(base);
  return base;
}

inline ExperimentConfig load_config(const std::string &path,
                                    ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in)
    detail::fail(ErrorCode::IoError, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

namespace detail {
template <class T, class F>
std::string join(const std::vector<T> &v, F &&f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i)
      s += ",";
    s += f(v[i]);
  }
  return s;
}
} // namespace detail

/// Canonical text. With `with_runtime` false the result leaves out the keys
/// that cannot change any number (output_dir, workers).
inline std::string to_text(const ExperimentConfig &c, bool with_runtime = true) {
  std::ostringstream o;
  o << "sizes = "
    << detail::join(c.sizes, [](int n) { return std::to_string(n); }) << "\n"
    << "n_instances = " << c.n_instances << "\n"
    << "n_runs = " << c.n_runs << "\n"
    << "n_shots = " << c.n_shots << "\n"
    << "n_iter = " << c.n_iter << "\n"
    << "gamma = " << format_double(c.gamma) << "\n"
    << "master_seed = " << c.master_seed << "\n"
    << "exact_limit = " << c.exact_limit << "\n"
    << "gw_roundings = " << c.gw_roundings << "\n"
    << "rho_begin = " << format_double(c.rho_begin) << "\n"
    << "rho_end = " << format_double(c.rho_end) << "\n"
    << "algorithms = "
    << detail::join(c.algorithms,
                    [](Algorithm a) { return std::string(to_string(a)); })
    << "\n"
    << "n_bins = " << c.n_bins << "\n"
    << "bin_low = " << format_double(c.bin_low) << "\n"
    << "bin_high = " << format_double(c.bin_high) << "\n"
    << "confidence = " << format_double(c.confidence) << "\n";
  if (with_runtime)
    o << "output_dir = " << c.output_dir << "\n"
      << "workers = " << c.workers << "\n";
  return o.str();
}

/// First 16 hex digits of SHA-256 over the result-relevant settings.
inline std::string config_hash(const ExperimentConfig &c) {
  return sha256_hex(to_text(c, false)).substr(0, 16);
}

} // namespace vqebench
