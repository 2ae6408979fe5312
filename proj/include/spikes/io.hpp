#pragma once

// File formats:
//  - data matrix: headerless CSV, one sample per row, '.' decimal point;
//  - spectrum: `n=<n>` and `p=<p>` header lines, then one eigenvalue per line.

#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spikes/error.hpp"
#include "spikes/spectra.hpp"

namespace spikes {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view text, std::size_t line) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "line " << line << ": cannot parse number '" << text << "'";
    throw DomainError(msg.str());
  }
  return value;
}

// Shortest representation that round-trips, locale independent.
inline std::string format_exact(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path);
  return out;
}

}  // namespace detail

inline DataMatrix read_data_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(detail::parse_number(rest.substr(0, comma), line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected " << cols << " columns, found " << count;
      throw DomainError(msg.str());
    }
    ++rows;
  }
  if (rows == 0) throw DomainError("data CSV is empty");
  return DataMatrix{Matrix(rows, cols, std::move(values))};
}

inline DataMatrix read_data_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_data_csv(in);
}

inline void write_data_csv(const DataMatrix& x, std::ostream& out) {
  for (std::size_t i = 0; i < x.n(); ++i) {
    const auto row = x.values.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << detail::format_exact(row[j]);
    }
    out << '\n';
  }
}

inline SampleSpectrum read_spectrum_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto header = [&](std::string_view key) -> std::size_t {
    while (std::getline(in, line)) {
      ++line_no;
      const auto t = detail::trim(line);
      if (t.empty()) continue;
      if (!t.starts_with(key)) {
        std::ostringstream msg;
        msg << "line " << line_no << ": expected header '" << key << "<value>'";
        throw DomainError(msg.str());
      }
      const auto v = detail::parse_number(t.substr(key.size()), line_no);
      if (v < 1 || v != std::floor(v)) {
        throw DomainError("spectrum header " + std::string(key) + " must be a positive integer");
      }
      return static_cast<std::size_t>(v);
    }
    throw DomainError("spectrum CSV: missing header " + std::string(key));
  };
  const std::size_t n = header("n=");
  const std::size_t p = header("p=");
  std::vector<double> values;
  values.reserve(p);
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    values.push_back(detail::parse_number(line, line_no));
  }
  if (values.size() != p) {
    std::ostringstream msg;
    msg << "spectrum CSV: header says p=" << p << " but " << values.size()
        << " eigenvalues were found";
    throw DomainError(msg.str());
  }
  return SampleSpectrum(std::move(values), n);
}

inline SampleSpectrum read_spectrum_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_spectrum_csv(in);
}

inline void write_spectrum_csv(const SampleSpectrum& spec, std::ostream& out) {
  out << "n=" << spec.n() << '\n' << "p=" << spec.p() << '\n';
  for (double d : spec.eigenvalues()) out << detail::format_exact(d) << '\n';
}

}  // namespace spikes
