#pragma once

// Profile CSV I/O.
//
//   device,cpu_cores,cpu_freq_mhz,gpu_freq_mhz,mem_freq_mhz,concurrency,throughput_fps,power_mw,valid
//
// One row per configuration, rows written in lexicographic configuration
// order. Metrics are empty when valid=0. Doubles are written in shortest
// round-trip form so load followed by dump reproduces the file exactly.

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "coral/device.hpp"

namespace coral {

inline constexpr std::string_view kProfileHeader =
    "device,cpu_cores,cpu_freq_mhz,gpu_freq_mhz,mem_freq_mhz,concurrency,throughput_fps,power_mw,valid";

class ProfileError : public std::runtime_error {
 public:
  ProfileError(std::size_t line, const std::string& what)
      : std::runtime_error("profile line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("failed to format double");
  return {buf.data(), ptr};
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, std::string_view column) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ProfileError(line, "column " + std::string(column) + ": '" + std::string(field) + "' is not a number");
  }
  return value;
}

}  // namespace detail

inline ProfileTable parse_profile(std::istream& in) {
  ProfileTable table;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  bool seen_device = false;
  static constexpr std::array<std::string_view, 9> kColumns = {
      "device", "cpu_cores", "cpu_freq_mhz", "gpu_freq_mhz", "mem_freq_mhz",
      "concurrency", "throughput_fps", "power_mw", "valid"};

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!seen_header) {
      if (line != kProfileHeader) throw ProfileError(line_no, "unexpected header '" + line + "'");
      seen_header = true;
      continue;
    }
    if (line.empty()) continue;

    const auto f = detail::split_csv_line(line);
    if (f.size() != kColumns.size()) {
      throw ProfileError(line_no, "expected 9 columns, got " + std::to_string(f.size()));
    }
    if (!seen_device) {
      table.device = std::string(f[0]);
      seen_device = true;
    } else if (f[0] != table.device) {
      throw ProfileError(line_no, "device '" + std::string(f[0]) + "' differs from '" + table.device + "'");
    }

    ProfileRecord rec;
    rec.config.cpu_cores = detail::parse_number<int>(f[1], line_no, kColumns[1]);
    rec.config.cpu_freq = detail::parse_number<int>(f[2], line_no, kColumns[2]);
    rec.config.gpu_freq = detail::parse_number<int>(f[3], line_no, kColumns[3]);
    rec.config.mem_freq = detail::parse_number<int>(f[4], line_no, kColumns[4]);
    rec.config.concurrency = detail::parse_number<int>(f[5], line_no, kColumns[5]);

    if (f[8] == "1") {
      rec.valid = true;
      rec.throughput_fps = detail::parse_number<double>(f[6], line_no, kColumns[6]);
      rec.power_mw = detail::parse_number<double>(f[7], line_no, kColumns[7]);
      if (!std::isfinite(rec.throughput_fps) || rec.throughput_fps < 0.0) {
        throw ProfileError(line_no, "throughput_fps must be finite and >= 0");
      }
      if (!std::isfinite(rec.power_mw) || rec.power_mw <= 0.0) {
        throw ProfileError(line_no, "power_mw must be finite and > 0");
      }
    } else if (f[8] == "0") {
      if (!f[6].empty() || !f[7].empty()) throw ProfileError(line_no, "invalid row carries metrics");
    } else {
      throw ProfileError(line_no, "valid must be 0 or 1, got '" + std::string(f[8]) + "'");
    }

    if (!table.records.emplace(rec.config, rec).second) {
      throw ProfileError(line_no, "duplicate configuration " + to_string(rec.config));
    }
  }
  if (!seen_header) throw ProfileError(1, "missing header");
  return table;
}

inline ProfileTable load_profile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open profile '" + path + "'");
  return parse_profile(in);
}

inline void write_profile(std::ostream& out, const ProfileTable& table) {
  out << kProfileHeader << '\n';
  for (const auto& [cfg, rec] : table.records) {
    out << table.device << ',' << cfg.cpu_cores << ',' << cfg.cpu_freq << ',' << cfg.gpu_freq << ','
        << cfg.mem_freq << ',' << cfg.concurrency << ',';
    if (rec.valid) {
      out << format_double(rec.throughput_fps) << ',' << format_double(rec.power_mw) << ",1\n";
    } else {
      out << ",,0\n";
    }
  }
}

inline std::string profile_to_string(const ProfileTable& table) {
  std::ostringstream os;
  write_profile(os, table);
  return os.str();
}

inline void dump_profile(const ProfileTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write profile '" + path + "'");
  write_profile(out, table);
  if (!out) throw std::runtime_error("error writing profile '" + path + "'");
}

/// Measures every grid configuration of `backend` in enumeration order.
/// Hardware failures become valid=0 rows.
inline ProfileTable profile_backend(DeviceBackend& backend, const MeasurementProtocol& protocol) {
  ProfileTable table;
  table.device = backend.spec().name();
  for (const auto& cfg : enumerate_grid(backend.spec())) {
    ProfileRecord rec{cfg};
    const auto m = backend.measure(cfg, protocol);
    if (const auto* s = std::get_if<MeasurementSample>(&m)) {
      rec.valid = true;
      rec.throughput_fps = s->throughput_fps;
      rec.power_mw = s->power_mw;
    }
    table.records.emplace(cfg, rec);
  }
  return table;
}

}  // namespace coral
