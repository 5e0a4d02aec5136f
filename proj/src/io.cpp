// SPDX-License-Identifier: Apache-2.0

#include "creepfit/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace creepfit {

std::string format_double(double value) {
  char buffer[40];
  // Seventeen significant digits always round-trip; trim when fewer do.
  for (int digits = 1; digits <= 17; ++digits) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", digits, value);
    if (std::strtod(buffer, nullptr) == value) return buffer;
  }
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void atomic_write_text(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path() && !fs::exists(target.parent_path()))
    throw io_error("output directory does not exist: " + target.parent_path().string());
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + temp.string());
    out << text;
    if (!out.good()) throw io_error("write failed: " + temp.string());
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) throw io_error("cannot rename " + temp.string() + " to " + path + ": " + ec.message());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t basis) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = basis;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string hash_hex(std::uint64_t hash) {
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::string& header, const std::vector<std::vector<std::string>>& rows) {
  std::string text;
  for (const auto& c : comments) text += "# " + c + "\n";
  text += header + "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ",";
      text += row[i];
    }
    text += "\n";
  }
  atomic_write_text(path, text);
}

void write_ld_curve(const std::string& path, const LDCurve& curve,
                    const std::vector<std::string>& comments) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(curve.size()));
  for (Eigen::Index i = 0; i < curve.size(); ++i)
    rows.push_back({format_double(curve.time[i]), format_double(curve.load[i]),
                    format_double(curve.depth[i])});
  write_csv(path, comments, "t_s,P_mN,h_nm", rows);
}

LDCurve read_ld_curve(const std::string& path) {
  if (!std::filesystem::exists(path)) throw io_error("curve file does not exist: " + path);
  std::istringstream in(read_text_file(path));
  std::string line;
  bool have_header = false;
  std::vector<double> t, p, h;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (line != "t_s,P_mN,h_nm")
        throw io_error(path + ": expected header t_s,P_mN,h_nm, got '" + line + "'");
      have_header = true;
      continue;
    }
    double a, b, c;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
      throw io_error(path + ":" + std::to_string(line_no) + ": malformed row '" + line + "'");
    t.push_back(a);
    p.push_back(b);
    h.push_back(c);
  }
  if (!have_header || t.size() < 2) throw io_error(path + ": no curve data");
  LDCurve curve;
  const Eigen::Index n = static_cast<Eigen::Index>(t.size());
  curve.time = Eigen::Map<Eigen::VectorXd>(t.data(), n);
  curve.load = Eigen::Map<Eigen::VectorXd>(p.data(), n);
  curve.depth = Eigen::Map<Eigen::VectorXd>(h.data(), n);
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(curve.time[i] > curve.time[i - 1]))
      throw io_error(path + ": time is not strictly increasing at row " + std::to_string(i + 1));
  return curve;
}

}  // namespace creepfit
