// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "creepfit/contact.hpp"

namespace creepfit {

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double value);

/// Write via a temp file in the same directory, then rename into place.
void atomic_write_text(const std::string& path, const std::string& text);

std::string read_text_file(const std::string& path);

/// FNV-1a over raw bytes; chainable through `basis`.
std::uint64_t fnv1a(const void* data, std::size_t size,
                    std::uint64_t basis = 0xCBF29CE484222325ULL);

std::string hash_hex(std::uint64_t hash);

/// CSV with optional `# key=value` comment lines before the header row.
void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::string& header, const std::vector<std::vector<std::string>>& rows);

/// LDCurve CSV: header `t_s,P_mN,h_nm`, LF line endings, `.` decimal
/// separator. Comment lines beginning with `#` are skipped on read; readers
/// reject non-monotone time.
void write_ld_curve(const std::string& path, const LDCurve& curve,
                    const std::vector<std::string>& comments = {});
LDCurve read_ld_curve(const std::string& path);

}  // namespace creepfit
