#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "entlab/inequality.hpp"

namespace entlab {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// One compact JSON object per line, in order.
std::string to_jsonl(const std::vector<InequalityReport>& reports);
std::vector<InequalityReport> parse_jsonl(const std::string& text);

/// name,n,lhs,rhs,margin,slack,satisfied,seed. n and seed come from params
/// and are left empty when absent.
std::string to_csv(const std::vector<InequalityReport>& reports);

/// Empirical tail, bound and (if present) oracle against eps on a log10
/// vertical axis. Zero tails are drawn at half of 1/m.
std::string profile_svg(const ConcentrationProfile& profile);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace entlab
