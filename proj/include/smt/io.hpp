#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace smt {

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written file and concurrent runs do not interleave records.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::vector<std::string> read_lines(const std::filesystem::path& path);

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Global level comes from the SMT_LOG environment variable
/// (error|warn|info|debug), defaulting to warn.
LogLevel log_level();
void log(LogLevel level, const std::string& msg);

} // namespace smt
