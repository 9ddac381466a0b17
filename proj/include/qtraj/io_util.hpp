#ifndef QTRAJ_IO_UTIL_HPP
#define QTRAJ_IO_UTIL_HPP

#include <filesystem>
#include <string>

namespace qtraj {

/// 17-significant-digit decimal form; round-trips doubles exactly.
std::string fmt_double(double v);

/// Write-then-rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Relative paths are placed under QTRAJ_OUT_DIR when that variable is set.
std::filesystem::path resolve_output_path(const std::filesystem::path& path);

}  // namespace qtraj

#endif
