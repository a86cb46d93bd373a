#pragma once

#include <string>

namespace mandera {

/// Writes content to path atomically: a temp file in the same directory is
/// renamed over the target, so aborts never leave partial files.
void write_file_atomic(const std::string& path, const std::string& content);

/// %.17g formatting (round-trip exact) used by every CSV/JSON writer.
std::string format_double(double v);

void ensure_directory(const std::string& path);

}  // namespace mandera
