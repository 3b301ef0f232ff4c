#pragma once

#include <string>

namespace strata {

// Writes via a sibling temp file plus rename, so readers never observe a
// partially written report.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace strata
