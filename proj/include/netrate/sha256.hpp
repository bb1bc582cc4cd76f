#pragma once

#include <string>

namespace netrate {

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Hex SHA-256 of a file's contents. Throws std::runtime_error if unreadable.
std::string sha256_file(const std::string& path);

}  // namespace netrate
