#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace taxnet {

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
// Digest of a file's bytes; throws InputError when it cannot be read.
std::string file_sha256(const std::filesystem::path& path);

}  // namespace taxnet
