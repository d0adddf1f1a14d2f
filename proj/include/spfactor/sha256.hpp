#pragma once

#include <cstdint>
#include <string>

namespace spfactor {

// FIPS 180-4 SHA-256, hex digest. Small enough to keep self-contained; the
// unit tests pin the standard test vectors.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::string& path);

}  // namespace spfactor
