#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ucip::report {

// FNV-1a 64-bit content checksum, rendered as 16 hex digits.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

} // namespace ucip::report
