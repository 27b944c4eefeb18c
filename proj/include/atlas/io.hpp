#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace atlas::io {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames into place, so readers never
// observe a half-written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// FNV-1a over arbitrary bytes. Used for change detection in the workspace
// manifest, not for anything adversarial.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed);

// Hex digest of a file's contents; throws InputError when the file is absent.
std::string file_digest(const std::filesystem::path& path);

std::string to_hex(std::uint64_t value);

// Shortest decimal representation that round-trips the double.
std::string format_double(double value);

}  // namespace atlas::io
