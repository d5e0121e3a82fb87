#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace topomap::io {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delim);
std::string to_lower_ascii(std::string_view s);

// Shortest decimal representation that round-trips; platform independent.
std::string format_double(double value);

// Opens a file for reading; throws InputError when it is missing.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

// Reads a one-entry-per-line list; blank lines and '#' comments are skipped.
std::vector<std::string> read_word_list(std::istream& in);
std::vector<std::string> read_word_list(const std::filesystem::path& path);

// Hex SHA-256 of a file's bytes or of a string.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

}  // namespace topomap::io
