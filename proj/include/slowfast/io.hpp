#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace slowfast {

// Writes text, creating parent directories; failures raise ErrorKind::io.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
std::string read_text(const std::filesystem::path& path);
void ensure_directory(const std::filesystem::path& dir);

// Shortest round-trip formatting used by every CSV writer.
std::string fmt_double(double x);

}  // namespace slowfast
