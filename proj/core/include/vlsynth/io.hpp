#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace vlsynth {

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place, so readers never
// observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

// Compact single-line dump with sorted keys (nlohmann objects are ordered
// maps already); used everywhere byte-stable output matters.
std::string dump_line(const nlohmann::json& j);

}  // namespace vlsynth
