#pragma once

#include <json.hpp>

#include <string>

namespace locsched {

inline constexpr const char* kToolVersion = "0.1.0";

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string sha256_hex(const std::string& bytes);

/// Provenance block shared by every output file. No timestamps, so that
/// reruns produce identical bytes.
nlohmann::json make_provenance(const std::string& command);
void add_input(nlohmann::json& prov, const std::string& role, const std::string& path, const std::string& bytes);

/// '#'-prefixed lines carrying the provenance block, placed ahead of a CSV header.
std::string csv_preamble(const nlohmann::json& prov);

std::string dump_json(const nlohmann::json& j);

}  // namespace locsched
