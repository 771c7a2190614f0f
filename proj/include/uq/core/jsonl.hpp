#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uq/core/json.hpp"

namespace uq {

inline constexpr std::string_view kSchemaVersion = "uq/v1";

struct JsonlDocument {
    std::optional<json> header;
    std::vector<json> records;
};

// Parses a JSONL stream. A first line carrying a `schema` key is treated as the
// header and checked against `expected_kind` (when nonempty).
JsonlDocument parse_jsonl(std::istream& in, std::string_view expected_kind = {},
                          std::string_view source = "<stream>");
JsonlDocument read_jsonl(const std::filesystem::path& path, std::string_view expected_kind = {});

template <typename T>
std::vector<T> read_records(const std::filesystem::path& path, std::string_view kind) {
    auto doc = read_jsonl(path, kind);
    std::vector<T> out;
    out.reserve(doc.records.size());
    for (const auto& r : doc.records) out.push_back(r.get<T>());
    return out;
}

json make_header(std::string_view kind, const json& manifest = nullptr);

class JsonlWriter {
public:
    JsonlWriter(const std::filesystem::path& path, std::string_view kind,
                const json& manifest = nullptr);

    void write(const json& record);
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

// Writes header plus records in one call; the file is replaced atomically.
void write_jsonl(const std::filesystem::path& path, std::string_view kind,
                 const std::vector<json>& records, const json& manifest = nullptr);

// Write-to-temp-then-rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace uq
