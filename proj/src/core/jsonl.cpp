#include "uq/core/jsonl.hpp"

#include <sstream>

#include <fmt/format.h>

#include "uq/core/error.hpp"

namespace uq {

JsonlDocument parse_jsonl(std::istream& in, std::string_view expected_kind,
                          std::string_view source) {
    JsonlDocument doc;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json value;
        try {
            value = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(Errc::InvalidInput,
                        fmt::format("{}:{}: malformed JSON: {}", source, lineno, e.what()));
        }
        if (first && value.is_object() && value.contains("schema")) {
            const auto schema = value.value("schema", std::string{});
            if (schema != kSchemaVersion) {
                throw Error(Errc::InvalidInput,
                            fmt::format("{}: unsupported schema '{}'", source, schema));
            }
            const auto kind = value.value("kind", std::string{});
            if (!expected_kind.empty() && kind != expected_kind) {
                throw Error(Errc::InvalidInput,
                            fmt::format("{}: expected kind '{}' but file declares '{}'", source,
                                        expected_kind, kind));
            }
            doc.header = std::move(value);
        } else {
            doc.records.push_back(std::move(value));
        }
        first = false;
    }
    return doc;
}

JsonlDocument read_jsonl(const std::filesystem::path& path, std::string_view expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::InvalidInput, fmt::format("cannot open '{}'", path.string()));
    }
    try {
        return parse_jsonl(in, expected_kind, path.string());
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidInput, fmt::format("{}: {}", path.string(), e.what()));
    }
}

json make_header(std::string_view kind, const json& manifest) {
    json h{{"schema", kSchemaVersion}, {"kind", kind}};
    if (!manifest.is_null()) h["manifest"] = manifest;
    return h;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, std::string_view kind,
                         const json& manifest)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) {
        throw Error(Errc::Io, fmt::format("cannot open '{}' for writing", path.string()));
    }
    out_ << make_header(kind, manifest).dump() << '\n';
}

void JsonlWriter::write(const json& record) { out_ << record.dump() << '\n'; }

void JsonlWriter::close() {
    out_.flush();
    if (!out_) throw Error(Errc::Io, fmt::format("write to '{}' failed", path_.string()));
    out_.close();
}

void write_jsonl(const std::filesystem::path& path, std::string_view kind,
                 const std::vector<json>& records, const json& manifest) {
    std::string buf = make_header(kind, manifest).dump();
    buf.push_back('\n');
    for (const auto& r : records) {
        buf += r.dump();
        buf.push_back('\n');
    }
    write_file_atomic(path, buf);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::Io, fmt::format("cannot open '{}'", tmp.string()));
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw Error(Errc::Io, fmt::format("write to '{}' failed", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::InvalidInput, fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace uq
