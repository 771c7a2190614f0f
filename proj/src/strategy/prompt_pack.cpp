#include "uq/strategy/prompt_pack.hpp"

#include <fmt/format.h>

#include "uq/core/error.hpp"
#include "uq/core/jsonl.hpp"

namespace uq::strategy {

namespace {

std::string strip_final_newline(std::string s) {
    if (!s.empty() && s.back() == '\n') s.pop_back();
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

PromptPack PromptPack::builtin() {
    PromptPack pack;
    for (const auto& [name, text] : detail::embedded_prompts()) {
        pack.templates_.emplace(std::string(name), strip_final_newline(std::string(text)));
    }
    return pack;
}

PromptPack PromptPack::with_overrides(const std::filesystem::path& dir) const {
    if (!std::filesystem::is_directory(dir)) {
        throw Error(Errc::InvalidInput, fmt::format("prompt directory '{}' not found", dir.string()));
    }
    PromptPack pack = *this;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") continue;
        pack.templates_[entry.path().stem().string()] = strip_final_newline(read_file(entry.path()));
    }
    return pack;
}

const std::string& PromptPack::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw Error(Errc::InvalidInput, fmt::format("prompt template '{}' is missing", name));
    }
    return it->second;
}

bool PromptPack::contains(std::string_view name) const { return templates_.find(name) != templates_.end(); }

std::vector<std::string> PromptPack::names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : templates_) out.push_back(k);
    return out;
}

std::string substitute(std::string_view tmpl,
                       const std::map<std::string, std::string, std::less<>>& slots) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const auto name = tmpl.substr(i + 1, close - i - 1);
                if (auto it = slots.find(name); it != slots.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i]);
        ++i;
    }
    return out;
}

}  // namespace uq::strategy
