#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uq::strategy {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_prompts();
}

// Named prompt templates. The built-in pack is compiled from prompts/*.txt;
// a directory passed to `with_overrides` replaces any template whose file
// name matches.
class PromptPack {
public:
    static PromptPack builtin();
    PromptPack with_overrides(const std::filesystem::path& dir) const;

    const std::string& get(std::string_view name) const;
    bool contains(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

// Replaces `{slot}` occurrences in one left-to-right pass. Substituted text is
// never rescanned, and braces that do not name a known slot are copied as-is.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& slots);

}  // namespace uq::strategy
