#include "uq/curation/rules.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include <fmt/format.h>

#include "uq/core/error.hpp"
#include "uq/core/jsonl.hpp"
#include "uq/core/table.hpp"

namespace uq::curation {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

const SiteRuleConfig& CurationConfig::for_site(const std::string& site) const {
    auto it = sites.find(site);
    return it == sites.end() ? defaults : it->second;
}

std::map<std::string, DiamondRule> default_diamond_rules() {
    return {{"math", DiamondRule{2000, 75}}, {"mathoverflow", DiamondRule{2000, 50}}};
}

void validate_config(const SiteRuleConfig& c) {
    auto bad = [](std::string_view what) { throw Error(Errc::InvalidInput, std::string(what)); };
    if (!(c.min_age_years >= 0.0)) bad("min_age_years must be ≥ 0");
    if (c.min_views < 0) bad("min_views must be ≥ 0");
    if (!(c.max_views_per_vote > 0.0)) bad("max_views_per_vote must be > 0");
    if (!(c.top_percentile > 0.0 && c.top_percentile <= 1.0)) bad("top_percentile must lie in (0,1]");
}

void to_json(json& j, const SiteRuleConfig& c) {
    j = json{{"min_age_years", c.min_age_years},
             {"min_views", c.min_views},
             {"min_votes", c.min_votes},
             {"max_views_per_vote", c.max_views_per_vote},
             {"top_percentile", c.top_percentile},
             {"forbid_title_terms", c.forbid_title_terms},
             {"forbid_tags", c.forbid_tags},
             {"forbid_images", c.forbid_images},
             {"require_zero_answers", c.require_zero_answers}};
}

SiteRuleConfig site_config_from_json(const json& j, const SiteRuleConfig& base) {
    SiteRuleConfig c = base;
    c.min_age_years = j.value("min_age_years", c.min_age_years);
    c.min_views = j.value("min_views", c.min_views);
    c.min_votes = j.value("min_votes", c.min_votes);
    c.max_views_per_vote = j.value("max_views_per_vote", c.max_views_per_vote);
    c.top_percentile = j.value("top_percentile", c.top_percentile);
    c.forbid_title_terms = j.value("forbid_title_terms", c.forbid_title_terms);
    c.forbid_tags = j.value("forbid_tags", c.forbid_tags);
    c.forbid_images = j.value("forbid_images", c.forbid_images);
    c.require_zero_answers = j.value("require_zero_answers", c.require_zero_answers);
    validate_config(c);
    return c;
}

void to_json(json& j, const CurationConfig& c) {
    json diamond = json::object();
    for (const auto& [site, d] : c.diamond) {
        diamond[site] = json{{"min_views", d.min_views}, {"min_votes", d.min_votes}};
    }
    j = json{{"defaults", c.defaults}, {"sites", c.sites}, {"diamond", diamond}};
}

void from_json(const json& j, CurationConfig& c) {
    c.defaults = site_config_from_json(j.value("defaults", json::object()));
    c.sites.clear();
    const auto sites = j.value("sites", json::object());
    for (const auto& [site, sj] : sites.items()) {
        c.sites[site] = site_config_from_json(sj, c.defaults);
    }
    if (j.contains("diamond")) {
        c.diamond.clear();
        for (const auto& [site, dj] : j.at("diamond").items()) {
            c.diamond[site] = DiamondRule{dj.value("min_views", std::int64_t{2000}),
                                          dj.value("min_votes", std::int64_t{75})};
        }
    } else {
        c.diamond = default_diamond_rules();
    }
}

CurationConfig load_curation_config(const std::filesystem::path& path) {
    try {
        return json::parse(read_file(path)).get<CurationConfig>();
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidInput, fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string_view to_string(Rule r) noexcept {
    switch (r) {
        case Rule::Age: return "age";
        case Rule::Views: return "views";
        case Rule::Votes: return "votes";
        case Rule::Ratio: return "ratio";
        case Rule::Answers: return "answers";
        case Rule::TitleTerm: return "title-term";
        case Rule::Tags: return "tags";
        case Rule::Images: return "images";
        case Rule::Percentile: return "percentile";
    }
    return "age";
}

bool has_image(std::string_view body) {
    static const std::regex md(R"(!\[[^\]]*\]\s*[\(\[])");
    static const std::regex html(R"(<img\b)", std::regex::icase);
    return std::regex_search(body.begin(), body.end(), md) || std::regex_search(body.begin(), body.end(), html);
}

bool title_has_term(std::string_view title, std::string_view term) {
    if (term.empty()) return false;
    const auto t = lower(title);
    const auto w = lower(term);
    for (auto pos = t.find(w); pos != std::string::npos; pos = t.find(w, pos + 1)) {
        const bool left = pos == 0 || !is_word_char(t[pos - 1]);
        const bool right = pos + w.size() == t.size() || !is_word_char(t[pos + w.size()]);
        if (left && right) return true;
    }
    return false;
}

std::optional<Rule> first_failed_rule(const QuestionRecord& q, const SiteRuleConfig& c, Timestamp now) {
    using namespace std::chrono;
    const auto min_age = duration<double, std::ratio<86400>>(c.min_age_years * 365.25);
    if (duration<double, std::ratio<86400>>(now - q.created_at) < min_age) return Rule::Age;
    if (q.views < c.min_views) return Rule::Views;
    if (q.score < c.min_votes) return Rule::Votes;
    if (q.score <= 0) {
        if (q.views > 0) return Rule::Ratio;
    } else if (static_cast<double>(q.views) / static_cast<double>(q.score) > c.max_views_per_vote) {
        return Rule::Ratio;
    }
    if (c.require_zero_answers && q.answer_count != 0) return Rule::Answers;
    for (const auto& term : c.forbid_title_terms) {
        if (title_has_term(q.title, term)) return Rule::TitleTerm;
    }
    for (const auto& tag : q.tags) {
        const auto lt = lower(tag);
        for (const auto& f : c.forbid_tags) {
            if (lt == lower(f)) return Rule::Tags;
        }
    }
    if (c.forbid_images && has_image(q.body)) return Rule::Images;
    return std::nullopt;
}

FilterResult rule_filter(const std::vector<QuestionRecord>& records, const CurationConfig& config,
                         Timestamp now) {
    FilterResult out;
    for (auto r : kAllRules) out.tally[r] = 0;
    std::vector<std::optional<Rule>> verdict(records.size());
    std::map<std::string, std::vector<std::size_t>> survivors_by_site;
    for (std::size_t i = 0; i < records.size(); ++i) {
        verdict[i] = first_failed_rule(records[i], config.for_site(records[i].site), now);
        if (!verdict[i]) survivors_by_site[records[i].site].push_back(i);
    }
    // Per site, keep the top share by votes; everything tied with the last
    // kept record is kept too.
    for (auto& [site, idx] : survivors_by_site) {
        const double p = config.for_site(site).top_percentile;
        const auto keep = static_cast<std::size_t>(std::ceil(p * static_cast<double>(idx.size()) - 1e-9));
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (records[a].score != records[b].score) return records[a].score > records[b].score;
            return records[a].id < records[b].id;
        });
        if (keep == 0) {
            for (auto i : idx) verdict[i] = Rule::Percentile;
            continue;
        }
        const auto cutoff = records[idx[keep - 1]].score;
        for (auto i : idx) {
            if (records[i].score < cutoff) verdict[i] = Rule::Percentile;
        }
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (verdict[i]) {
            ++out.tally[*verdict[i]];
            out.rejected.push_back(Rejection{records[i].id, *verdict[i]});
        } else {
            out.kept.push_back(records[i]);
        }
    }
    return out;
}

bool diamond_tag(const QuestionRecord& q, const std::map<std::string, DiamondRule>& rules) {
    auto it = rules.find(q.site);
    if (it == rules.end()) return false;
    return q.views >= it->second.min_views && q.score >= it->second.min_votes;
}

std::vector<FunnelRow> funnel_stats(const std::vector<std::pair<std::string, std::int64_t>>& stages) {
    if (stages.empty()) throw Error(Errc::InvalidInput, "funnel needs at least one stage");
    if (stages.front().second <= 0) throw Error(Errc::InvalidInput, "first funnel stage must be nonempty");
    std::vector<FunnelRow> out;
    const auto original = static_cast<double>(stages.front().second);
    for (std::size_t i = 0; i < stages.size(); ++i) {
        FunnelRow row;
        row.stage = stages[i].first;
        row.count = stages[i].second;
        row.pct_of_original = round2(100.0 * static_cast<double>(row.count) / original);
        if (i > 0 && stages[i - 1].second > 0) {
            row.pct_of_previous = round2(100.0 * static_cast<double>(row.count) /
                                         static_cast<double>(stages[i - 1].second));
        }
        out.push_back(std::move(row));
    }
    return out;
}

void to_json(json& j, const FunnelRow& r) {
    j = json{{"stage", r.stage},
             {"count", r.count},
             {"pct_of_original", r.pct_of_original},
             {"pct_of_previous", r.pct_of_previous ? json(*r.pct_of_previous) : json(nullptr)}};
}

std::string render_funnel(const std::vector<FunnelRow>& rows) {
    TextTable t({"stage", "count", "% of original", "% of previous"});
    for (const auto& r : rows) {
        t.add_row({r.stage, std::to_string(r.count), fmt::format("{:.2f}%", r.pct_of_original),
                   r.pct_of_previous ? fmt::format("{:.2f}%", *r.pct_of_previous) : std::string("-")});
    }
    return t.render();
}

}  // namespace uq::curation
