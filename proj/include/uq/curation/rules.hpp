#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uq/core/json.hpp"
#include "uq/core/types.hpp"

namespace uq::curation {

struct SiteRuleConfig {
    double min_age_years = 2.0;
    std::int64_t min_views = 500;
    std::int64_t min_votes = 10;
    double max_views_per_vote = 5000.0;
    double top_percentile = 0.10;
    std::vector<std::string> forbid_title_terms{"why"};
    std::vector<std::string> forbid_tags{"homework", "advice", "policy", "recommendation"};
    bool forbid_images = true;
    bool require_zero_answers = true;
};

struct DiamondRule {
    std::int64_t min_views = 2000;
    std::int64_t min_votes = 75;
};

// Site thresholds plus defaults for sites without an entry.
struct CurationConfig {
    SiteRuleConfig defaults;
    std::map<std::string, SiteRuleConfig> sites;
    std::map<std::string, DiamondRule> diamond;

    const SiteRuleConfig& for_site(const std::string& site) const;
};

// Mathematics: ≥2000 views and ≥75 votes; MathOverflow: ≥2000 views and ≥50.
std::map<std::string, DiamondRule> default_diamond_rules();

// Throws Error(InvalidInput) on out-of-range values.
void validate_config(const SiteRuleConfig& c);

void to_json(json& j, const SiteRuleConfig& c);
// Missing keys fall back to `base`.
SiteRuleConfig site_config_from_json(const json& j, const SiteRuleConfig& base = {});
void to_json(json& j, const CurationConfig& c);
void from_json(const json& j, CurationConfig& c);
CurationConfig load_curation_config(const std::filesystem::path& path);

// Rules in evaluation order; a rejected record is charged to the first rule it
// fails. `Percentile` applies per site to records that pass all the others.
enum class Rule { Age, Views, Votes, Ratio, Answers, TitleTerm, Tags, Images, Percentile };

inline constexpr std::array<Rule, 9> kAllRules = {Rule::Age,     Rule::Views,     Rule::Votes,
                                                  Rule::Ratio,   Rule::Answers,   Rule::TitleTerm,
                                                  Rule::Tags,    Rule::Images,    Rule::Percentile};

std::string_view to_string(Rule r) noexcept;

// Markdown `![alt](url)` / `![alt][ref]` or an HTML <img> tag.
bool has_image(std::string_view body);
// Whole-word, case-insensitive.
bool title_has_term(std::string_view title, std::string_view term);

// First absolute rule `q` fails, if any.
std::optional<Rule> first_failed_rule(const QuestionRecord& q, const SiteRuleConfig& c, Timestamp now);

struct Rejection {
    std::string id;
    Rule rule;
};

struct FilterResult {
    std::vector<QuestionRecord> kept;  // input order
    std::vector<Rejection> rejected;   // input order
    std::map<Rule, std::int64_t> tally;
};

FilterResult rule_filter(const std::vector<QuestionRecord>& records, const CurationConfig& config,
                         Timestamp now);

bool diamond_tag(const QuestionRecord& q, const std::map<std::string, DiamondRule>& rules);

struct FunnelRow {
    std::string stage;
    std::int64_t count = 0;
    double pct_of_original = 0.0;            // rounded to 2 decimals
    std::optional<double> pct_of_previous;  // null for the first stage
};

// Throws Error(InvalidInput) with no stages or a zero first count.
std::vector<FunnelRow> funnel_stats(const std::vector<std::pair<std::string, std::int64_t>>& stages);

void to_json(json& j, const FunnelRow& r);
std::string render_funnel(const std::vector<FunnelRow>& rows);

}  // namespace uq::curation
