#pragma once

// A brute-force rule filter written straight from the rule list, plus a
// random corpus generator, for checking the curation engine against.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>

#include <fmt/format.h>

#include "support.hpp"
#include "uq/core/fingerprint.hpp"
#include "uq/core/time.hpp"
#include "uq/curation/rules.hpp"

namespace uq::test {

using namespace uq::curation;

inline const Timestamp kNow = parse_rfc3339("2025-06-01T00:00:00Z");

inline Timestamp years_ago(double years) {
    return kNow - std::chrono::seconds(static_cast<std::int64_t>(years * 365.25 * 86400.0));
}

inline QuestionRecord eligible(const std::string& id, const std::string& site = "math") {
    auto q = test::question(id, site);
    q.created_at = years_ago(3);
    q.views = 1200;
    q.score = 15;
    q.answer_count = 0;
    q.title = "Bounded harmonic functions on the plane";
    q.tags = {"complex-analysis"};
    q.body = "Let u be harmonic and bounded on the plane.";
    return q;
}

// Reference filter written from the rule list, independent of the engine:
// a question survives the absolute rules when every check below holds, and
// then survives the percentile rule when fewer than ceil(p·n) of its site's
// survivors have a strictly higher score.
struct Reference {
    static std::string low(std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    }

    static bool word_in(const std::string& title, const std::string& term) {
        const auto t = low(title), w = low(term);
        auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
        for (std::size_t i = 0; i + w.size() <= t.size(); ++i) {
            if (t.compare(i, w.size(), w) != 0) continue;
            if ((i == 0 || !word(t[i - 1])) && (i + w.size() == t.size() || !word(t[i + w.size()]))) return true;
        }
        return false;
    }

    static bool image(const std::string& body) {
        const auto b = low(body);
        if (b.find("<img") != std::string::npos) return true;
        for (auto p = body.find("!["); p != std::string::npos; p = body.find("![", p + 1)) {
            auto close = body.find(']', p);
            if (close == std::string::npos) continue;
            auto next = body.find_first_not_of(' ', close + 1);
            if (next != std::string::npos && (body[next] == '(' || body[next] == '[')) return true;
        }
        return false;
    }

    static bool passes(const QuestionRecord& q, const SiteRuleConfig& c) {
        const double age_s = std::chrono::duration<double>(kNow - q.created_at).count();
        if (age_s < c.min_age_years * 365.25 * 86400.0) return false;
        if (q.views < c.min_views || q.score < c.min_votes) return false;
        if (q.score <= 0 ? q.views > 0 : static_cast<double>(q.views) > c.max_views_per_vote * static_cast<double>(q.score))
            return false;
        if (c.require_zero_answers && q.answer_count > 0) return false;
        for (const auto& term : c.forbid_title_terms)
            if (word_in(q.title, term)) return false;
        for (const auto& tag : q.tags)
            for (const auto& bad : c.forbid_tags)
                if (low(tag) == low(bad)) return false;
        return !(c.forbid_images && image(q.body));
    }

    static std::vector<QuestionRecord> run(const std::vector<QuestionRecord>& in, const CurationConfig& cfg) {
        std::map<std::string, std::vector<const QuestionRecord*>> by_site;
        for (const auto& q : in)
            if (passes(q, cfg.for_site(q.site))) by_site[q.site].push_back(&q);
        std::vector<QuestionRecord> out;
        for (const auto& [site, qs] : by_site) {
            const auto m = static_cast<std::size_t>(
                std::ceil(cfg.for_site(site).top_percentile * static_cast<double>(qs.size()) - 1e-9));
            for (const auto* q : qs) {
                const auto higher = std::count_if(qs.begin(), qs.end(), [&](auto* o) { return o->score > q->score; });
                if (static_cast<std::size_t>(higher) < m) out.push_back(*q);
            }
        }
        return out;
    }
};

inline std::vector<std::string> canonical(std::vector<QuestionRecord> v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    std::vector<std::string> out;
    for (const auto& q : v) out.push_back(canonical_bytes(json(q)));
    return out;
}

inline std::vector<QuestionRecord> random_corpus(std::mt19937_64& rng, int n) {
    const std::vector<std::string> sites{"math", "mathoverflow", "physics", "cstheory", "mathematica"};
    const std::vector<std::string> titles{"Bounded harmonic functions", "Why does the series converge?",
                                          "Is whyte's lemma true", "why?", "Counting lattice paths",
                                          "A question about WHY-notation", "Non-trivial zeros"};
    const std::vector<std::vector<std::string>> tagsets{
        {"analysis"}, {"homework", "algebra"}, {"Advice"}, {"graph-theory", "recommendation-systems"}, {}, {"policy"}};
    const std::vector<std::string> bodies{"Plain text.", "See ![figure](http://x/y.png).", "An <IMG src=x> tag.",
                                          "Array index a![0] then [1].", "![alt] [ref]", "No images ! [here]"};
    std::vector<QuestionRecord> out;
    for (int i = 0; i < n; ++i) {
        QuestionRecord q;
        q.site = sites[rng() % sites.size()];
        q.id = fmt::format("{}:{}", q.site, i);
        q.title = titles[rng() % titles.size()];
        q.body = bodies[rng() % bodies.size()];
        q.tags = tagsets[rng() % tagsets.size()];
        q.created_at = years_ago(std::uniform_real_distribution<double>(0.5, 4.0)(rng));
        if (rng() % 20 == 0) q.created_at = years_ago(2.0);  // exactly on the boundary
        q.views = static_cast<std::int64_t>(rng() % 120'000);
        q.score = static_cast<std::int64_t>(rng() % 60) - 5;
        q.answer_count = rng() % 5 == 0 ? 1 : 0;
        out.push_back(std::move(q));
    }
    return out;
}

inline CurationConfig test_config() {
    CurationConfig cfg;
    cfg.diamond = default_diamond_rules();
    auto mo = cfg.defaults;
    mo.min_views = 200;
    mo.min_votes = 5;
    mo.top_percentile = 0.25;
    cfg.sites["mathoverflow"] = mo;
    auto mma = cfg.defaults;
    mma.min_votes = 10;
    mma.forbid_images = false;
    cfg.sites["mathematica"] = mma;
    return cfg;
}

}  // namespace uq::test
