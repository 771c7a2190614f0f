#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "curation_oracle.hpp"
#include "support.hpp"
#include "uq/core/error.hpp"
#include "uq/core/fingerprint.hpp"
#include "uq/core/jsonl.hpp"
#include "uq/core/time.hpp"
#include "uq/curation/crawler.hpp"
#include "uq/curation/llm_filter.hpp"
#include "uq/curation/rules.hpp"
#include "uq/gateway/mock.hpp"
#include "uq/strategy/prompt_pack.hpp"

using namespace uq;
using namespace uq::curation;
using Catch::Approx;
using test::canonical;
using test::eligible;
using test::kNow;
using test::random_corpus;
using test::Reference;
using test::test_config;
using test::years_ago;


TEST_CASE("rule examples", "[curation][rules]") {
    const CurationConfig cfg;
    auto fails = [&](const QuestionRecord& q) { return first_failed_rule(q, cfg.defaults, kNow); };
    CHECK_FALSE(fails(eligible("math:1")));

    auto young = eligible("math:2");
    young.created_at = years_ago(1.5);
    CHECK(fails(young) == Rule::Age);
    auto ratio = eligible("math:3");
    ratio.views = 60'000;
    ratio.score = 10;
    CHECK(fails(ratio) == Rule::Ratio);
    auto why = eligible("math:4");
    why.title = "Why does X happen?";
    CHECK(fails(why) == Rule::TitleTerm);
    auto whyte = eligible("math:5");
    whyte.title = "Whyte's conjecture";
    CHECK_FALSE(fails(whyte));
    auto tagged = eligible("math:6");
    tagged.tags = {"HomeWork"};
    CHECK(fails(tagged) == Rule::Tags);
    auto pic = eligible("math:7");
    pic.body = "As shown: ![plot](https://i.stack.imgur.com/x.png)";
    CHECK(fails(pic) == Rule::Images);
    auto answered = eligible("math:8");
    answered.answer_count = 2;
    CHECK(fails(answered) == Rule::Answers);
    auto few_views = eligible("math:9");
    few_views.views = 499;
    CHECK(fails(few_views) == Rule::Views);
    auto few_votes = eligible("math:10");
    few_votes.score = 9;
    CHECK(fails(few_votes) == Rule::Votes);

    CHECK(has_image("<img src='a.png'>"));
    CHECK(has_image("![a][1]"));
    CHECK_FALSE(has_image("x! [y](z)"));
    CHECK(title_has_term("So, WHY?", "why"));
    CHECK_FALSE(title_has_term("whyever", "why"));
}

TEST_CASE("rule filter equals the reference on a random corpus", "[curation][rules][oracle]") {
    std::mt19937_64 rng(1000);
    const auto corpus = random_corpus(rng, 1000);
    const auto cfg = test_config();
    const auto result = rule_filter(corpus, cfg, kNow);
    const auto expected = Reference::run(corpus, cfg);
    CHECK(canonical(result.kept) == canonical(expected));
    CHECK(result.kept.size() + result.rejected.size() == corpus.size());
    std::int64_t tallied = 0;
    for (const auto& [rule, n] : result.tally) tallied += n;
    CHECK(tallied == static_cast<std::int64_t>(result.rejected.size()));
    CHECK(!result.kept.empty());

    // Input order does not matter.
    auto shuffled = corpus;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(canonical(rule_filter(shuffled, cfg, kNow).kept) == canonical(result.kept));

    // Several more corpora and configurations.
    for (int round = 0; round < 20; ++round) {
        auto more = random_corpus(rng, 300);
        auto c = test_config();
        c.defaults.top_percentile = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
        c.defaults.max_views_per_vote = std::uniform_real_distribution<double>(500, 8000)(rng);
        c.defaults.min_age_years = std::uniform_real_distribution<double>(0, 3)(rng);
        CHECK(canonical(rule_filter(more, c, kNow).kept) == canonical(Reference::run(more, c)));
    }
}

TEST_CASE("planted survivors are exactly what is kept", "[curation][rules][oracle]") {
    std::mt19937_64 rng(7);
    CurationConfig cfg;
    cfg.defaults.top_percentile = 1.0;
    std::vector<QuestionRecord> corpus;
    std::set<std::string> planted;
    std::map<Rule, std::int64_t> broken;
    for (int i = 0; i < 1000; ++i) {
        auto q = eligible(fmt::format("math:{}", i));
        if (i % 7 == 0) {
            planted.insert(q.id);
        } else {
            const auto rule = kAllRules[rng() % 8];
            ++broken[rule];
            switch (rule) {
                case Rule::Age: q.created_at = years_ago(1.9); break;
                case Rule::Views: q.views = 100; q.score = 12; break;
                case Rule::Votes: q.score = 3; break;
                case Rule::Ratio: q.views = 90'000; break;
                case Rule::Answers: q.answer_count = 1; break;
                case Rule::TitleTerm: q.title = "But why is it bounded"; break;
                case Rule::Tags: q.tags.push_back("advice"); break;
                default: q.body += " <img src=\"f.png\">"; break;
            }
        }
        corpus.push_back(q);
    }
    const auto result = rule_filter(corpus, cfg, kNow);
    std::set<std::string> kept;
    for (const auto& q : result.kept) kept.insert(q.id);
    CHECK(kept == planted);
    for (auto r : kAllRules) CHECK(result.tally.at(r) == (r == Rule::Percentile ? 0 : broken[r]));
}

TEST_CASE("the percentile rule keeps ties at the cutoff", "[curation][rules]") {
    CurationConfig cfg;
    std::vector<QuestionRecord> qs;
    const int scores[] = {50, 40, 40, 30, 20, 20, 20, 15, 12, 11, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10};
    for (int i = 0; i < 21; ++i) {
        auto q = eligible(fmt::format("math:{}", i));
        q.score = scores[i];
        q.views = 1000;
        qs.push_back(q);
    }
    // ceil(0.1 · 21) = 3 survivors, the third ties with the second.
    auto result = rule_filter(qs, cfg, kNow);
    REQUIRE(result.kept.size() == 3);
    CHECK(result.tally.at(Rule::Percentile) == 18);
    cfg.defaults.top_percentile = 0.15;  // ceil(3.15) = 4, cutoff 30
    CHECK(rule_filter(qs, cfg, kNow).kept.size() == 4);
    cfg.defaults.top_percentile = 0.2;  // ceil(4.2) = 5, cutoff 20 keeps all three 20s
    CHECK(rule_filter(qs, cfg, kNow).kept.size() == 7);
}

TEST_CASE("tightening a threshold never grows the kept set", "[curation][rules][property]") {
    // With the percentile rule off, since re-ranking a smaller pool can admit
    // records that were ranked out before.
    std::mt19937_64 rng(31);
    const auto corpus = random_corpus(rng, 600);
    CurationConfig base;
    base.defaults.top_percentile = 1.0;
    base.defaults.forbid_images = false;
    auto ids = [&](const CurationConfig& c) {
        std::set<std::string> out;
        for (const auto& q : rule_filter(corpus, c, kNow).kept) out.insert(q.id);
        return out;
    };
    const auto loose = ids(base);
    std::vector<CurationConfig> tighter(7, base);
    tighter[0].defaults.min_age_years = 2.5;
    tighter[1].defaults.min_views = 5000;
    tighter[2].defaults.min_votes = 30;
    tighter[3].defaults.max_views_per_vote = 1000;
    tighter[4].defaults.forbid_title_terms.push_back("zeros");
    tighter[5].defaults.forbid_tags.push_back("analysis");
    tighter[6].defaults.forbid_images = true;
    for (const auto& c : tighter) {
        const auto t = ids(c);
        CHECK(std::includes(loose.begin(), loose.end(), t.begin(), t.end()));
        CHECK(t.size() <= loose.size());
    }

    // Lowering the percentile alone shrinks the kept set as well.
    auto prev = ids(base);
    for (double p : {0.8, 0.5, 0.3, 0.1, 0.01}) {
        auto c = base;
        c.defaults.top_percentile = p;
        const auto cur = ids(c);
        CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
        prev = cur;
    }
}

TEST_CASE("funnel percentages on the reference pool sizes", "[curation][funnel]") {
    const auto rows = funnel_stats({{"Raw question pool", 3'000'000},
                                    {"Rule-based filtering", 33'916},
                                    {"LLM-based filtering", 7'685},
                                    {"Human review", 500}});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].pct_of_original == 100.0);
    CHECK_FALSE(rows[0].pct_of_previous);
    CHECK(rows[1].pct_of_original == 1.13);
    CHECK(rows[2].pct_of_original == 0.26);
    CHECK(rows[3].pct_of_original == 0.02);
    CHECK(rows[2].pct_of_previous == 22.66);
    CHECK(rows[3].pct_of_previous == 6.51);
    const auto text = render_funnel(rows);
    CHECK(text.find("1.13%") != std::string::npos);
    CHECK(text.find("22.66%") != std::string::npos);

    CHECK(funnel_stats({{"only", 7}})[0].pct_of_original == 100.0);
    CHECK(funnel_stats({{"a", 100}, {"b", 50}})[1].pct_of_previous == 50.0);
    CHECK_THROWS_AS(funnel_stats({}), Error);
    CHECK_THROWS_AS(funnel_stats({{"a", 0}}), Error);
}

TEST_CASE("diamond thresholds", "[curation][diamond]") {
    const auto rules = default_diamond_rules();
    auto q = eligible("math:1");
    q.views = 2500;
    q.score = 80;
    CHECK(diamond_tag(q, rules));
    q.score = 74;
    CHECK_FALSE(diamond_tag(q, rules));
    q.score = 75;
    q.views = 1999;
    CHECK_FALSE(diamond_tag(q, rules));
    auto mo = eligible("mathoverflow:1", "mathoverflow");
    mo.views = 2000;
    mo.score = 50;
    CHECK(diamond_tag(mo, rules));
    auto phys = eligible("physics:1", "physics");
    phys.views = 1'000'000;
    phys.score = 1000;
    CHECK_FALSE(diamond_tag(phys, rules));
}

TEST_CASE("curation config files", "[curation][config]") {
    test::TempDir dir;
    write_file_atomic(dir / "sites.json", R"({
        "defaults": {"min_views": 400},
        "sites": {"mathematica": {"min_votes": 10}, "physics": {"min_views": 2000}},
        "diamond": {"math": {"min_views": 2000, "min_votes": 75}}})");
    const auto cfg = load_curation_config(dir / "sites.json");
    CHECK(cfg.defaults.min_views == 400);
    CHECK(cfg.for_site("mathematica").min_views == 400);
    CHECK(cfg.for_site("mathematica").min_votes == 10);
    CHECK(cfg.for_site("physics").min_views == 2000);
    CHECK(cfg.for_site("unknown").max_views_per_vote == 5000.0);
    CHECK(cfg.diamond.size() == 1);
    const auto back = json(cfg).get<CurationConfig>();
    CHECK(json(back) == json(cfg));

    write_file_atomic(dir / "bad.json", R"({"defaults": {"top_percentile": 1.5}})");
    CHECK_THROWS_AS(load_curation_config(dir / "bad.json"), Error);
}

namespace {

// Filter judge replying from a per-attempt table; the answer model drafts a
// fixed answer.
struct FilterWorld {
    std::vector<std::string> replies;
    std::mutex mu;
    std::vector<gateway::ModelCall> calls;

    std::shared_ptr<gateway::Backend> backend() {
        return std::make_shared<gateway::LambdaBackend>([this](const gateway::ModelCall& c) {
            std::lock_guard lock(mu);
            calls.push_back(c);
            if (c.tags.purpose == "answer") return std::string("DRAFT-ANSWER: u is constant.");
            if (c.messages.size() > 1) return replies.back();
            return replies.at(static_cast<std::size_t>(c.attempt_index));
        });
    }
};

LlmFilterResult run_filter(FilterWorld& world) {
    gateway::GatewayOptions o;
    o.cache = false;
    gateway::Gateway gw(o);
    gw.register_fallback(world.backend());
    return llm_filter(gw, strategy::PromptPack::builtin(), eligible("math:1"), "o4-mini", "o3");
}

std::string reply(double ac, double es, bool a = true, bool w = true, bool o = true) {
    return format_quality_reply(QualityCall{ac, es, a, w, o});
}

}  // namespace

TEST_CASE("the LLM filter keeps only hard, well-posed questions", "[curation][llm]") {
    {
        FilterWorld world;
        world.replies = {reply(30, 55), reply(35, 60), reply(40, 65)};
        const auto r = run_filter(world);
        CHECK(r.judgment.answer_correctness == Approx(35));
        CHECK(r.judgment.expert_solvability == Approx(60));
        CHECK(r.judgment.calls.size() == 3);
        CHECK(r.keep);
        CHECK(r.candidate_answer == "DRAFT-ANSWER: u is constant.");
        REQUIRE(world.calls.size() == 4);
        CHECK(world.calls[0].model_id == "o4-mini");
        CHECK(world.calls[0].temperature == Approx(0.3));
        for (std::size_t i = 1; i < 4; ++i) {
            CHECK(world.calls[i].model_id == "o3");
            CHECK(world.calls[i].temperature == 0.0);
            const auto& prompt = world.calls[i].messages[0].content;
            CHECK(prompt.find("DRAFT-ANSWER") != std::string::npos);
            CHECK(prompt.find("complex-analysis") != std::string::npos);
            CHECK(prompt.find("{model_answer}") == std::string::npos);
        }
    }
    {
        FilterWorld world;
        world.replies = {reply(50, 60), reply(50, 60), reply(50, 60)};
        CHECK_FALSE(run_filter(world).keep);
    }
    {
        FilterWorld world;
        world.replies = {reply(35, 60), reply(35, 60, true, false), reply(35, 60)};
        const auto r = run_filter(world);
        CHECK_FALSE(r.judgment.well_defined);
        CHECK(r.judgment.approachable);
        CHECK_FALSE(r.keep);
    }
    {
        FilterWorld world;
        world.replies = {reply(40, 70), reply(40, 70), reply(40, 70)};
        CHECK(run_filter(world).keep);  // the bounds are inclusive
    }
}

TEST_CASE("filter thresholds follow the aggregate definition", "[curation][llm][property]") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 2000; ++i) {
        std::vector<QualityCall> calls(3);
        for (auto& c : calls) {
            c.answer_correctness = static_cast<double>(rng() % 101);
            c.expert_solvability = static_cast<double>(rng() % 101);
            c.approachable = rng() % 8 != 0;
            c.well_defined = rng() % 8 != 0;
            c.objective = rng() % 8 != 0;
        }
        const auto j = aggregate_quality(calls);
        double ac = 0, es = 0;
        bool all = true;
        for (const auto& c : calls) {
            ac += c.answer_correctness / 3;
            es += c.expert_solvability / 3;
            all = all && c.approachable && c.well_defined && c.objective;
        }
        CHECK(keep_question(j) == (ac <= 40 + 1e-9 && es <= 70 + 1e-9 && all));
    }
    CHECK_THROWS_AS(aggregate_quality({}), Error);
}

TEST_CASE("filter replies are parsed tolerantly", "[curation][llm]") {
    const auto c = parse_quality(
        "**Answer_Correctness**: 35\n**Expert_Solve_Probability:** 60 %\nAnswerable: yes\nClear: Yes\n"
        "Unambiguous Answer: No\nOn second thought, Answer_Correctness: 20%");
    REQUIRE(c);
    CHECK(c->answer_correctness == 20);
    CHECK(c->expert_solvability == 60);
    CHECK(c->approachable);
    CHECK_FALSE(c->objective);
    CHECK_FALSE(parse_quality("Answer_Correctness: 120%\nExpert_Solve_Probability: 3%\nAnswerable: Yes\nClear: "
                              "Yes\nUnambiguous_Answer: Yes"));
    CHECK_FALSE(parse_quality("Answer_Correctness: 10%"));
    const QualityCall round{12.5, 70, true, false, true};
    const auto back = parse_quality(format_quality_reply(round));
    REQUIRE(back);
    CHECK(json(*back) == json(round));

    FilterWorld world;
    world.replies = {"I cannot rate this.", reply(10, 10), reply(10, 10), reply(10, 10)};
    CHECK(run_filter(world).keep);  // the first reply is rescued by the re-ask

    FilterWorld stubborn;
    stubborn.replies = {"no", "still no"};
    try {
        run_filter(stubborn);
        FAIL("expected UnparsableJudgment");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnparsableJudgment);
    }
}

namespace {

class FakeClock final : public Clock {
public:
    std::chrono::steady_clock::time_point now() override { return t_; }
    void sleep_for(std::chrono::milliseconds d) override {
        sleeps.push_back(d);
        t_ += d;
    }
    std::vector<std::chrono::milliseconds> sleeps;

private:
    std::chrono::steady_clock::time_point t_{};
};

class FakeFetcher final : public HttpFetcher {
public:
    FakeFetcher(Clock& clock, std::vector<HttpResponse> responses) : clock_(clock), responses_(std::move(responses)) {}
    HttpResponse get(const std::string& target) override {
        targets.push_back(target);
        times.push_back(clock_.now());
        if (next_ >= responses_.size()) throw TransportError("no more canned responses", 0, false);
        const auto r = responses_[next_++];
        if (r.status == 0) throw TransportError("connection refused", 0, true);
        return r;
    }
    std::vector<std::string> targets;
    std::vector<std::chrono::steady_clock::time_point> times;

private:
    Clock& clock_;
    std::vector<HttpResponse> responses_;
    std::size_t next_ = 0;
};

json api_item(int id, int views, int score) {
    return json{{"question_id", id},
                {"title", "Is &quot;x &lt; y&quot; decidable?"},
                {"body_markdown", "Let &amp; be &#955;."},
                {"tags", {"logic"}},
                {"creation_date", 1500000000},
                {"view_count", views},
                {"score", score},
                {"answer_count", 0}};
}

HttpResponse page(std::vector<json> items, bool has_more, int quota, std::optional<int> backoff = {}) {
    json body{{"items", items}, {"has_more", has_more}, {"quota_remaining", quota}};
    if (backoff) body["backoff"] = *backoff;
    return HttpResponse{200, body.dump()};
}

const CrawlWindow kWindow{parse_rfc3339("2015-01-01T00:00:00Z"), parse_rfc3339("2023-06-01T00:00:00Z")};

}  // namespace

TEST_CASE("crawled items map to question records", "[curation][crawler]") {
    FakeClock clock;
    FakeFetcher fetcher(clock, {page({api_item(11, 3000, 42), api_item(12, 150, 3)}, false, 9000)});
    CrawlOptions opts;
    opts.api_key = "k";
    Crawler crawler(fetcher, clock, opts);
    std::vector<QuestionRecord> got;
    const auto stats = crawler.crawl("math", kWindow, [&](const QuestionRecord& q) { got.push_back(q); });
    REQUIRE(got.size() == 2);
    CHECK(got[0].id == "math:11");
    CHECK(got[0].title == "Is \"x < y\" decidable?");
    CHECK(got[0].body == "Let & be λ.");
    CHECK(got[0].views == 3000);
    CHECK(got[0].score == 42);
    CHECK(got[0].provenance == Provenance::Crawled);
    CHECK(to_unix(got[0].created_at) == 1500000000);
    CHECK(stats.quota_remaining == 9000);
    CHECK(fetcher.targets[0].find("site=math") != std::string::npos);
    CHECK(fetcher.targets[0].find("key=k") != std::string::npos);
    CHECK(fetcher.targets[0].find("fromdate=1420070400") != std::string::npos);
}

TEST_CASE("the crawler honours backoff and retries", "[curation][crawler]") {
    FakeClock clock;
    FakeFetcher fetcher(clock, {page({api_item(1, 900, 10)}, true, 500, 10),
                                HttpResponse{503, "{}"},
                                HttpResponse{0, ""},
                                page({api_item(2, 900, 10)}, false, 499)});
    CrawlOptions opts;
    opts.retry_delay = std::chrono::milliseconds(1000);
    Crawler crawler(fetcher, clock, opts);
    int n = 0;
    const auto stats = crawler.crawl("math", kWindow, [&](const QuestionRecord&) { ++n; });
    CHECK(n == 2);
    CHECK(stats.requests == 4);
    CHECK(stats.pages == 2);
    REQUIRE(fetcher.times.size() == 4);
    CHECK(fetcher.times[1] - fetcher.times[0] >= std::chrono::seconds(10));
    CHECK(fetcher.times[2] - fetcher.times[1] >= std::chrono::milliseconds(1000));
    CHECK(fetcher.times[3] - fetcher.times[2] >= std::chrono::milliseconds(2000));
    CHECK(fetcher.targets[3].find("page=2") != std::string::npos);

    FakeFetcher forbidden(clock, {HttpResponse{400, R"({"error_name":"bad_parameter"})"}});
    Crawler strict(forbidden, clock, opts);
    CHECK_THROWS_AS(strict.crawl("math", kWindow, [](const QuestionRecord&) {}), TransportError);

    FakeFetcher down(clock, std::vector<HttpResponse>(5, HttpResponse{429, "{}"}));
    Crawler patient(down, clock, opts);
    try {
        patient.crawl("math", kWindow, [](const QuestionRecord&) {});
        FAIL("expected BackendUnavailable");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::BackendUnavailable);
    }
}

TEST_CASE("quota exhaustion leaves a checkpoint to resume from", "[curation][crawler]") {
    test::TempDir dir;
    FakeClock clock;
    CrawlOptions opts;
    opts.checkpoint = dir / "math.checkpoint.json";
    FakeFetcher first(clock, {page({api_item(1, 900, 10), api_item(2, 900, 10)}, true, 0)});
    Crawler c1(first, clock, opts);
    std::vector<std::string> ids;
    auto emit = [&](const QuestionRecord& q) { ids.push_back(q.id); };
    try {
        c1.crawl("math", kWindow, emit);
        FAIL("expected QuotaExhausted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::QuotaExhausted);
    }
    const auto cp = json::parse(read_file(*opts.checkpoint)).get<CrawlCheckpoint>();
    CHECK(cp.next_page == 2);
    CHECK(cp.emitted == 2);
    CHECK_FALSE(cp.done);

    FakeFetcher second(clock, {page({api_item(3, 900, 10)}, false, 100)});
    Crawler c2(second, clock, opts);
    const auto stats = c2.crawl("math", kWindow, emit);
    CHECK(second.targets.size() == 1);
    CHECK(second.targets[0].find("page=2") != std::string::npos);
    CHECK(stats.emitted == 3);
    CHECK(ids == std::vector<std::string>{"math:1", "math:2", "math:3"});

    // A different window starts over.
    FakeFetcher third(clock, {page({}, false, 100)});
    Crawler c3(third, clock, opts);
    c3.crawl("math", CrawlWindow{kWindow.from, kNow}, emit);
    CHECK(third.targets[0].find("page=1") != std::string::npos);
}

TEST_CASE("the HTTP fetcher decodes gzip responses", "[curation][crawler][http]") {
    httplib::Server server;
    std::string encoding, accept;
    std::mutex mu;
    server.Get("/2.3/questions/no-answers", [&](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mu);
        accept = req.get_header_value("Accept-Encoding");
        std::vector<json> items;
        for (int i = 0; i < 40; ++i) items.push_back(api_item(i, 1000 + i, 20));
        res.set_content(json{{"items", items}, {"has_more", false}, {"quota_remaining", 42}}.dump(),
                        "application/json");
    });
    server.set_logger([&](const httplib::Request&, const httplib::Response& res) {
        std::lock_guard lock(mu);
        encoding = res.get_header_value("Content-Encoding");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttplibFetcher fetcher("http://127.0.0.1:" + std::to_string(port));
    SystemClock clock;
    Crawler crawler(fetcher, clock, {});
    std::int64_t views = 0;
    const auto stats = crawler.crawl("physics", kWindow, [&](const QuestionRecord& q) { views += q.views; });
    server.stop();
    t.join();
    CHECK(stats.emitted == 40);
    CHECK(views == 40 * 1000 + 780);
    CHECK(stats.quota_remaining == 42);
    CHECK(accept.find("gzip") != std::string::npos);
    CHECK(encoding == "gzip");
}
