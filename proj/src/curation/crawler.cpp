#include "uq/curation/crawler.hpp"

#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "uq/core/error.hpp"
#include "uq/core/jsonl.hpp"
#include "uq/core/time.hpp"

namespace uq::curation {

namespace {

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

}  // namespace

HttplibFetcher::HttplibFetcher(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

HttpResponse HttplibFetcher::get(const std::string& target) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(timeout_);
    client.set_decompress(true);
    auto res = client.Get(target, httplib::Headers{{"Accept-Encoding", "gzip"}});
    if (!res) {
        throw TransportError(fmt::format("GET {}{} failed: {}", base_url_, target, httplib::to_string(res.error())),
                             0, true);
    }
    return HttpResponse{res->status, res->body};
}

std::chrono::steady_clock::time_point SystemClock::now() { return std::chrono::steady_clock::now(); }

void SystemClock::sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

void to_json(json& j, const CrawlCheckpoint& c) {
    j = json{{"site", c.site},
             {"window", json{{"from", format_rfc3339(c.window.from)}, {"to", format_rfc3339(c.window.to)}}},
             {"next_page", c.next_page},
             {"emitted", c.emitted},
             {"done", c.done}};
}

void from_json(const json& j, CrawlCheckpoint& c) {
    c.site = j.at("site").get<std::string>();
    c.window.from = parse_rfc3339(j.at("window").at("from").get<std::string>());
    c.window.to = parse_rfc3339(j.at("window").at("to").get<std::string>());
    c.next_page = j.value("next_page", 1);
    c.emitted = j.value("emitted", std::int64_t{0});
    c.done = j.value("done", false);
}

std::string decode_html_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out += s[i];
            continue;
        }
        const auto semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += s[i];
            continue;
        }
        const auto name = s.substr(i + 1, semi - i - 1);
        std::optional<unsigned long> cp;
        if (name == "amp") cp = '&';
        else if (name == "lt") cp = '<';
        else if (name == "gt") cp = '>';
        else if (name == "quot") cp = '"';
        else if (name == "apos") cp = '\'';
        else if (name == "nbsp") cp = 0xA0;
        else if (name.size() > 1 && name[0] == '#') {
            const bool hex = name[1] == 'x' || name[1] == 'X';
            const std::string digits(name.substr(hex ? 2 : 1));
            char* end = nullptr;
            const auto v = std::strtoul(digits.c_str(), &end, hex ? 16 : 10);
            if (!digits.empty() && end && *end == '\0' && v > 0 && v <= 0x10FFFF) cp = v;
        }
        if (!cp) {
            out += s[i];
            continue;
        }
        append_utf8(out, *cp);
        i = semi;
    }
    return out;
}

QuestionRecord question_from_api(const json& item, const std::string& site) {
    QuestionRecord q;
    q.site = site;
    q.id = fmt::format("{}:{}", site, item.at("question_id").get<std::int64_t>());
    q.title = decode_html_entities(item.value("title", std::string{}));
    if (item.contains("body_markdown")) {
        q.body = decode_html_entities(item.at("body_markdown").get<std::string>());
    } else {
        q.body = item.value("body", std::string{});
    }
    q.tags = item.value("tags", std::vector<std::string>{});
    q.created_at = from_unix(item.value("creation_date", std::int64_t{0}));
    q.views = item.value("view_count", std::int64_t{0});
    q.score = item.value("score", std::int64_t{0});
    q.answer_count = item.value("answer_count", std::int64_t{0});
    q.provenance = Provenance::Crawled;
    return q;
}

Crawler::Crawler(HttpFetcher& fetcher, Clock& clock, CrawlOptions options)
    : fetcher_(fetcher), clock_(clock), options_(std::move(options)) {
    if (options_.api_key.empty()) {
        if (const char* k = std::getenv("UQ_STACKEXCHANGE_KEY")) options_.api_key = k;
    }
    if (options_.page_size < 1 || options_.page_size > 100) {
        throw Error(Errc::InvalidInput, "page_size must lie in [1,100]");
    }
}

void Crawler::save(const CrawlCheckpoint& cp) const {
    if (options_.checkpoint) write_file_atomic(*options_.checkpoint, json(cp).dump(2) + "\n");
}

json Crawler::fetch_page(const std::string& target, CrawlStats& stats) {
    std::string last_error;
    for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
        if (attempt > 0) clock_.sleep_for(options_.retry_delay * (1 << (attempt - 1)));
        if (not_before_) {
            const auto now = clock_.now();
            if (now < *not_before_) {
                clock_.sleep_for(std::chrono::ceil<std::chrono::milliseconds>(*not_before_ - now));
            }
            not_before_.reset();
        }
        ++stats.requests;
        HttpResponse res;
        try {
            res = fetcher_.get(target);
        } catch (const TransportError& e) {
            last_error = e.what();
            if (!e.retryable()) throw;
            continue;
        }
        json body;
        try {
            body = json::parse(res.body);
        } catch (const json::exception&) {
            body = json::object();
        }
        if (auto it = body.find("backoff"); it != body.end() && it->is_number()) {
            not_before_ = clock_.now() + std::chrono::seconds(it->get<std::int64_t>());
        }
        const auto error_name = body.value("error_name", std::string{});
        if (res.status == 429 || res.status >= 500 || error_name == "throttle_violation") {
            last_error = fmt::format("HTTP {} {}", res.status, error_name);
            continue;
        }
        if (res.status != 200) {
            throw TransportError(fmt::format("Stack Exchange API returned HTTP {}: {} {}", res.status, error_name,
                                             body.value("error_message", std::string{})),
                                 res.status, false);
        }
        return body;
    }
    throw Error(Errc::BackendUnavailable,
                fmt::format("Stack Exchange API unavailable after {} attempts: {}", options_.max_attempts, last_error));
}

CrawlStats Crawler::crawl(const std::string& site, const CrawlWindow& window,
                          const std::function<void(const QuestionRecord&)>& emit) {
    CrawlCheckpoint cp{site, window, 1, 0, false};
    if (options_.checkpoint && std::filesystem::exists(*options_.checkpoint)) {
        auto saved = json::parse(read_file(*options_.checkpoint)).get<CrawlCheckpoint>();
        if (saved.site == site && saved.window.from == window.from && saved.window.to == window.to) cp = saved;
    }
    CrawlStats stats;
    stats.emitted = cp.emitted;
    while (!cp.done) {
        auto target = fmt::format(
            "/2.3/questions/no-answers?site={}&fromdate={}&todate={}&page={}&pagesize={}&order=desc&sort=votes&filter={}",
            site, to_unix(window.from), to_unix(window.to), cp.next_page, options_.page_size, options_.filter);
        if (!options_.api_key.empty()) target += "&key=" + options_.api_key;
        const auto page = fetch_page(target, stats);
        ++stats.pages;
        for (const auto& item : page.value("items", json::array())) {
            emit(question_from_api(item, site));
            ++cp.emitted;
        }
        stats.emitted = cp.emitted;
        ++cp.next_page;
        cp.done = !page.value("has_more", false);
        if (auto it = page.find("quota_remaining"); it != page.end() && it->is_number()) {
            stats.quota_remaining = it->get<std::int64_t>();
        }
        save(cp);
        if (!cp.done && stats.quota_remaining && *stats.quota_remaining <= 0) {
            throw Error(Errc::QuotaExhausted,
                        fmt::format("Stack Exchange quota exhausted on {} at page {}; resume from the checkpoint",
                                    site, cp.next_page));
        }
    }
    return stats;
}

}  // namespace uq::curation
