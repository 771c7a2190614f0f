#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "uq/core/json.hpp"
#include "uq/core/types.hpp"

namespace uq::curation {

struct HttpResponse {
    int status = 0;
    std::string body;  // already decompressed
};

class HttpFetcher {
public:
    virtual ~HttpFetcher() = default;
    // `target` is a path with query string. Connection failures throw
    // TransportError.
    virtual HttpResponse get(const std::string& target) = 0;
};

// httplib client with gzip support; `base_url` like "https://api.stackexchange.com".
class HttplibFetcher final : public HttpFetcher {
public:
    explicit HttplibFetcher(std::string base_url, std::chrono::seconds timeout = std::chrono::seconds(60));
    HttpResponse get(const std::string& target) override;

private:
    std::string base_url_;
    std::chrono::seconds timeout_;
};

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::steady_clock::time_point now() = 0;
    virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock final : public Clock {
public:
    std::chrono::steady_clock::time_point now() override;
    void sleep_for(std::chrono::milliseconds d) override;
};

struct CrawlWindow {
    Timestamp from{};
    Timestamp to{};
};

struct CrawlCheckpoint {
    std::string site;
    CrawlWindow window;
    int next_page = 1;
    std::int64_t emitted = 0;
    bool done = false;
};

void to_json(json& j, const CrawlCheckpoint& c);
void from_json(const json& j, CrawlCheckpoint& c);

struct CrawlOptions {
    std::string api_key;          // from UQ_STACKEXCHANGE_KEY when empty
    std::string filter = "withbody";
    int page_size = 100;
    int max_attempts = 5;
    std::chrono::milliseconds retry_delay{1000};
    std::optional<std::filesystem::path> checkpoint;
};

struct CrawlStats {
    std::int64_t requests = 0;
    std::int64_t emitted = 0;
    std::int64_t pages = 0;
    std::optional<std::int64_t> quota_remaining;
};

// Decodes the HTML entities the API puts into titles and markdown bodies.
std::string decode_html_entities(std::string_view s);

// Maps one API item to a record with provenance "crawled".
QuestionRecord question_from_api(const json& item, const std::string& site);

// Pages through unanswered questions of one site. Honors the API's `backoff`
// field before the next request, retries transport failures and 5xx/429
// replies, and stops with Error(QuotaExhausted) once the quota is spent,
// leaving a checkpoint to resume from.
class Crawler {
public:
    Crawler(HttpFetcher& fetcher, Clock& clock, CrawlOptions options);

    CrawlStats crawl(const std::string& site, const CrawlWindow& window,
                     const std::function<void(const QuestionRecord&)>& emit);

private:
    json fetch_page(const std::string& target, CrawlStats& stats);
    void save(const CrawlCheckpoint& cp) const;

    HttpFetcher& fetcher_;
    Clock& clock_;
    CrawlOptions options_;
    std::optional<std::chrono::steady_clock::time_point> not_before_;
};

}  // namespace uq::curation
