#pragma once

#include <memory>
#include <string>

#include "uq/service/store.hpp"

namespace uq::service {

struct ServerOptions {
    // Bearer token required on every write. Empty rejects all writes.
    std::string token;
    int threads = 4;
};

// The `/v1` HTTP API over a ReviewStore.
//
//   GET  /v1/questions?sort=votes|status|id&site=..&status=..
//   GET  /v1/questions/{id}
//   GET  /v1/answers/{id}
//   GET  /v1/stats
//   GET  /v1/ranking
//   POST /v1/questions              question record
//   POST /v1/answers                {"answer": {...}, "prompt": "..."}
//   POST /v1/answers/{id}/traces    verdict trace
//   POST /v1/reviews                review record, optional "expected_status"
//   POST /v1/reviews/{id}/revoke
//
// A POST carrying an `Idempotency-Key` header is answered once; replays get
// the recorded response. A review whose `expected_status` no longer matches
// is refused with 409 so the client can re-fetch.
class ReviewServer {
public:
    ReviewServer(ReviewStore& store, ServerOptions options);
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    // Port 0 picks a free port. Returns the bound port, or -1.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    bool listen();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace uq::service
