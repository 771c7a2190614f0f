#include "uq/service/server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <fmt/format.h>

#include "uq/core/error.hpp"

namespace uq::service {

namespace {

constexpr const char* kContentType = "application/json; charset=utf-8";

int http_status(Errc code) {
    switch (code) {
        case Errc::UnknownQuestion:
        case Errc::UnknownAnswer: return 404;
        case Errc::DuplicateAnswer: return 409;
        case Errc::Unauthorized: return 401;
        case Errc::Io: return 500;
        default: return 400;
    }
}

std::string error_body(std::string_view code, std::string_view message) {
    return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

struct Reply {
    int status = 200;
    json body;
};

}  // namespace

struct ReviewServer::Impl {
    ReviewStore& store;
    ServerOptions options;
    httplib::Server http;

    Impl(ReviewStore& s, ServerOptions o) : store(s), options(std::move(o)) {}

    void send(httplib::Response& res, int status, const std::string& body) {
        res.status = status;
        res.set_content(body, kContentType);
    }

    bool authorized(const httplib::Request& req) const {
        if (options.token.empty()) return false;
        return req.get_header_value("Authorization") == "Bearer " + options.token;
    }

    // Runs a read handler, mapping domain errors to JSON error replies.
    void read(httplib::Response& res, const std::function<Reply()>& fn) {
        try {
            auto r = fn();
            send(res, r.status, r.body.dump());
        } catch (const Error& e) {
            send(res, http_status(e.code()), error_body(errc_name(e.code()), e.what()));
        } catch (const std::exception& e) {
            send(res, 400, error_body("InvalidInput", e.what()));
        }
    }

    // Writes also check the token and honour Idempotency-Key.
    void write(const httplib::Request& req, httplib::Response& res,
               const std::function<Reply(const json&)>& fn) {
        if (!authorized(req)) {
            send(res, 401, error_body("Unauthorized", "a valid bearer token is required"));
            return;
        }
        const auto key = req.get_header_value("Idempotency-Key");
        if (!key.empty()) {
            if (auto prior = store.idempotent(key)) {
                send(res, prior->status, prior->body);
                return;
            }
        }
        int status;
        std::string body;
        try {
            const auto payload = req.body.empty() ? json::object() : json::parse(req.body);
            auto r = fn(payload);
            status = r.status;
            body = r.body.dump();
        } catch (const json::exception& e) {
            status = 400;
            body = error_body("InvalidInput", e.what());
        } catch (const Error& e) {
            status = http_status(e.code());
            body = error_body(errc_name(e.code()), e.what());
        }
        if (!key.empty() && status < 500) store.remember(key, IdempotentResponse{status, body});
        send(res, status, body);
    }

    void routes() {
        http.Get("/v1/questions", [this](const httplib::Request& req, httplib::Response& res) {
            read(res, [&] {
                std::optional<Status> st;
                if (req.has_param("status")) st = parse_status(req.get_param_value("status"));
                const auto rows =
                    store.list_questions(req.get_param_value("sort"), req.get_param_value("site"), st);
                return Reply{200, json{{"questions", rows}}};
            });
        });
        http.Get(R"(/v1/questions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            read(res, [&] { return Reply{200, store.question_detail(req.matches[1].str())}; });
        });
        http.Get(R"(/v1/answers/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            read(res, [&] { return Reply{200, store.answer_detail(req.matches[1].str())}; });
        });
        http.Get("/v1/stats", [this](const httplib::Request&, httplib::Response& res) {
            read(res, [&] { return Reply{200, json(store.stats())}; });
        });
        http.Get("/v1/ranking", [this](const httplib::Request&, httplib::Response& res) {
            read(res, [&] { return Reply{200, json{{"ranking", store.ranking()}}}; });
        });

        http.Post("/v1/questions", [this](const httplib::Request& req, httplib::Response& res) {
            write(req, res, [&](const json& body) {
                const auto q = body.get<QuestionRecord>();
                store.put_question(q);
                return Reply{201, json{{"id", q.id}}};
            });
        });
        http.Post("/v1/answers", [this](const httplib::Request& req, httplib::Response& res) {
            write(req, res, [&](const json& body) {
                if (!body.contains("answer")) throw Error(Errc::InvalidInput, "missing 'answer'");
                const auto prompt = body.value("prompt", std::string{});
                const auto id = store.submit_answer(body.at("answer").get<CandidateAnswer>(), prompt);
                return Reply{201, json{{"id", id}}};
            });
        });
        http.Post(R"(/v1/answers/([^/]+)/traces)", [this](const httplib::Request& req, httplib::Response& res) {
            write(req, res, [&](const json& body) {
                const auto id = req.matches[1].str();
                store.attach_trace(id, body.get<composer::VerdictTrace>());
                const auto detail = store.answer_detail(id);
                return Reply{200, json{{"id", id}, {"status", store.status(detail.at("question_id"))}}};
            });
        });
        http.Post("/v1/reviews", [this](const httplib::Request& req, httplib::Response& res) {
            write(req, res, [&](const json& body) {
                auto review = body.get<ReviewRecord>();
                if (body.contains("expected_status")) {
                    const auto expected = parse_status(body.at("expected_status").get<std::string>());
                    const auto question = store.answer_detail(review.answer_id).at("question_id");
                    const auto current = store.status(question);
                    if (current.status != expected) {
                        return Reply{409, json{{"error", {{"code", "StaleStatus"},
                                                          {"message", "question status changed"}}},
                                               {"status", current}}};
                    }
                }
                auto [id, status] = store.submit_review(std::move(review));
                return Reply{201, json{{"id", id}, {"status", status}}};
            });
        });
        http.Post(R"(/v1/reviews/([^/]+)/revoke)", [this](const httplib::Request& req, httplib::Response& res) {
            write(req, res, [&](const json&) {
                return Reply{200, json{{"status", store.revoke_review(req.matches[1].str())}}};
            });
        });

        http.set_error_handler([this](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                res.set_content(error_body(res.status == 404 ? "NotFound" : "HttpError",
                                           fmt::format("HTTP {}", res.status)),
                                kContentType);
            }
        });
        http.set_logger([](const httplib::Request& req, const httplib::Response& res) {
            spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
        });
    }
};

ReviewServer::ReviewServer(ReviewStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
    const int threads = std::max(1, impl_->options.threads);
    impl_->http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    impl_->routes();
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->http.bind_to_any_port(host);
    return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool ReviewServer::listen() { return impl_->http.listen_after_bind(); }

void ReviewServer::stop() {
    if (impl_) impl_->http.stop();
}

void ReviewServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace uq::service
