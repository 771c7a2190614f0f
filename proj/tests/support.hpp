#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "uq/core/time.hpp"
#include "uq/core/types.hpp"

namespace uq::test {

inline QuestionRecord question(const std::string& id, const std::string& site = "math") {
    QuestionRecord q;
    q.id = id;
    q.site = site;
    q.title = "Is every bounded harmonic function on the plane constant?";
    q.body = "Let u be harmonic on R^2 with |u| < 1. Must u be constant?";
    q.tags = {"complex-analysis", "harmonic-functions"};
    q.created_at = parse_rfc3339("2019-03-04T05:06:07Z");
    q.views = 1200;
    q.score = 15;
    return q;
}

inline CandidateAnswer answer(const std::string& question_id, const std::string& answer_id,
                              const std::string& model = "o3") {
    CandidateAnswer a;
    a.question_id = question_id;
    a.answer_id = answer_id;
    a.model_id = model;
    a.text = "Yes. By Liouville's theorem applied to the harmonic conjugate, u is constant.";
    a.created_at = parse_rfc3339("2025-06-01T00:00:00Z");
    return a;
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "uq") {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path fixture(const std::string& name) {
    const char* dir = std::getenv("UQ_FIXTURE_DIR");
    return std::filesystem::path(dir ? dir : "tests/fixtures") / name;
}

}  // namespace uq::test
