#include <catch_amalgamated.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <httplib.h>

#include "support.hpp"
#include "uq/core/jsonl.hpp"

extern char** environ;

using namespace uq;

namespace {

std::string binary() {
    const char* b = std::getenv("UQ_BINARY");
    return b ? b : "build/tools/uq";
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

struct Run {
    int exit_code;
    std::string out, err;
};

Run uq_run(const test::TempDir& dir, const std::vector<std::string>& args) {
    std::string cmd = shell_quote(binary());
    for (const auto& a : args) cmd += " " + shell_quote(a);
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    cmd += " >" + shell_quote(out.string()) + " 2>" + shell_quote(err.string());
    const int status = std::system(cmd.c_str());
    return Run{WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

std::string fx(const std::string& name) { return test::fixture(name).string(); }

std::vector<std::string> validate_args(const std::string& out, const std::string& script, int workers) {
    return {"validate", "--judge", "o3", "--in", fx("qa.jsonl"), "--out", out, "--backend", "mock:" + fx(script),
            "--seed", "3", "--validator-id", "uq-pipeline", "--workers", std::to_string(workers)};
}

}  // namespace

TEST_CASE("validate is reproducible byte for byte", "[cli]") {
    test::TempDir dir;
    const auto out = (dir / "traces.jsonl").string();
    auto r = uq_run(dir, validate_args(out, "mock_judge.json", 1));
    REQUIRE(r.exit_code == 0);
    const auto first = read_file(out);
    r = uq_run(dir, validate_args(out, "mock_judge.json", 4));
    REQUIRE(r.exit_code == 0);
    CHECK(read_file(out) == first);

    const auto doc = read_jsonl(out, "traces");
    REQUIRE(doc.header);
    const auto& m = (*doc.header)["manifest"];
    CHECK(m["command"] == "validate");
    CHECK(m["seed"] == 3);
    CHECK(m["strategy"].get<std::string>().rfind("pipeline(", 0) == 0);
    REQUIRE(doc.records.size() == 8);
    for (std::size_t i = 0; i < doc.records.size(); ++i) {
        CHECK(doc.records[i]["answer_id"] == fmt::format("ans-{}", i + 1));
    }
    // Scripted failures land where the script puts them.
    CHECK(doc.records[1]["final"] == "fail");
    CHECK(doc.records[1]["fail_stage"] == 2);
    CHECK(doc.records[5]["final"] == "fail");
    CHECK(doc.records[5]["fail_stage"] == 3);
    // The start time lives in the sidecar, not the output.
    CHECK(std::filesystem::exists(out + ".run.json"));
    CHECK(first.find("started_at") == std::string::npos);
}

TEST_CASE("evaluate writes the report files", "[cli]") {
    test::TempDir dir;
    const auto traces = (dir / "traces.jsonl").string();
    REQUIRE(uq_run(dir, validate_args(traces, "mock_judge.json", 2)).exit_code == 0);
    const auto report_dir = (dir / "report").string();
    const auto r = uq_run(dir, {"evaluate", "--traces", traces, "--labels", fx("qa.jsonl"), "--out-dir", report_dir});
    CHECK(r.exit_code == 0);
    for (const char* f : {"report.txt", "report.metrics.jsonl", "report.bias.jsonl", "report.ranks.jsonl"}) {
        CHECK(std::filesystem::exists(std::filesystem::path(report_dir) / f));
    }
    CHECK(r.out.find("uq-pipeline") != std::string::npos);
    const auto metrics = read_jsonl(std::filesystem::path(report_dir) / "report.metrics.jsonl");
    REQUIRE(metrics.records.size() == 1);
    CHECK(metrics.records[0]["counts"].is_object());

    // Recount the confusion table from the traces and labels directly.
    std::map<std::string, std::string> truth;
    for (const auto& row : read_jsonl(fx("qa.jsonl")).records) {
        truth[row["answer"]["answer_id"]] = row["ground_truth"];
    }
    int tp = 0, fp = 0, fn = 0, tn = 0;
    for (const auto& t : read_jsonl(traces).records) {
        const bool pass = t["final"] == "pass", correct = truth.at(t["answer_id"]) == "correct";
        (pass ? (correct ? tp : fp) : (correct ? fn : tn))++;
    }
    const auto& c = metrics.records[0]["counts"];
    CHECK(c["tp"] == tp);
    CHECK(c["fp"] == fp);
    CHECK(c["fn"] == fn);
    CHECK(c["tn"] == tn);
}

TEST_CASE("exit codes separate usage errors from backend failures", "[cli]") {
    test::TempDir dir;
    CHECK(uq_run(dir, {"validate", "--no-such-flag"}).exit_code == 1);
    CHECK(uq_run(dir, {}).exit_code == 1);
    CHECK(uq_run(dir, {"--help"}).exit_code == 0);
    const auto out = (dir / "t.jsonl").string();
    CHECK(uq_run(dir, {"validate", "--strategy", "reflect(0, c[o3])", "--in", fx("qa.jsonl"), "--out", out,
                       "--backend", "mock:" + fx("mock_judge.json")})
              .exit_code == 1);
    CHECK(uq_run(dir, {"validate", "--judge", "o3", "--in", (dir / "missing.jsonl").string(), "--out", out,
                       "--backend", "mock:" + fx("mock_judge.json")})
              .exit_code == 1);

    const auto r = uq_run(dir, validate_args(out, "mock_unparsable.json", 1));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("no verdict marker") != std::string::npos);
    // Failed answers still get a trace recording the error.
    const auto doc = read_jsonl(out);
    REQUIRE(doc.records.size() == 8);
    CHECK(doc.records[0]["error_code"] == "UnparsableVerdict");

    // A call budget that runs out is a backend failure too.
    auto capped = validate_args(out, "mock_judge.json", 1);
    capped.insert(capped.end(), {"--max-calls", "5"});
    CHECK(uq_run(dir, capped).exit_code == 2);
}

TEST_CASE("filter applies the rules and the LLM pass", "[cli]") {
    test::TempDir dir;
    const auto kept = (dir / "kept.jsonl").string(), rejected = (dir / "rejected.jsonl").string(),
               funnel = (dir / "funnel.txt").string();
    const auto r = uq_run(dir, {"filter", "--in", fx("questions.jsonl"), "--out", kept, "--rejected", rejected,
                                "--funnel", funnel, "--now", "2025-06-01T00:00:00Z", "--llm", "--backend",
                                "mock:" + fx("mock_filter.json"), "--answer-model", "o4-mini", "--judge-model",
                                "o3"});
    REQUIRE(r.exit_code == 0);
    const auto doc = read_jsonl(kept, "questions");
    REQUIRE(doc.records.size() == 1);
    CHECK(doc.records[0]["id"] == "math:1");
    CHECK(doc.records[0]["diamond"] == true);
    std::map<std::string, std::string> why;
    for (const auto& row : read_jsonl(rejected).records) why[row["id"]] = row["rule"];
    CHECK(why.at("math:3") == "title-term");
    CHECK(why.at("math:4") == "age");
    CHECK(why.at("math:5") == "ratio");
    CHECK(why.at("math:6") == "images");
    CHECK(why.at("math:7") == "answers");
    CHECK(why.at("math:8") == "tags");
    CHECK(why.at("math:9") == "views");
    CHECK(why.at("math:10") == "votes");
    const auto table = read_file(funnel);
    CHECK(table.find("LLM-based filtering") != std::string::npos);
    CHECK(table.find("50.00%") != std::string::npos);
}

TEST_CASE("simulate prints the tradeoff table", "[cli]") {
    test::TempDir dir;
    const auto out = (dir / "sim.jsonl").string();
    const auto r = uq_run(dir, {"simulate", "--pairs", "20000", "--seed", "4", "--out", out});
    REQUIRE(r.exit_code == 0);
    const auto doc = read_jsonl(out, "simulation");
    REQUIRE(doc.records.size() == 3);
    double prev_precision = 0;
    for (const auto& row : doc.records) {
        const double p = row["precision"];
        CHECK(p >= prev_precision);
        prev_precision = p;
    }
    CHECK(uq_run(dir, {"simulate", "--tpr", "1.5"}).exit_code == 1);
}

TEST_CASE("serve answers on the v1 API and stops on SIGTERM", "[cli][http]") {
    test::TempDir dir;
    int pipefd[2];
    REQUIRE(pipe(pipefd) == 0);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, pipefd[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, pipefd[0]);
    const auto bin = binary();
    const auto data = (dir / "store").string(), questions = fx("questions.jsonl");
    std::vector<std::string> args{bin, "serve", "--port", "0", "--data", data, "--import", questions};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    std::vector<std::string> env_store{"UQ_REVIEW_TOKEN=t0ken"};
    for (char** e = environ; *e; ++e) {
        if (std::string(*e).rfind("UQ_REVIEW_TOKEN=", 0) != 0) env_store.emplace_back(*e);
    }
    std::vector<char*> envp;
    for (auto& e : env_store) envp.push_back(e.data());
    envp.push_back(nullptr);
    pid_t pid;
    REQUIRE(posix_spawn(&pid, bin.c_str(), &actions, nullptr, argv.data(), envp.data()) == 0);
    posix_spawn_file_actions_destroy(&actions);
    close(pipefd[1]);

    std::string line;
    char ch;
    while (read(pipefd[0], &ch, 1) == 1 && ch != '\n') line += ch;
    close(pipefd[0]);
    const auto colon = line.rfind(':');
    REQUIRE(colon != std::string::npos);
    const int port = std::stoi(line.substr(colon + 1));

    httplib::Client c("127.0.0.1", port);
    auto r = c.Get("/v1/stats");
    REQUIRE(r);
    CHECK(json::parse(r->body)["questions"] == 12);
    r = c.Post("/v1/questions", json(test::question("math:77")).dump(), "application/json");
    CHECK(r->status == 401);
    c.set_bearer_token_auth("t0ken");
    r = c.Post("/v1/questions", json(test::question("math:77")).dump(), "application/json");
    CHECK(r->status == 201);

    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(std::filesystem::exists(std::filesystem::path(data) / "events.jsonl"));
}
