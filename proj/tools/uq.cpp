#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "uq/composer/spec.hpp"
#include "uq/composer/validator.hpp"
#include "uq/core/error.hpp"
#include "uq/core/json.hpp"
#include "uq/core/jsonl.hpp"
#include "uq/core/table.hpp"
#include "uq/core/time.hpp"
#include "uq/curation/crawler.hpp"
#include "uq/curation/llm_filter.hpp"
#include "uq/curation/rules.hpp"
#include "uq/eval/analysis.hpp"
#include "uq/eval/dataset.hpp"
#include "uq/eval/report.hpp"
#include "uq/eval/simulate.hpp"
#include "uq/gateway/gateway.hpp"
#include "uq/gateway/http_backend.hpp"
#include "uq/gateway/mock.hpp"
#include "uq/service/server.hpp"
#include "uq/service/store.hpp"
#include "uq/strategy/judge.hpp"

namespace fs = std::filesystem;
using namespace uq;

namespace {

struct Common {
    std::string config_path;
    bool verbose = false;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidInput, fmt::format("{}: {}", path, e.what()));
    }
}

json manifest(const std::string& command, const json& fields) {
    json m{{"command", command}, {"tool_version", UQ_VERSION}};
    for (const auto& [k, v] : fields.items()) m[k] = v;
    return m;
}

// Wall-clock start time goes next to the output, not into it, so repeated
// runs stay byte-identical.
void write_run_sidecar(const fs::path& out, const json& m, Timestamp started) {
    json run = m;
    run["started_at"] = format_rfc3339(started);
    write_file_atomic(fs::path(out.string() + ".run.json"), run.dump(2) + "\n");
}

Timestamp now_seconds() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

int default_workers(const json& config) {
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (auto it = config.find("budget"); it != config.end() && it->contains("max_calls")) {
        n = static_cast<int>(std::min<std::int64_t>(n, std::max<std::int64_t>(1, it->at("max_calls"))));
    }
    return n;
}

gateway::GatewayOptions gateway_options(const json& config, std::optional<std::int64_t> max_calls,
                                        const std::string& cache_dir, std::uint64_t seed) {
    gateway::GatewayOptions o;
    if (config.contains("budget")) o.caps = config.at("budget").get<gateway::BudgetCaps>();
    if (max_calls) o.caps.max_calls = max_calls;
    if (config.contains("retry")) {
        const auto& r = config.at("retry");
        o.retry.max_attempts = r.value("max_attempts", o.retry.max_attempts);
        o.retry.base_delay = std::chrono::milliseconds(r.value("base_delay_ms", o.retry.base_delay.count()));
    }
    if (!cache_dir.empty()) o.cache_dir = cache_dir;
    o.jitter_seed = seed;
    return o;
}

// Parses "scripted:tpr=0.9,fpr=0.3".
gateway::JudgeRates parse_rates(const std::string& spec) {
    gateway::JudgeRates rates;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(Errc::InvalidInput, fmt::format("bad backend option '{}'", item));
        const auto key = item.substr(0, eq);
        double value;
        try {
            value = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(Errc::InvalidInput, fmt::format("bad number in '{}'", item));
        }
        if (value < 0 || value > 1) throw Error(Errc::InvalidInput, fmt::format("'{}' must lie in [0,1]", key));
        if (key == "tpr") rates.tpr = value;
        else if (key == "fpr") rates.fpr = value;
        else throw Error(Errc::InvalidInput, fmt::format("unknown backend option '{}'", key));
    }
    return rates;
}

// mock:<script.json> | scripted:tpr=..,fpr=.. | config
void configure_backend(gateway::Gateway& gw, const std::string& backend, const json& config, std::uint64_t seed,
                       const std::shared_ptr<gateway::TruthTable>& truth) {
    if (backend.rfind("mock:", 0) == 0) {
        gw.register_fallback(gateway::ScriptedBackend::from_file(backend.substr(5), seed));
    } else if (backend.rfind("scripted:", 0) == 0) {
        if (!truth || truth->size() == 0) {
            throw Error(Errc::InvalidInput, "the scripted backend needs labeled input (ground_truth)");
        }
        gw.register_fallback(std::make_shared<gateway::ScriptedJudge>(parse_rates(backend.substr(9)), seed, truth));
    } else if (backend == "config") {
        if (!config.contains("models")) throw Error(Errc::InvalidInput, "config has no 'models' section");
        for (auto& entry : gateway::parse_model_registry(config.at("models"))) {
            if (entry.endpoint.api_key.empty()) {
                entry.endpoint.api_key = gateway::provider_key_from_env(entry.endpoint.provider);
            }
            gw.register_model(entry.model_id, std::make_shared<gateway::HttpChatBackend>(entry.endpoint));
        }
    } else {
        throw Error(Errc::InvalidInput, fmt::format("unknown backend '{}'", backend));
    }
}

strategy::PromptPack prompt_pack(const std::string& dir) {
    auto pack = strategy::PromptPack::builtin();
    return dir.empty() ? pack : pack.with_overrides(dir);
}

struct PairInput {
    std::vector<std::pair<QuestionRecord, CandidateAnswer>> pairs;
    std::shared_ptr<gateway::TruthTable> truth = std::make_shared<gateway::TruthTable>();
};

PairInput read_pairs(const std::string& path) {
    PairInput in;
    for (const auto& r : read_jsonl(path).records) {
        auto q = r.at("question").get<QuestionRecord>();
        auto a = r.at("answer").get<CandidateAnswer>();
        if (a.question_id.empty()) a.question_id = q.id;
        if (a.answer_id.empty()) throw Error(Errc::InvalidInput, fmt::format("{}: answer without answer_id", path));
        if (r.contains("ground_truth")) in.truth->set(a.answer_id, r.at("ground_truth").get<GroundTruth>());
        in.pairs.emplace_back(std::move(q), std::move(a));
    }
    return in;
}

std::vector<composer::VerdictTrace> read_traces(const std::string& path) {
    return read_records<composer::VerdictTrace>(path, "traces");
}

// Accepts labeled pairs or bare {"answer_id", "ground_truth"} rows.
eval::Labels read_labels(const std::string& path) {
    eval::Labels labels;
    for (const auto& r : read_jsonl(path).records) {
        const auto id = r.contains("answer") ? r.at("answer").at("answer_id").get<std::string>()
                                             : r.at("answer_id").get<std::string>();
        labels[id] = r.at("ground_truth").get<GroundTruth>();
    }
    return labels;
}

std::optional<Errc> errc_from_name(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(Errc::Io); ++i) {
        if (errc_name(static_cast<Errc>(i)) == name) return static_cast<Errc>(i);
    }
    return std::nullopt;
}

// --- harvest --------------------------------------------------------------

struct HarvestArgs {
    std::vector<std::string> sites;
    std::string from, to, out, checkpoint_dir;
    std::string base_url = "https://api.stackexchange.com";
    int page_size = 100;
};

int run_harvest(const Common&, const HarvestArgs& a) {
    const curation::CrawlWindow window{parse_rfc3339(a.from), parse_rfc3339(a.to)};
    if (window.to <= window.from) throw Error(Errc::InvalidInput, "--to must be after --from");
    const bool append = fs::exists(a.out) && fs::file_size(a.out) > 0 && !a.checkpoint_dir.empty();
    std::ofstream out(a.out, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
    if (!out) throw Error(Errc::Io, fmt::format("cannot open '{}'", a.out));
    const auto m = manifest("harvest", json{{"sites", a.sites},
                                            {"window", {format_rfc3339(window.from), format_rfc3339(window.to)}},
                                            {"output", a.out}});
    if (!append) out << make_header("questions", m).dump() << '\n';

    curation::HttplibFetcher fetcher(a.base_url);
    curation::SystemClock clock;
    std::int64_t total = 0;
    for (const auto& site : a.sites) {
        curation::CrawlOptions opts;
        opts.page_size = a.page_size;
        if (!a.checkpoint_dir.empty()) {
            fs::create_directories(a.checkpoint_dir);
            opts.checkpoint = fs::path(a.checkpoint_dir) / (site + ".checkpoint.json");
        }
        curation::Crawler crawler(fetcher, clock, opts);
        const auto stats = crawler.crawl(site, window, [&](const QuestionRecord& q) {
            out << json(q).dump() << '\n';
        });
        out.flush();
        total += stats.emitted;
        spdlog::info("{}: {} questions in {} pages, quota left {}", site, stats.emitted, stats.pages,
                     stats.quota_remaining ? std::to_string(*stats.quota_remaining) : "?");
    }
    spdlog::info("harvested {} questions into {}", total, a.out);
    return 0;
}

// --- filter ---------------------------------------------------------------

struct FilterArgs {
    std::string in, out, rejected, now, funnel;
    bool llm = false;
    std::string backend, answer_model, judge_model, prompts, llm_out;
    std::uint64_t seed = 0;
};

int run_filter(const Common& c, const FilterArgs& a) {
    const auto config = load_config(c.config_path);
    curation::CurationConfig cur;
    if (config.contains("curation")) cur = config.at("curation").get<curation::CurationConfig>();
    else cur.diamond = curation::default_diamond_rules();
    const Timestamp now = a.now.empty() ? now_seconds() : parse_rfc3339(a.now);

    const auto questions = read_records<QuestionRecord>(a.in, "questions");
    auto result = curation::rule_filter(questions, cur, now);
    std::vector<std::pair<std::string, std::int64_t>> stages{
        {"Raw question pool", static_cast<std::int64_t>(questions.size())},
        {"Rule-based filtering", static_cast<std::int64_t>(result.kept.size())}};

    std::vector<QuestionRecord> kept = std::move(result.kept);
    for (auto& q : kept) q.diamond = curation::diamond_tag(q, cur.diamond);

    json m = manifest("filter", json{{"input", a.in},
                                     {"output", a.out},
                                     {"config", c.config_path},
                                     {"now", format_rfc3339(now)},
                                     {"curation", cur}});
    if (a.llm) {
        if (a.backend.empty() || a.answer_model.empty() || a.judge_model.empty()) {
            throw Error(Errc::InvalidInput, "--llm needs --backend, --answer-model and --judge-model");
        }
        gateway::Gateway gw(gateway_options(config, {}, {}, a.seed));
        configure_backend(gw, a.backend, config, a.seed, nullptr);
        const auto prompts = prompt_pack(a.prompts);
        std::vector<QuestionRecord> survivors;
        std::vector<json> judgments;
        for (const auto& q : kept) {
            const auto r = curation::llm_filter(gw, prompts, q, a.answer_model, a.judge_model);
            judgments.push_back(r);
            if (r.keep) survivors.push_back(q);
        }
        kept = std::move(survivors);
        stages.emplace_back("LLM-based filtering", static_cast<std::int64_t>(kept.size()));
        m["backend"] = a.backend;
        m["answer_model"] = a.answer_model;
        m["judge_model"] = a.judge_model;
        m["seed"] = a.seed;
        if (!a.llm_out.empty()) write_jsonl(a.llm_out, "llm_judgments", judgments, m);
    }

    std::vector<json> rows(kept.begin(), kept.end());
    write_jsonl(a.out, "questions", rows, m);
    if (!a.rejected.empty()) {
        std::vector<json> rej;
        for (const auto& r : result.rejected) rej.push_back(json{{"id", r.id}, {"rule", to_string(r.rule)}});
        write_jsonl(a.rejected, "rejections", rej, m);
    }
    const auto funnel = curation::funnel_stats(stages);
    const auto text = curation::render_funnel(funnel);
    if (!a.funnel.empty()) write_file_atomic(a.funnel, text);
    std::cout << text;
    for (const auto& [rule, n] : result.tally) spdlog::info("rejected by {}: {}", to_string(rule), n);
    return 0;
}

// --- validate -------------------------------------------------------------

struct ValidateArgs {
    std::string strategy, judge, in, out, backend, prompts, cache_dir, validator_id;
    std::uint64_t seed = 0;
    int workers = 0;
    std::optional<std::int64_t> max_calls;
    bool no_short_circuit = false, full_traces = false, drop_transcripts = false;
};

int run_validate(const Common& c, const ValidateArgs& a) {
    const auto config = load_config(c.config_path);
    composer::SpecPtr spec;
    if (!a.strategy.empty()) spec = composer::parse_spec(a.strategy);
    else if (!a.judge.empty()) spec = composer::default_pipeline(a.judge);
    else throw Error(Errc::InvalidInput, "give --strategy or --judge");
    const auto canonical = composer::format_spec(*spec);

    const auto input = read_pairs(a.in);
    gateway::Gateway gw(gateway_options(config, a.max_calls, a.cache_dir, a.seed));
    configure_backend(gw, a.backend, config, a.seed, input.truth);
    strategy::CheckRunner runner(gw, prompt_pack(a.prompts));

    composer::ValidatorOptions vopts;
    vopts.short_circuit = !a.no_short_circuit;
    vopts.full_traces = a.full_traces;
    vopts.keep_transcripts = !a.drop_transcripts;
    composer::Validator validator(runner, spec, vopts, a.validator_id);

    const auto started = now_seconds();
    const int workers = a.workers > 0 ? a.workers : default_workers(config);
    const auto traces = composer::run_batch(validator, input.pairs, workers);

    json budget = json::object();
    if (config.contains("budget")) budget = config.at("budget");
    if (a.max_calls) budget["max_calls"] = *a.max_calls;
    const auto m = manifest("validate", json{{"input", a.in},
                                             {"output", a.out},
                                             {"strategy", canonical},
                                             {"validator_id", validator.id()},
                                             {"backend", a.backend},
                                             {"seed", a.seed},
                                             {"config", c.config_path},
                                             {"budget", budget},
                                             {"short_circuit", vopts.short_circuit},
                                             {"full_traces", vopts.full_traces}});
    std::vector<json> rows(traces.begin(), traces.end());
    write_jsonl(a.out, "traces", rows, m);
    write_run_sidecar(a.out, m, started);

    std::int64_t passed = 0, errors = 0;
    bool backend_failure = false;
    for (const auto& t : traces) {
        passed += t.final == Verdict::Pass;
        if (t.error) {
            ++errors;
            const auto code = errc_from_name(t.error_code.value_or(""));
            backend_failure = backend_failure || (code && is_backend_failure(*code));
            spdlog::warn("{}: {}", t.answer_id, *t.error);
        }
    }
    const auto ledger = gw.ledger();
    spdlog::info("{} answers, {} passed, {} errors; {} backend calls, {} cache hits", traces.size(), passed,
                 errors, ledger.calls(), gw.cache_hits());
    return backend_failure ? 2 : (errors > 0 ? 1 : 0);
}

// --- evaluate -------------------------------------------------------------

struct EvaluateArgs {
    std::vector<std::string> traces;
    std::string labels, out_dir = ".";
    bool include_self = false;
};

int run_evaluate(const Common&, const EvaluateArgs& a) {
    std::vector<composer::VerdictTrace> traces;
    for (const auto& p : a.traces) {
        auto t = read_traces(p);
        traces.insert(traces.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
    }
    const auto labels = read_labels(a.labels);
    const auto report = eval::build_report(eval::join_labels(traces, labels), a.include_self);
    fs::create_directories(a.out_dir);
    eval::write_report(a.out_dir, report,
                       manifest("evaluate", json{{"traces", a.traces},
                                                 {"labels", a.labels},
                                                 {"include_self", a.include_self}}));
    std::cout << eval::render_report(report);
    return 0;
}

// --- report ---------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> traces;
    std::string reviews, questions, out;
};

int run_report(const Common& c, const ReportArgs& a) {
    const auto config = load_config(c.config_path);
    ConsensusRule rule;
    if (config.contains("consensus")) rule = config.at("consensus").get<ConsensusRule>();
    std::vector<composer::VerdictTrace> traces;
    for (const auto& p : a.traces) {
        auto t = read_traces(p);
        traces.insert(traces.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
    }
    std::set<std::string> diamond;
    if (!a.questions.empty()) {
        for (const auto& q : read_records<QuestionRecord>(a.questions, "questions")) {
            if (q.diamond) diamond.insert(q.id);
        }
    }
    std::string text = eval::render_pass_rates(eval::pass_rate_report(traces, a.questions.empty() ? nullptr : &diamond));
    if (!a.reviews.empty()) {
        const auto reviews = read_records<ReviewRecord>(a.reviews, "reviews");
        text += "\n" + eval::render_verification(eval::human_verification_report(traces, reviews, rule));
        const auto agreement = eval::human_agreement(traces, reviews, rule);
        text += fmt::format("\nvalidator/human agreement: n={} kappa={}\n", agreement.n,
                            agreement.kappa ? fmt::format("{:.3f}", *agreement.kappa) : "-");
    }
    if (!a.out.empty()) write_file_atomic(a.out, text);
    std::cout << text;
    return 0;
}

// --- serve ----------------------------------------------------------------

struct ServeArgs {
    std::string data, host = "127.0.0.1", import;
    int port = 8080, threads = 4;
};

int run_serve(const Common& c, const ServeArgs& a) {
    const auto config = load_config(c.config_path);
    service::StoreOptions sopts;
    if (config.contains("consensus")) sopts.consensus = config.at("consensus").get<ConsensusRule>();
    service::ReviewStore store(a.data.empty() ? std::nullopt : std::optional<fs::path>(a.data), sopts);
    if (!a.import.empty()) {
        for (const auto& q : read_records<QuestionRecord>(a.import, "questions")) store.put_question(q);
    }
    const char* token = std::getenv("UQ_REVIEW_TOKEN");
    if (!token || !*token) spdlog::warn("UQ_REVIEW_TOKEN is unset; write endpoints will refuse every request");

    // Block the stop signals before the pool starts so only the waiter sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    service::ReviewServer server(store, service::ServerOptions{token ? token : "", a.threads});
    const int port = server.bind(a.host, a.port);
    if (port < 0) throw Error(Errc::Io, fmt::format("cannot bind {}:{}", a.host, a.port));
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    std::cout << fmt::format("listening on http://{}:{}/v1", a.host, port) << std::endl;
    const bool ok = server.listen();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return ok ? 0 : 1;
}

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
    double tpr = 0.9, fpr = 0.3, base_rate = 0.2;
    std::size_t pairs = 100'000;
    std::uint64_t seed = 0;
    std::string judge = "judge", out;
    std::vector<std::string> strategies;
    int workers = 1;
};

int run_simulate(const Common&, const SimulateArgs& a) {
    if (a.tpr < 0 || a.tpr > 1 || a.fpr < 0 || a.fpr > 1 || a.base_rate < 0 || a.base_rate > 1) {
        throw Error(Errc::InvalidInput, "rates must lie in [0,1]");
    }
    eval::SimulationConfig cfg;
    cfg.rates = {a.tpr, a.fpr};
    cfg.base_rate = a.base_rate;
    cfg.pairs = a.pairs;
    cfg.seed = a.seed;
    cfg.judge_model = a.judge;
    cfg.strategies = a.strategies;
    cfg.workers = std::max(1, a.workers);
    const auto points = eval::simulate(cfg);

    TextTable table({"strategy", "precision", "recall", "accuracy", "pass rate", "calls/pair"});
    std::vector<json> rows;
    for (const auto& p : points) {
        const auto& s = p.score;
        table.add_row({s.validator_id, eval::percent_cell(s.metrics.precision), eval::percent_cell(s.metrics.recall),
                       eval::percent_cell(s.metrics.accuracy), eval::percent_cell(p.pass_rate),
                       fmt::format("{:.3f}", s.mean_calls())});
        json row = s;
        row["pass_rate"] = p.pass_rate;
        rows.push_back(std::move(row));
    }
    if (!a.out.empty()) {
        write_jsonl(a.out, "simulation", rows,
                    manifest("simulate", json{{"tpr", a.tpr},
                                              {"fpr", a.fpr},
                                              {"base_rate", a.base_rate},
                                              {"pairs", a.pairs},
                                              {"seed", a.seed},
                                              {"strategies", a.strategies.empty() ? eval::default_simulation_strategies(a.judge)
                                                                        : a.strategies},
                                              {"judge", a.judge}}));
    }
    std::cout << table.render();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("uq");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");

    CLI::App app{"Validate candidate answers to unsolved questions, score validators, curate questions."};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_path, "JSON config (models, budget, curation, consensus)");
    app.add_flag("-v,--verbose", common.verbose, "Debug logging");

    HarvestArgs harvest;
    auto* h = app.add_subcommand("harvest", "Crawl unanswered questions from the Stack Exchange API");
    h->add_option("--site", harvest.sites, "Site api_site_parameter, repeatable")->required();
    h->add_option("--from", harvest.from, "Window start (RFC 3339 or date)")->required();
    h->add_option("--to", harvest.to, "Window end (RFC 3339 or date)")->required();
    h->add_option("--out", harvest.out, "Output questions JSONL")->required();
    h->add_option("--checkpoint-dir", harvest.checkpoint_dir, "Resume state, one file per site");
    h->add_option("--base-url", harvest.base_url, "API root")->capture_default_str();
    h->add_option("--page-size", harvest.page_size, "Items per page")->check(CLI::Range(1, 100))->capture_default_str();

    FilterArgs filter;
    auto* f = app.add_subcommand("filter", "Apply the rule-based and optional LLM-based filters");
    f->add_option("--in", filter.in, "Input questions JSONL")->required();
    f->add_option("--out", filter.out, "Kept questions JSONL")->required();
    f->add_option("--rejected", filter.rejected, "Rejections JSONL (id, first failed rule)");
    f->add_option("--now", filter.now, "Reference time for the age rule (default: current time)");
    f->add_option("--funnel", filter.funnel, "Write the funnel table here as well");
    f->add_flag("--llm", filter.llm, "Run the LLM-based filter on rule survivors");
    f->add_option("--backend", filter.backend, "mock:<script.json> or config");
    f->add_option("--answer-model", filter.answer_model, "Model drafting the candidate answer");
    f->add_option("--judge-model", filter.judge_model, "Model rating the question");
    f->add_option("--llm-out", filter.llm_out, "Per-question LLM judgments JSONL");
    f->add_option("--prompts", filter.prompts, "Directory of prompt overrides");
    f->add_option("--seed", filter.seed, "Seed for mock backends");

    ValidateArgs validate;
    auto* v = app.add_subcommand("validate", "Run a validation strategy over question/answer pairs");
    v->add_option("--strategy", validate.strategy, "Strategy text, e.g. 'pipeline(...)'");
    v->add_option("--judge", validate.judge, "Judge model for the default 3-stage pipeline");
    v->add_option("--in", validate.in, "Input JSONL of {question, answer[, ground_truth]}")->required();
    v->add_option("--out", validate.out, "Output traces JSONL")->required();
    v->add_option("--backend", validate.backend, "mock:<script.json> | scripted:tpr=..,fpr=.. | config")->required();
    v->add_option("--seed", validate.seed, "Seed for mock backends and retry jitter");
    v->add_option("--workers", validate.workers, "Parallel answers (default: processors, capped by budget)");
    v->add_option("--max-calls", validate.max_calls, "Backend call budget");
    v->add_option("--prompts", validate.prompts, "Directory of prompt overrides");
    v->add_option("--cache-dir", validate.cache_dir, "Persistent response cache");
    v->add_option("--validator-id", validate.validator_id, "Name recorded in traces (default: strategy text)");
    v->add_flag("--no-short-circuit", validate.no_short_circuit, "Evaluate every ballot");
    v->add_flag("--full-traces", validate.full_traces, "Keep majority votes running to the end");
    v->add_flag("--drop-transcripts", validate.drop_transcripts, "Omit judge transcripts from traces");

    EvaluateArgs evaluate;
    auto* e = app.add_subcommand("evaluate", "Score validators against labeled answers");
    e->add_option("--traces", evaluate.traces, "Traces JSONL, repeatable")->required();
    e->add_option("--labels", evaluate.labels, "Labeled pairs or {answer_id, ground_truth} JSONL")->required();
    e->add_option("--out-dir", evaluate.out_dir, "Directory for report.* files")->capture_default_str();
    e->add_flag("--include-self", evaluate.include_self, "Count self-judgments in the generator-validator gap");

    ReportArgs report;
    auto* r = app.add_subcommand("report", "Pass rates on unlabeled questions and human verification");
    r->add_option("--traces", report.traces, "Traces JSONL, repeatable")->required();
    r->add_option("--reviews", report.reviews, "Reviews JSONL");
    r->add_option("--questions", report.questions, "Questions JSONL with diamond tags");
    r->add_option("--out", report.out, "Also write the tables here");

    ServeArgs serve;
    auto* s = app.add_subcommand("serve", "Run the review service (bearer token from UQ_REVIEW_TOKEN)");
    s->add_option("--data", serve.data, "Store directory (in-memory when omitted)");
    s->add_option("--host", serve.host, "Bind address")->capture_default_str();
    s->add_option("--port", serve.port, "Port, 0 for any")->capture_default_str();
    s->add_option("--threads", serve.threads, "Worker threads")->capture_default_str();
    s->add_option("--import", serve.import, "Questions JSONL to load at start");

    SimulateArgs simulate;
    auto* m = app.add_subcommand("simulate", "Monte Carlo study with a scripted judge of fixed rates");
    m->add_option("--tpr", simulate.tpr, "P(pass | correct) per call")->capture_default_str();
    m->add_option("--fpr", simulate.fpr, "P(pass | incorrect) per call")->capture_default_str();
    m->add_option("--base-rate", simulate.base_rate, "Fraction of correct answers")->capture_default_str();
    m->add_option("--pairs", simulate.pairs, "Synthetic pairs")->capture_default_str();
    m->add_option("--seed", simulate.seed, "Seed")->capture_default_str();
    m->add_option("--judge", simulate.judge, "Judge model id")->capture_default_str();
    m->add_option("--strategy", simulate.strategies, "Strategy text, repeatable (default: unanimous of 1, 3, 5)");
    m->add_option("--workers", simulate.workers, "Threads")->capture_default_str();
    m->add_option("--out", simulate.out, "Results JSONL");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex, std::cerr, std::cerr);
        std::cerr << app.help();
        return 1;
    }
    spdlog::set_level(common.verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (*h) return run_harvest(common, harvest);
        if (*f) return run_filter(common, filter);
        if (*v) return run_validate(common, validate);
        if (*e) return run_evaluate(common, evaluate);
        if (*r) return run_report(common, report);
        if (*s) return run_serve(common, serve);
        if (*m) return run_simulate(common, simulate);
    } catch (const Error& ex) {
        spdlog::error("{}: {}", errc_name(ex.code()), ex.what());
        return is_backend_failure(ex.code()) ? 2 : 1;
    } catch (const json::exception& ex) {
        spdlog::error("malformed JSON: {}", ex.what());
        return 1;
    } catch (const std::exception& ex) {
        spdlog::error("{}", ex.what());
        return 1;
    }
    return 1;
}
