#include "uq/eval/dataset.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "uq/core/error.hpp"
#include "uq/core/json.hpp"
#include "uq/core/jsonl.hpp"
#include "uq/core/random.hpp"
#include "uq/core/validate.hpp"

namespace uq::eval {

std::vector<LabeledPair> load_labeled(const std::filesystem::path& path, bool drop_mc) {
    auto doc = read_jsonl(path, "labeled");
    std::vector<LabeledPair> out;
    out.reserve(doc.records.size());
    std::size_t line = 0;
    for (const auto& r : doc.records) {
        ++line;
        LabeledPair p;
        try {
            p = r.get<LabeledPair>();
        } catch (const json::exception& e) {
            throw Error(Errc::InvalidInput, fmt::format("{} record {}: {}", path.string(), line, e.what()));
        }
        if (auto problems = validate_record(p); !problems.empty()) {
            throw Error(Errc::InvalidInput,
                        fmt::format("{} record {}: {}", path.string(), line, problems.front()));
        }
        out.push_back(std::move(p));
    }
    return drop_mc ? drop_multiple_choice(std::move(out)) : out;
}

std::vector<LabeledPair> drop_multiple_choice(std::vector<LabeledPair> pairs) {
    pairs.erase(std::remove_if(pairs.begin(), pairs.end(),
                               [](const LabeledPair& p) { return is_multiple_choice(p.question); }),
                pairs.end());
    return pairs;
}

std::vector<LabeledPair> subsample(const std::vector<LabeledPair>& pairs, std::size_t n, std::uint64_t seed) {
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    keyed.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& a = pairs[i].answer;
        keyed.emplace_back(stable_hash(a.question_id + "\n" + a.answer_id, seed), i);
    }
    std::sort(keyed.begin(), keyed.end());
    keyed.resize(std::min(n, keyed.size()));
    std::vector<LabeledPair> out;
    out.reserve(keyed.size());
    for (const auto& [h, i] : keyed) out.push_back(pairs[i]);
    return out;
}

std::vector<LabeledPair> synthetic_pairs(std::size_t n, double base_rate, const std::string& answer_model) {
    if (!(base_rate >= 0.0 && base_rate <= 1.0)) {
        throw Error(Errc::InvalidInput, "base rate must lie in [0,1]");
    }
    const auto correct = static_cast<std::size_t>(std::llround(base_rate * static_cast<double>(n)));
    std::vector<LabeledPair> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& p = out[i];
        p.question.id = fmt::format("sim:{}", i);
        p.question.site = "synthetic";
        p.question.title = fmt::format("Synthetic question {}", i);
        p.question.body = "Synthetic question body.";
        p.question.provenance = Provenance::Synthetic;
        p.answer.question_id = p.question.id;
        p.answer.answer_id = fmt::format("sim-{}", i);
        p.answer.model_id = answer_model;
        p.answer.text = "Synthetic answer.";
        p.ground_truth = i < correct ? GroundTruth::Correct : GroundTruth::Incorrect;
    }
    return out;
}

}  // namespace uq::eval
