#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uq/core/types.hpp"
#include "uq/strategy/check.hpp"

namespace uq::composer {

using strategy::CheckKind;

enum class VoteRule { Majority, Unanimous };

std::string_view to_string(VoteRule r) noexcept;

struct StrategySpec;
using SpecPtr = std::shared_ptr<const StrategySpec>;

struct Leaf {
    CheckKind check = CheckKind::Correctness;
    std::string judge_model;
    int reflect_depth = 0;  // reflection turns after the initial judgment
};

struct Repeat {
    int k = 1;
    SpecPtr child;
};

struct Vote {
    VoteRule rule = VoteRule::Unanimous;
    std::vector<SpecPtr> children;
};

struct Pipeline {
    std::vector<SpecPtr> stages;
};

// Runs `child` once per model with every leaf's judge replaced by that model.
struct Ensemble {
    VoteRule rule = VoteRule::Unanimous;
    std::vector<std::string> models;
    SpecPtr child;
};

struct StrategySpec {
    std::variant<Leaf, Repeat, Vote, Pipeline, Ensemble> node;
};

bool operator==(const StrategySpec& a, const StrategySpec& b);

SpecPtr leaf(CheckKind check, std::string judge_model, int reflect_depth = 0);
SpecPtr repeat(int k, SpecPtr child);
SpecPtr vote(VoteRule rule, std::vector<SpecPtr> children);
SpecPtr pipeline(std::vector<SpecPtr> stages);
SpecPtr ensemble(VoteRule rule, std::vector<std::string> models, SpecPtr child);

// Throws Error(InvalidInput) on empty votes/pipelines, k < 1, negative depth
// or an empty model list.
void validate_spec(const StrategySpec& spec);

// Text form:
//   c[o3]                      correctness judged by o3
//   reflect(3, flc[o3])        three judging turns (two reflections)
//   repeat(5, c[o3])           five independent samples
//   unanimous(a, b, ...)       majority(a, b, ...)
//   pipeline(a, b, ...)
//   ensemble(unanimous, [o3, gemini-2.5-pro], <template>)
// `format_spec` produces the canonical form; parse(format(s)) == s.
SpecPtr parse_spec(std::string_view text);
std::string format_spec(const StrategySpec& spec);

// The default three-stage pipeline: cycle consistency, then fact/logic, then
// correctness, each stage unanimous over three turns of reflection or, with
// `use_repeat`, three independent samples.
SpecPtr default_pipeline(const std::string& judge_model, bool use_repeat = false);

SpecPtr with_judge(const SpecPtr& spec, const std::string& judge_model);

}  // namespace uq::composer
