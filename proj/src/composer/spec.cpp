#include "uq/composer/spec.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "uq/core/error.hpp"

namespace uq::composer {

namespace {

bool same(const SpecPtr& a, const SpecPtr& b) {
    if (!a || !b) return a == b;
    return *a == *b;
}

bool same(const std::vector<SpecPtr>& a, const std::vector<SpecPtr>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!same(a[i], b[i])) return false;
    }
    return true;
}

struct Equal {
    bool operator()(const Leaf& a, const Leaf& b) const {
        return a.check == b.check && a.judge_model == b.judge_model &&
               a.reflect_depth == b.reflect_depth;
    }
    bool operator()(const Repeat& a, const Repeat& b) const { return a.k == b.k && same(a.child, b.child); }
    bool operator()(const Vote& a, const Vote& b) const {
        return a.rule == b.rule && same(a.children, b.children);
    }
    bool operator()(const Pipeline& a, const Pipeline& b) const { return same(a.stages, b.stages); }
    bool operator()(const Ensemble& a, const Ensemble& b) const {
        return a.rule == b.rule && a.models == b.models && same(a.child, b.child);
    }
    template <typename A, typename B>
    bool operator()(const A&, const B&) const {
        return false;
    }
};

SpecPtr make(decltype(StrategySpec::node) node) {
    return std::make_shared<const StrategySpec>(StrategySpec{std::move(node)});
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    SpecPtr parse() {
        auto spec = node();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return spec;
    }

private:
    [[noreturn]] void fail(std::string_view what) const {
        throw Error(Errc::InvalidInput,
                    fmt::format("strategy '{}': {} at offset {}", text_, what, pos_));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void expect(char c) {
        if (!peek(c)) fail(fmt::format("expected '{}'", c));
        ++pos_;
    }

    std::string word() {
        skip_ws();
        const auto start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        if (start == pos_) fail("expected a name");
        return std::string(text_.substr(start, pos_ - start));
    }

    // Model ids may contain anything except separators and brackets.
    std::string model_id() {
        skip_ws();
        const auto start = pos_;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ',' || c == ']' || c == '[' || c == '(' || c == ')' ||
                std::isspace(static_cast<unsigned char>(c))) {
                break;
            }
            ++pos_;
        }
        if (start == pos_) fail("expected a model id");
        return std::string(text_.substr(start, pos_ - start));
    }

    int integer() {
        skip_ws();
        int value = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
        if (ec != std::errc()) fail("expected an integer");
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return value;
    }

    std::vector<SpecPtr> children() {
        std::vector<SpecPtr> out;
        out.push_back(node());
        while (peek(',')) {
            ++pos_;
            out.push_back(node());
        }
        return out;
    }

    VoteRule rule_name() {
        const auto w = word();
        if (w == "unanimous") return VoteRule::Unanimous;
        if (w == "majority") return VoteRule::Majority;
        fail(fmt::format("unknown vote rule '{}'", w));
    }

    SpecPtr node() {
        const auto name = word();
        if (peek('[')) {
            ++pos_;
            CheckKind check;
            try {
                check = strategy::parse_check(name);
            } catch (const Error&) {
                fail(fmt::format("unknown check '{}'", name));
            }
            auto model = model_id();
            expect(']');
            return leaf(check, std::move(model));
        }
        expect('(');
        SpecPtr out;
        if (name == "reflect") {
            const int turns = integer();
            expect(',');
            auto inner = node();
            const auto* l = std::get_if<Leaf>(&inner->node);
            if (!l || l->reflect_depth != 0) fail("reflect() takes a single check");
            if (turns < 1) fail("reflect() needs at least one turn");
            out = leaf(l->check, l->judge_model, turns - 1);
        } else if (name == "repeat") {
            const int k = integer();
            expect(',');
            out = repeat(k, node());
        } else if (name == "unanimous" || name == "majority") {
            out = vote(name == "unanimous" ? VoteRule::Unanimous : VoteRule::Majority, children());
        } else if (name == "pipeline") {
            out = pipeline(children());
        } else if (name == "ensemble") {
            const auto rule = rule_name();
            expect(',');
            expect('[');
            std::vector<std::string> models{model_id()};
            while (peek(',')) {
                ++pos_;
                models.push_back(model_id());
            }
            expect(']');
            expect(',');
            out = ensemble(rule, std::move(models), node());
        } else {
            fail(fmt::format("unknown node '{}'", name));
        }
        expect(')');
        return out;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

void format_into(const StrategySpec& s, std::string& out);

void format_list(const std::vector<SpecPtr>& items, std::string& out) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        format_into(*items[i], out);
    }
}

void format_into(const StrategySpec& s, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Leaf>) {
                const auto base = fmt::format("{}[{}]", strategy::slug(n.check), n.judge_model);
                out += n.reflect_depth == 0 ? base
                                            : fmt::format("reflect({}, {})", n.reflect_depth + 1, base);
            } else if constexpr (std::is_same_v<T, Repeat>) {
                out += fmt::format("repeat({}, ", n.k);
                format_into(*n.child, out);
                out += ")";
            } else if constexpr (std::is_same_v<T, Vote>) {
                out += to_string(n.rule);
                out += "(";
                format_list(n.children, out);
                out += ")";
            } else if constexpr (std::is_same_v<T, Pipeline>) {
                out += "pipeline(";
                format_list(n.stages, out);
                out += ")";
            } else {
                out += fmt::format("ensemble({}, [{}], ", to_string(n.rule), fmt::join(n.models, ", "));
                format_into(*n.child, out);
                out += ")";
            }
        },
        s.node);
}

}  // namespace

std::string_view to_string(VoteRule r) noexcept {
    return r == VoteRule::Majority ? "majority" : "unanimous";
}

bool operator==(const StrategySpec& a, const StrategySpec& b) { return std::visit(Equal{}, a.node, b.node); }

SpecPtr leaf(CheckKind check, std::string judge_model, int reflect_depth) {
    return make(Leaf{check, std::move(judge_model), reflect_depth});
}

SpecPtr repeat(int k, SpecPtr child) { return make(Repeat{k, std::move(child)}); }

SpecPtr vote(VoteRule rule, std::vector<SpecPtr> children) { return make(Vote{rule, std::move(children)}); }

SpecPtr pipeline(std::vector<SpecPtr> stages) { return make(Pipeline{std::move(stages)}); }

SpecPtr ensemble(VoteRule rule, std::vector<std::string> models, SpecPtr child) {
    return make(Ensemble{rule, std::move(models), std::move(child)});
}

void validate_spec(const StrategySpec& spec) {
    std::visit(
        [](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            auto sub = [](const SpecPtr& p) {
                if (!p) throw Error(Errc::InvalidInput, "strategy node has a null child");
                validate_spec(*p);
            };
            if constexpr (std::is_same_v<T, Leaf>) {
                if (n.judge_model.empty()) throw Error(Errc::InvalidInput, "check without a judge model");
                if (n.reflect_depth < 0) throw Error(Errc::InvalidInput, "reflect depth must be ≥ 0");
            } else if constexpr (std::is_same_v<T, Repeat>) {
                if (n.k < 1) throw Error(Errc::InvalidInput, "repeat needs k ≥ 1");
                sub(n.child);
            } else if constexpr (std::is_same_v<T, Vote>) {
                if (n.children.empty()) throw Error(Errc::EmptyVote, "vote without children");
                for (const auto& c : n.children) sub(c);
            } else if constexpr (std::is_same_v<T, Pipeline>) {
                if (n.stages.empty()) throw Error(Errc::InvalidInput, "pipeline without stages");
                for (const auto& c : n.stages) sub(c);
            } else {
                if (n.models.empty()) throw Error(Errc::InvalidInput, "ensemble without models");
                sub(n.child);
            }
        },
        spec.node);
}

SpecPtr parse_spec(std::string_view text) {
    auto spec = Parser(text).parse();
    validate_spec(*spec);
    return spec;
}

std::string format_spec(const StrategySpec& spec) {
    std::string out;
    format_into(spec, out);
    return out;
}

SpecPtr default_pipeline(const std::string& judge_model, bool use_repeat) {
    std::vector<SpecPtr> stages;
    for (auto check : {CheckKind::CycleConsistency, CheckKind::FactLogic, CheckKind::Correctness}) {
        auto inner = use_repeat ? repeat(3, leaf(check, judge_model)) : leaf(check, judge_model, 2);
        stages.push_back(vote(VoteRule::Unanimous, {std::move(inner)}));
    }
    return pipeline(std::move(stages));
}

SpecPtr with_judge(const SpecPtr& spec, const std::string& judge_model) {
    return std::visit(
        [&](const auto& n) -> SpecPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Leaf>) {
                return leaf(n.check, judge_model, n.reflect_depth);
            } else if constexpr (std::is_same_v<T, Repeat>) {
                return repeat(n.k, with_judge(n.child, judge_model));
            } else if constexpr (std::is_same_v<T, Vote>) {
                std::vector<SpecPtr> kids;
                for (const auto& c : n.children) kids.push_back(with_judge(c, judge_model));
                return vote(n.rule, std::move(kids));
            } else if constexpr (std::is_same_v<T, Pipeline>) {
                std::vector<SpecPtr> kids;
                for (const auto& c : n.stages) kids.push_back(with_judge(c, judge_model));
                return pipeline(std::move(kids));
            } else {
                // A nested ensemble fixes its own models.
                return spec;
            }
        },
        spec->node);
}

}  // namespace uq::composer
