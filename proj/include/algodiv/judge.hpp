#pragma once

#include <cstddef>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "algodiv/core.hpp"
#include "algodiv/hash.hpp"
#include "algodiv/jsonl.hpp"

namespace algodiv {

// The instruction given to the judge model. Slots {question}, {past_solution}
// and {solution} are filled by build_prompt. Bump kTemplateVersion on any
// byte-level change: the version participates in cache keys, so stale cached
// verdicts can never be served for a different prompt.
inline constexpr std::string_view kJudgeTemplate =
        "Your task is to classify whether a given solution solves a problem with similar logic "
        "to existing solutions or whether it leverages a novel approach.\n"
        "\n"
        "You will be given a problem and a previous solution that has been used to solve that "
        "problem. If the given solution leverages similar logic to the previous solution, "
        "conclude your response with the sentence \"Decision: similar to the previous "
        "solution.\" Otherwise, conclude your response with the sentence \"Decision: a novel "
        "approach.\" Include your reasoning for performing this task in your response.\n"
        "\n"
        "Below, the problem is provided wrapped in the <|PROBLEM|> tag, the previous solution "
        "is provided wrapped in the <|PREVIOUS SOLUTION|> tag, and the solution to be "
        "classified is provided within the <|SOLUTION|> tag.\n"
        "\n"
        "<|PROBLEM|>\n"
        "{question}\n"
        "<|/PROBLEM|>\n"
        "\n"
        "<|PREVIOUS SOLUTION|>\n"
        "{past_solution}\n"
        "<|/PREVIOUS SOLUTION|>\n"
        "\n"
        "<|SOLUTION|>\n"
        "{solution}\n"
        "<|/SOLUTION|>";

inline constexpr std::string_view kTemplateVersion = "algosim-v1";

// Decision phrases the judge is instructed to end with.
inline constexpr std::string_view kSamePhrase = "similar to the previous solution";
inline constexpr std::string_view kDifferentPhrase = "a novel approach";

enum class Decision { Same, Different };
enum class RawDecision { Same, Different, Unparseable };

inline std::string to_string(Decision d) { return d == Decision::Same ? "same" : "different"; }

inline Decision decision_from_string(const std::string& s) {
    if (s == "same") return Decision::Same;
    if (s == "different") return Decision::Different;
    throw std::invalid_argument("bad decision '" + s + "'");
}

// How a verdict's decision was obtained: parsed on the first attempt, parsed
// after `retries` re-asks, or forced to Different after exhausting retries.
struct ParseStatus {
    enum Kind { Clean, RecoveredAfterRetry, ForcedDefault };
    Kind kind = Clean;
    int retries = 0;  // > 0 only for RecoveredAfterRetry

    static ParseStatus clean() { return {Clean, 0}; }
    static ParseStatus recovered(int n) { return {RecoveredAfterRetry, n}; }
    static ParseStatus forced() { return {ForcedDefault, 0}; }
    bool operator==(const ParseStatus&) const = default;
};

inline std::string to_string(const ParseStatus& ps) {
    switch (ps.kind) {
        case ParseStatus::RecoveredAfterRetry:
            return "recovered_after_retry:" + std::to_string(ps.retries);
        case ParseStatus::ForcedDefault: return "forced_default";
        default: return "clean";
    }
}

inline ParseStatus parse_status_from_string(const std::string& s) {
    if (s == "clean") return ParseStatus::clean();
    if (s == "forced_default") return ParseStatus::forced();
    static const std::string prefix = "recovered_after_retry:";
    if (s.rfind(prefix, 0) == 0) return ParseStatus::recovered(std::stoi(s.substr(prefix.size())));
    throw std::invalid_argument("bad parse_status '" + s + "'");
}

struct JudgePrompt {
    std::string template_version;
    std::string rendered_text;
};

struct JudgeVerdict {
    std::string leader_id;
    std::string candidate_id;
    Decision decision = Decision::Different;
    std::string raw_completion;
    std::string rationale;  // completion minus the decision line
    std::string judge_id;   // model name or "oracle:<name>"
    std::string template_version;
    ParseStatus parse_status;
};

inline void to_json(json& j, const JudgeVerdict& v) {
    j = json{{"leader_id", v.leader_id},
             {"candidate_id", v.candidate_id},
             {"decision", to_string(v.decision)},
             {"raw_completion", v.raw_completion},
             {"rationale", v.rationale},
             {"judge_id", v.judge_id},
             {"template_version", v.template_version},
             {"parse_status", to_string(v.parse_status)}};
}

inline void from_json(const json& j, JudgeVerdict& v) {
    j.at("leader_id").get_to(v.leader_id);
    j.at("candidate_id").get_to(v.candidate_id);
    v.decision = decision_from_string(j.at("decision").get<std::string>());
    j.at("raw_completion").get_to(v.raw_completion);
    j.at("rationale").get_to(v.rationale);
    j.at("judge_id").get_to(v.judge_id);
    j.at("template_version").get_to(v.template_version);
    v.parse_status = parse_status_from_string(j.at("parse_status").get<std::string>());
}

struct JudgeConfig {
    std::string endpoint_url;
    std::string model_name = "meta-llama/Llama-3.1-8B-Instruct";
    int max_retries = 2;
    int request_timeout_ms = 60000;
    int concurrency_limit = 4;
    // Greedy decoding: the most reproducible choice for a binary classifier.
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 1024;
};

// Operational failure while judging one specific pair. Callers decide whether
// to skip-and-log or abort (see JudgeErrorPolicy in the cluster module).
class JudgeError : public std::runtime_error {
public:
    JudgeError(std::string leader_id, std::string candidate_id, const std::string& detail)
        : std::runtime_error("judge failed for pair (" + leader_id + ", " + candidate_id +
                             "): " + detail),
          leader_id_(std::move(leader_id)),
          candidate_id_(std::move(candidate_id)) {}

    const std::string& leader_id() const { return leader_id_; }
    const std::string& candidate_id() const { return candidate_id_; }

private:
    std::string leader_id_;
    std::string candidate_id_;
};

class JudgeTransportError : public JudgeError {
public:
    using JudgeError::JudgeError;
};

namespace detail {

// Splices values into template slots left to right without rescanning the
// spliced-in text, so a solution that itself contains "{solution}" (or a tag
// literal) cannot hijack a later slot.
inline std::string render_slots(
        std::string_view tmpl,
        const std::vector<std::pair<std::string_view, std::string_view>>& subs) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& [slot, value] : subs) {
        const auto at = tmpl.find(slot, pos);
        if (at == std::string_view::npos)
            throw std::logic_error("template slot missing: " + std::string(slot));
        out.append(tmpl.substr(pos, at - pos));
        out.append(value);
        pos = at + slot.size();
    }
    out.append(tmpl.substr(pos));
    return out;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

}  // namespace detail

inline JudgePrompt build_prompt(const Problem& problem, const Solution& previous,
                                const Solution& candidate) {
    if (previous.problem_id != problem.id || candidate.problem_id != problem.id)
        throw std::invalid_argument("build_prompt: solutions do not belong to problem '" +
                                    problem.id + "'");
    JudgePrompt p;
    p.template_version = std::string(kTemplateVersion);
    p.rendered_text = detail::render_slots(kJudgeTemplate, {{"{question}", problem.statement},
                                                            {"{past_solution}", previous.code},
                                                            {"{solution}", candidate.code}});
    return p;
}

// Reads the judge's decision off its completion: the LAST line containing
// "Decision:" (case-insensitive) wins; the line must contain exactly one of
// the two instructed phrases. Anything else is Unparseable.
inline RawDecision parse_decision(std::string_view completion) {
    std::string_view decision_line;
    bool found = false;
    std::size_t start = 0;
    while (start <= completion.size()) {
        auto end = completion.find('\n', start);
        if (end == std::string_view::npos) end = completion.size();
        const auto line = completion.substr(start, end - start);
        if (detail::lower(line).find("decision:") != std::string::npos) {
            decision_line = line;
            found = true;
        }
        if (end == completion.size()) break;
        start = end + 1;
    }
    if (!found) return RawDecision::Unparseable;
    const std::string low = detail::lower(decision_line);
    const bool same = low.find(detail::lower(kSamePhrase)) != std::string::npos;
    const bool different = low.find(detail::lower(kDifferentPhrase)) != std::string::npos;
    if (same == different) return RawDecision::Unparseable;
    return same ? RawDecision::Same : RawDecision::Different;
}

// Completion minus the decision line (the same line parse_decision reads),
// with trailing blank space trimmed. The whole completion if no line parses.
inline std::string strip_decision_line(std::string_view completion) {
    std::size_t best_start = std::string_view::npos, best_end = 0;
    std::size_t start = 0;
    while (start <= completion.size()) {
        auto end = completion.find('\n', start);
        if (end == std::string_view::npos) end = completion.size();
        if (detail::lower(completion.substr(start, end - start)).find("decision:") !=
            std::string::npos) {
            best_start = start;
            best_end = end;
        }
        if (end == completion.size()) break;
        start = end + 1;
    }
    std::string out;
    if (best_start == std::string_view::npos) {
        out = std::string(completion);
    } else {
        out = std::string(completion.substr(0, best_start));
        if (best_end < completion.size()) out += std::string(completion.substr(best_end + 1));
    }
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r' || out.back() == ' ' ||
                            out.back() == '\t'))
        out.pop_back();
    return out;
}

// Deterministic, direction-sensitive key for the verdict cache. Every part is
// length-framed so distinct tuples can never collide by concatenation.
inline std::string cache_key(const Problem& problem, const Solution& leader,
                             const Solution& candidate, const std::string& judge_id,
                             const std::string& template_version) {
    std::string key;
    const auto frame = [&key](std::string_view part) {
        key += std::to_string(part.size());
        key += ':';
        key += part;
        key += '|';
    };
    frame(problem.id);
    frame(content_hash(leader.code));
    frame(content_hash(candidate.code));
    frame(judge_id);
    frame(template_version);
    return key;
}

// ---- judge interface ---------------------------------------------------------

class Judge {
public:
    virtual ~Judge() = default;
    virtual std::string judge_id() const = 0;
    virtual std::string template_version() const { return "oracle"; }
    // Directional: `leader` plays the "previous solution" role. Throws
    // JudgeError (or a subclass) on operational failure.
    virtual JudgeVerdict judge_pair(const Problem& problem, const Solution& leader,
                                    const Solution& candidate) = 0;
};

namespace detail {

inline JudgeVerdict oracle_verdict(const Judge& judge, const Solution& leader,
                                   const Solution& candidate, Decision d) {
    JudgeVerdict v;
    v.leader_id = leader.id;
    v.candidate_id = candidate.id;
    v.decision = d;
    v.judge_id = judge.judge_id();
    v.template_version = judge.template_version();
    v.parse_status = ParseStatus::clean();
    return v;
}

}  // namespace detail

// Ground-truth judge for tests and the self-check suite: Same iff both
// solutions carry the same registered label. Unlabelled id → invalid_argument
// (a harness bug, not an operational judge failure).
class LabelOracleJudge : public Judge {
public:
    explicit LabelOracleJudge(std::unordered_map<std::string, std::string> labels)
        : labels_(std::move(labels)) {}

    std::string judge_id() const override { return "oracle:labels"; }

    JudgeVerdict judge_pair(const Problem&, const Solution& leader,
                            const Solution& candidate) override {
        const auto& a = label_of(leader.id);
        const auto& b = label_of(candidate.id);
        return detail::oracle_verdict(*this, leader, candidate,
                                      a == b ? Decision::Same : Decision::Different);
    }

private:
    const std::string& label_of(const std::string& id) const {
        const auto it = labels_.find(id);
        if (it == labels_.end())
            throw std::invalid_argument("no oracle label for solution '" + id + "'");
        return it->second;
    }

    std::unordered_map<std::string, std::string> labels_;
};

// Reads the ground-truth family straight out of the code text: the token
// following the first `marker` occurrence (e.g. "# ALGO:two_pointer"). Lets a
// corpus file carry its own oracle labels.
class MarkerOracleJudge : public Judge {
public:
    explicit MarkerOracleJudge(std::string marker = "ALGO:") : marker_(std::move(marker)) {}

    std::string judge_id() const override { return "oracle:marker"; }

    static std::optional<std::string> extract_marker(const std::string& code,
                                                     const std::string& marker) {
        const auto at = code.find(marker);
        if (at == std::string::npos) return std::nullopt;
        std::size_t begin = at + marker.size();
        std::size_t end = begin;
        while (end < code.size() && code[end] != '\n' && code[end] != '\r' &&
               code[end] != ' ' && code[end] != '\t')
            ++end;
        if (end == begin) return std::nullopt;
        return code.substr(begin, end - begin);
    }

    JudgeVerdict judge_pair(const Problem&, const Solution& leader,
                            const Solution& candidate) override {
        const auto a = extract_marker(leader.code, marker_);
        const auto b = extract_marker(candidate.code, marker_);
        if (!a) throw std::invalid_argument("no '" + marker_ + "' marker in solution '" +
                                            leader.id + "'");
        if (!b) throw std::invalid_argument("no '" + marker_ + "' marker in solution '" +
                                            candidate.id + "'");
        return detail::oracle_verdict(*this, leader, candidate,
                                      *a == *b ? Decision::Same : Decision::Different);
    }

private:
    std::string marker_;
};

// Degenerate judges for boundary tests: everything Same (one cluster) or
// everything Different (all singletons).
class FixedDecisionJudge : public Judge {
public:
    explicit FixedDecisionJudge(Decision d) : decision_(d) {}

    std::string judge_id() const override {
        return decision_ == Decision::Same ? "oracle:always-same" : "oracle:always-different";
    }

    JudgeVerdict judge_pair(const Problem&, const Solution& leader,
                            const Solution& candidate) override {
        return detail::oracle_verdict(*this, leader, candidate, decision_);
    }

private:
    Decision decision_;
};

// Pass-through wrapper that counts judge_pair calls; used to verify the
// clustering's query-count arithmetic and the cache's hit behaviour.
class CountingJudge : public Judge {
public:
    explicit CountingJudge(Judge& inner) : inner_(inner) {}

    std::string judge_id() const override { return inner_.judge_id(); }
    std::string template_version() const override { return inner_.template_version(); }

    JudgeVerdict judge_pair(const Problem& problem, const Solution& leader,
                            const Solution& candidate) override {
        ++calls_;
        return inner_.judge_pair(problem, leader, candidate);
    }

    std::size_t calls() const { return calls_; }
    void reset() { calls_ = 0; }

private:
    Judge& inner_;
    std::size_t calls_ = 0;
};

// ---- completion-backed judge ---------------------------------------------------

// Anything that can turn a prompt into a completion: an HTTP chat endpoint in
// production, a scripted stub in tests.
class CompletionSource {
public:
    virtual ~CompletionSource() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

// Replays a fixed sequence of completions; throws when the script runs dry so
// a test that over-queries fails loudly.
class ScriptedCompletionSource : public CompletionSource {
public:
    explicit ScriptedCompletionSource(std::vector<std::string> script)
        : script_(std::move(script)) {}

    std::string complete(const std::string&) override {
        if (next_ >= script_.size())
            throw std::runtime_error("scripted completion source exhausted after " +
                                     std::to_string(script_.size()) + " calls");
        return script_[next_++];
    }

    std::size_t calls() const { return next_; }

private:
    std::vector<std::string> script_;
    std::size_t next_ = 0;
};

// The LLM-backed judge: renders the prompt, asks the completion source, and
// parses the decision. Unparseable completions are re-asked up to max_retries
// times; when every attempt fails to parse, the verdict is forced to
// Different so downstream clustering sees a spurious split (visible as extra
// singletons) rather than an invisible merge.
class CompletionJudge : public Judge {
public:
    CompletionJudge(CompletionSource& source, std::string judge_id, int max_retries = 2)
        : source_(source), judge_id_(std::move(judge_id)), max_retries_(max_retries) {}

    std::string judge_id() const override { return judge_id_; }
    std::string template_version() const override { return std::string(kTemplateVersion); }

    JudgeVerdict judge_pair(const Problem& problem, const Solution& leader,
                            const Solution& candidate) override {
        const JudgePrompt prompt = build_prompt(problem, leader, candidate);
        JudgeVerdict v;
        v.leader_id = leader.id;
        v.candidate_id = candidate.id;
        v.judge_id = judge_id_;
        v.template_version = prompt.template_version;
        for (int attempt = 0; attempt <= max_retries_; ++attempt) {
            std::string completion;
            try {
                completion = source_.complete(prompt.rendered_text);
            } catch (const JudgeError&) {
                throw;
            } catch (const std::exception& e) {
                throw JudgeTransportError(leader.id, candidate.id, e.what());
            }
            v.raw_completion = completion;
            const RawDecision d = parse_decision(completion);
            if (d != RawDecision::Unparseable) {
                v.decision = d == RawDecision::Same ? Decision::Same : Decision::Different;
                v.rationale = strip_decision_line(completion);
                v.parse_status =
                        attempt == 0 ? ParseStatus::clean() : ParseStatus::recovered(attempt);
                return v;
            }
        }
        v.decision = Decision::Different;
        v.rationale = strip_decision_line(v.raw_completion);
        v.parse_status = ParseStatus::forced();
        return v;
    }

private:
    CompletionSource& source_;
    std::string judge_id_;
    int max_retries_;
};

// ---- verdict cache ---------------------------------------------------------

// Append-only verdict store (verdicts.jsonl): one {key, verdict} object per
// line. Entries are immutable — on duplicate keys the first wins. Safe for
// concurrent lookups and appends.
class VerdictCache {
public:
    // In-memory only when path is empty.
    explicit VerdictCache(std::string path = "") : path_(std::move(path)) {
        if (path_.empty()) return;
        if (std::filesystem::exists(path_)) {
            read_jsonl(path_, [this](const json& j, std::size_t) {
                entries_.emplace(j.at("key").get<std::string>(),
                                 j.at("verdict").get<JudgeVerdict>());
            });
        }
        out_.open(path_, std::ios::binary | std::ios::app);
        if (!out_) throw JsonlError(path_, "cannot open cache for appending");
    }

    std::optional<JudgeVerdict> lookup(const std::string& key) const {
        std::lock_guard lock(mu_);
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void store(const std::string& key, const JudgeVerdict& verdict) {
        std::lock_guard lock(mu_);
        const auto [it, inserted] = entries_.emplace(key, verdict);
        if (!inserted) return;
        if (out_.is_open()) {
            out_ << json{{"key", key}, {"verdict", verdict}}.dump() << '\n';
            out_.flush();
        }
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return entries_.size();
    }

private:
    std::string path_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, JudgeVerdict> entries_;
    std::ofstream out_;
};

// Memoizing wrapper: a repeated (problem, leader, candidate) query under the
// same judge and template returns the stored verdict without touching the
// inner judge.
class CachedJudge : public Judge {
public:
    CachedJudge(Judge& inner, VerdictCache& cache) : inner_(inner), cache_(cache) {}

    std::string judge_id() const override { return inner_.judge_id(); }
    std::string template_version() const override { return inner_.template_version(); }

    JudgeVerdict judge_pair(const Problem& problem, const Solution& leader,
                            const Solution& candidate) override {
        const std::string key =
                cache_key(problem, leader, candidate, inner_.judge_id(), inner_.template_version());
        if (auto hit = cache_.lookup(key)) return *hit;
        const JudgeVerdict v = inner_.judge_pair(problem, leader, candidate);
        cache_.store(key, v);
        return v;
    }

private:
    Judge& inner_;
    VerdictCache& cache_;
};

}  // namespace algodiv
