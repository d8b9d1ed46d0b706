#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace algodiv {

using json = nlohmann::json;

struct TestCase {
    std::string input;
    std::string expected_output;
};

enum class Correctness { Unknown, Pass, Fail };

inline std::string to_string(Correctness c) {
    switch (c) {
        case Correctness::Pass: return "pass";
        case Correctness::Fail: return "fail";
        default: return "unknown";
    }
}

// Where a solution came from: a human author or a sampled model.
// Serialized as "human" or "model:<model_id>".
struct Origin {
    bool is_model = false;
    std::string model_id;  // empty for human

    static Origin human() { return Origin{}; }
    static Origin model(std::string id) { return Origin{true, std::move(id)}; }

    std::string str() const { return is_model ? "model:" + model_id : "human"; }
    bool operator==(const Origin&) const = default;
};

// Sampling parameters recorded alongside a generated solution.
struct GenMeta {
    double temperature = 1.0;
    double top_p = 0.95;
    int max_tokens = 1024;
    bool operator==(const GenMeta&) const = default;
};

struct Problem {
    std::string id;
    std::string statement;
    std::string source;      // e.g. "atcoder", "codeforces", "synthetic"
    std::string difficulty;  // e.g. "introductory", "interview", "competition"
    std::vector<TestCase> tests;
    json extra;  // round-trips fields this tool does not interpret
};

struct Solution {
    std::string id;
    std::string problem_id;
    std::string code;
    Origin origin;
    Correctness correctness = Correctness::Unknown;
    std::string fail_reason;  // set only when correctness == Fail
    std::optional<GenMeta> gen_meta;
    json extra;
};

// A labelled group of solutions to one problem, the unit the clustering and
// the metrics operate on. label typically identifies the generating model
// (plus sampling temperature, for sweeps).
struct SolutionSet {
    std::string problem_id;
    std::string label;
    std::vector<Solution> solutions;

    std::size_t size() const { return solutions.size(); }
    bool empty() const { return solutions.empty(); }
};

// Keep only solutions that passed verification. Pure: the input set is not
// touched. The label gains a ":correct" suffix unless it already has one, so
// filtering twice is a no-op apart from the copy.
inline SolutionSet filter_correct(const SolutionSet& set) {
    SolutionSet out;
    out.problem_id = set.problem_id;
    static const std::string suffix = ":correct";
    if (set.label.size() >= suffix.size() &&
        set.label.compare(set.label.size() - suffix.size(), suffix.size(), suffix) == 0) {
        out.label = set.label;
    } else {
        out.label = set.label + suffix;
    }
    for (const auto& s : set.solutions)
        if (s.correctness == Correctness::Pass) out.solutions.push_back(s);
    return out;
}

// A single referential-integrity problem found by validate_corpus.
struct Violation {
    std::string code;     // stable machine-readable kind, e.g. "duplicate_solution_id"
    std::string subject;  // offending id (or set label for set-level findings)
    std::string message;  // human-readable detail
};

// Cross-checks a corpus: ids must be unique and non-empty, every solution
// must reference a known problem, and a set must not mix problems. Returns
// all findings rather than stopping at the first.
inline std::vector<Violation> validate_corpus(const std::vector<Problem>& problems,
                                              const std::vector<SolutionSet>& sets) {
    std::vector<Violation> out;
    std::unordered_set<std::string> problem_ids;
    for (const auto& p : problems) {
        if (p.id.empty()) {
            out.push_back({"empty_problem_id", "", "problem with empty id"});
            continue;
        }
        if (!problem_ids.insert(p.id).second)
            out.push_back({"duplicate_problem_id", p.id, "problem id appears more than once"});
    }
    std::unordered_set<std::string> solution_ids;
    for (const auto& set : sets) {
        std::unordered_set<std::string> member_problems;
        for (const auto& s : set.solutions) {
            if (s.id.empty())
                out.push_back({"empty_solution_id", set.label, "solution with empty id in set"});
            else if (!solution_ids.insert(s.id).second)
                out.push_back({"duplicate_solution_id", s.id, "solution id appears more than once"});
            if (s.code.empty())
                out.push_back({"empty_code", s.id, "solution has empty code"});
            if (!problem_ids.count(s.problem_id))
                out.push_back({"dangling_problem_id", s.id,
                               "solution references unknown problem '" + s.problem_id + "'"});
            if (!s.problem_id.empty()) member_problems.insert(s.problem_id);
        }
        if (member_problems.size() > 1 ||
            (!set.problem_id.empty() && member_problems.size() == 1 &&
             !member_problems.count(set.problem_id)))
            out.push_back({"mixed_problem_id", set.label,
                           "set mixes solutions to different problems"});
    }
    return out;
}

// Index problems by id for quick joins. Later duplicates are ignored; run
// validate_corpus first if duplicates matter.
inline std::unordered_map<std::string, const Problem*> problem_index(
        const std::vector<Problem>& problems) {
    std::unordered_map<std::string, const Problem*> idx;
    for (const auto& p : problems) idx.emplace(p.id, &p);
    return idx;
}

}  // namespace algodiv
