#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "algodiv/core.hpp"
#include "algodiv/jsonl.hpp"

namespace algodiv {

// One raw model output before code extraction (completions.jsonl schema).
struct RawCompletion {
    std::string problem_id;
    std::string model_id;
    std::string text;
    std::optional<GenMeta> gen_meta;
    json extra;
};

inline void to_json(json& j, const RawCompletion& c) {
    j = c.extra.is_object() ? c.extra : json::object();
    j["problem_id"] = c.problem_id;
    j["model_id"] = c.model_id;
    j["text"] = c.text;
    if (c.gen_meta)
        j["gen_meta"] = *c.gen_meta;
    else
        j.erase("gen_meta");
}

inline void from_json(const json& j, RawCompletion& c) {
    c = RawCompletion{};
    j.at("problem_id").get_to(c.problem_id);
    j.at("model_id").get_to(c.model_id);
    j.at("text").get_to(c.text);
    if (j.contains("gen_meta") && !j.at("gen_meta").is_null())
        c.gen_meta = j.at("gen_meta").get<GenMeta>();
    c.extra = j;
    for (const char* k : {"problem_id", "model_id", "text", "gen_meta"}) c.extra.erase(k);
}

// Body of the first complete fenced code block: ``` at line start opens it
// (anything after the backticks on that line is a language word and is
// dropped), the next line starting with ``` closes it. No closing fence —
// no block.
inline std::optional<std::string> extract_code(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    std::size_t open = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].substr(0, 3) == "```") {
            open = i;
            break;
        }
    }
    if (open == lines.size()) return std::nullopt;
    for (std::size_t i = open + 1; i < lines.size(); ++i) {
        if (lines[i].substr(0, 3) == "```") {
            std::string body;
            for (std::size_t l = open + 1; l < i; ++l) {
                if (l > open + 1) body += '\n';
                body += lines[l];
            }
            return body;
        }
    }
    return std::nullopt;  // unterminated fence
}

inline std::optional<std::string> extract_code(const RawCompletion& c) {
    return extract_code(c.text);
}

struct ExtractionResult {
    std::vector<Solution> solutions;
    std::size_t dropped = 0;  // completions without a complete fenced block
};

// Turns raw completions into Solutions. Ids follow
// "<model_id>/<problem_id>/<index>" with a per-(model, problem) running
// index over the input order, counting dropped completions too, so an id is
// stable under re-extraction of the same file.
inline ExtractionResult completions_to_solutions(const std::vector<RawCompletion>& completions) {
    ExtractionResult out;
    std::map<std::pair<std::string, std::string>, std::size_t> counters;
    for (const auto& c : completions) {
        const std::size_t index = counters[{c.model_id, c.problem_id}]++;
        const auto code = extract_code(c);
        if (!code) {
            ++out.dropped;
            continue;
        }
        Solution s;
        s.id = c.model_id + "/" + c.problem_id + "/" + std::to_string(index);
        s.problem_id = c.problem_id;
        s.code = *code;
        s.origin = Origin::model(c.model_id);
        s.gen_meta = c.gen_meta;
        out.solutions.push_back(std::move(s));
    }
    return out;
}

// ---- corpus loading ----------------------------------------------------------

struct LoadedCorpus {
    std::vector<Problem> problems;
    std::vector<SolutionSet> sets;        // one per (problem, label), stable order
    std::vector<Violation> violations;    // validate_corpus findings, empty = clean
};

// A solutions file argument: "label=path" pins every solution in the file to
// that set label; a bare "path" lets each solution's origin name its label
// ("human", or the model id).
struct SolutionsFileSpec {
    std::string label;  // empty = derive from origin
    std::string path;

    static SolutionsFileSpec parse(const std::string& arg) {
        const auto eq = arg.find('=');
        // A Windows drive letter is not a label; neither is an empty one.
        if (eq == std::string::npos || eq == 0) return {"", arg};
        return {arg.substr(0, eq), arg.substr(eq + 1)};
    }
};

inline std::string default_set_label(const Solution& s) {
    return s.origin.is_model ? s.origin.model_id : "human";
}

// Loads problems plus any number of solutions files and groups the solutions
// into per-(problem, label) sets, preserving file order within and across
// files. validate_corpus runs on the result; findings are returned, not
// thrown — the caller decides how loud to be.
inline LoadedCorpus load_corpus(const std::string& problems_path,
                                const std::vector<SolutionsFileSpec>& solution_files) {
    LoadedCorpus out;
    out.problems = read_jsonl_as<Problem>(problems_path);
    std::map<std::pair<std::string, std::string>, std::size_t> set_index;  // (problem,label)
    for (const auto& file : solution_files) {
        for (auto& s : read_jsonl_as<Solution>(file.path)) {
            const std::string label = file.label.empty() ? default_set_label(s) : file.label;
            const auto key = std::make_pair(s.problem_id, label);
            const auto it = set_index.find(key);
            if (it == set_index.end()) {
                set_index.emplace(key, out.sets.size());
                out.sets.push_back({s.problem_id, label, {std::move(s)}});
            } else {
                out.sets[it->second].solutions.push_back(std::move(s));
            }
        }
    }
    out.violations = validate_corpus(out.problems, out.sets);
    return out;
}

// ---- merging -----------------------------------------------------------------

struct MergeResult {
    SolutionSet set;
    std::size_t duplicates_dropped = 0;  // byte-identical code bodies, dedupe only
};

// Concatenates sets for one problem in argument order under the label
// "merged:<l1>+<l2>+…" (an input's own "merged:" prefix is folded away, so
// repeated merging stays flat). With dedupe, later byte-identical code is
// dropped and counted; duplicates are kept by default since cluster mass is
// frequency signal. Duplicate ids surviving into the result are refused —
// downstream clustering needs unique ids.
inline MergeResult merge_sets(const std::vector<SolutionSet>& sets, bool dedupe = false) {
    if (sets.empty()) throw std::invalid_argument("merge_sets: no sets given");
    const std::string& problem_id = sets.front().problem_id;
    for (const auto& s : sets)
        if (s.problem_id != problem_id)
            throw std::invalid_argument("merge_sets: sets mix problems '" + problem_id +
                                        "' and '" + s.problem_id + "'");
    MergeResult out;
    out.set.problem_id = problem_id;
    std::string label = "merged:";
    static const std::string prefix = "merged:";
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (i > 0) label += '+';
        const std::string& l = sets[i].label;
        label += l.rfind(prefix, 0) == 0 ? l.substr(prefix.size()) : l;
    }
    out.set.label = std::move(label);

    std::unordered_set<std::string_view> seen_code;
    std::unordered_set<std::string_view> seen_ids;
    for (const auto& s : sets) {
        for (const auto& sol : s.solutions) {
            if (dedupe && !seen_code.insert(sol.code).second) {
                ++out.duplicates_dropped;
                continue;
            }
            if (!seen_ids.insert(sol.id).second)
                throw std::invalid_argument("merge_sets: duplicate solution id '" + sol.id + "'");
            out.set.solutions.push_back(sol);
        }
    }
    return out;
}

}  // namespace algodiv
