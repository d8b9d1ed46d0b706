#include <catch2/catch_amalgamated.hpp>

#include <algodiv/ingest.hpp>

#include "test_util.hpp"

using namespace algodiv;
using testutil::ScratchDir;

TEST_CASE("extract_code pulls the first complete fenced block", "[ingest]") {
    CHECK(extract_code("```python\nprint(1)\n```") == "print(1)");
    CHECK(extract_code("```\nprint(1)\n```") == "print(1)");
    CHECK(extract_code("Sure, here is the code:\n```py\na = 1\nb = 2\n```\nHope it helps!") ==
          "a = 1\nb = 2");
    // Only the first block counts.
    CHECK(extract_code("```\nfirst\n```\n```\nsecond\n```") == "first");
    // Windows newlines are tolerated.
    CHECK(extract_code("```python\r\nx = 1\r\n```\r\n") == "x = 1");
    // An empty block is a present-but-empty program.
    CHECK(extract_code("```\n```") == "");
}

TEST_CASE("extract_code refuses text without a complete block", "[ingest]") {
    CHECK(extract_code("no code at all") == std::nullopt);
    CHECK(extract_code("```python\nunterminated") == std::nullopt);
    CHECK(extract_code("") == std::nullopt);
    // Backticks not at line start do not open a fence.
    CHECK(extract_code("inline ``` tick\nstill prose") == std::nullopt);
}

TEST_CASE("completions_to_solutions assigns stable per-model indices", "[ingest]") {
    RawCompletion a;
    a.problem_id = "p1";
    a.model_id = "m";
    a.text = "```\nprint(1)\n```";
    RawCompletion bad = a;
    bad.text = "no block here";
    RawCompletion b = a;
    b.text = "```\nprint(2)\n```";
    RawCompletion other = a;
    other.model_id = "m2";
    other.text = "```\nprint(3)\n```";
    GenMeta gm;
    gm.temperature = 0.8;
    b.gen_meta = gm;

    const ExtractionResult r = completions_to_solutions({a, bad, b, other});
    CHECK(r.dropped == 1);
    REQUIRE(r.solutions.size() == 3);
    CHECK(r.solutions[0].id == "m/p1/0");
    // The dropped completion still consumed index 1.
    CHECK(r.solutions[1].id == "m/p1/2");
    CHECK(r.solutions[2].id == "m2/p1/0");
    CHECK(r.solutions[0].origin.str() == "model:m");
    CHECK(r.solutions[0].problem_id == "p1");
    CHECK(r.solutions[1].code == "print(2)");
    REQUIRE(r.solutions[1].gen_meta.has_value());
    CHECK(r.solutions[1].gen_meta->temperature == 0.8);
}

TEST_CASE("raw completions preserve unknown fields", "[ingest]") {
    const json j = {{"problem_id", "p"},
                    {"model_id", "m"},
                    {"text", "```\nx\n```"},
                    {"request_id", "abc-123"}};
    const RawCompletion c = j.get<RawCompletion>();
    CHECK(json(c).at("request_id") == "abc-123");
}

TEST_CASE("solutions file specs parse optional labels", "[ingest]") {
    const auto bare = SolutionsFileSpec::parse("out/solutions.jsonl");
    CHECK(bare.label.empty());
    CHECK(bare.path == "out/solutions.jsonl");
    const auto labeled = SolutionsFileSpec::parse("gpt4=runs/a.jsonl");
    CHECK(labeled.label == "gpt4");
    CHECK(labeled.path == "runs/a.jsonl");
    // A leading '=' is not a label.
    const auto odd = SolutionsFileSpec::parse("=weird.jsonl");
    CHECK(odd.label.empty());
    CHECK(odd.path == "=weird.jsonl");
}

namespace {

std::string solution_line(const std::string& id, const std::string& pid,
                          const std::string& origin, const std::string& code = "x") {
    json j = {{"id", id}, {"problem_id", pid}, {"code", code}, {"origin", origin}};
    return j.dump() + "\n";
}

}  // namespace

TEST_CASE("load_corpus groups by problem and label in first-appearance order", "[ingest]") {
    ScratchDir dir;
    const std::string problems = dir.file("problems.jsonl");
    testutil::spit(problems, json{{"id", "p1"}, {"statement", "a"}}.dump() + "\n" +
                                     json{{"id", "p2"}, {"statement", "b"}}.dump() + "\n");
    const std::string file_a = dir.file("a.jsonl");
    testutil::spit(file_a, solution_line("a1", "p1", "model:gpt") +
                                   solution_line("a2", "p2", "model:gpt") +
                                   solution_line("a3", "p1", "model:gpt"));
    const std::string file_b = dir.file("b.jsonl");
    testutil::spit(file_b, solution_line("b1", "p2", "human") +
                                   solution_line("b2", "p1", "human"));

    const LoadedCorpus corpus =
            load_corpus(problems, {SolutionsFileSpec::parse(file_a),
                                   SolutionsFileSpec::parse("ref=" + file_b)});
    CHECK(corpus.violations.empty());
    REQUIRE(corpus.problems.size() == 2);
    REQUIRE(corpus.sets.size() == 4);
    // First-appearance order across files: (p1,gpt), (p2,gpt), (p2,ref), (p1,ref).
    CHECK(corpus.sets[0].problem_id == "p1");
    CHECK(corpus.sets[0].label == "gpt");
    CHECK(corpus.sets[0].size() == 2);
    CHECK(corpus.sets[1].problem_id == "p2");
    CHECK(corpus.sets[1].label == "gpt");
    CHECK(corpus.sets[2].label == "ref");
    CHECK(corpus.sets[2].problem_id == "p2");
    CHECK(corpus.sets[3].label == "ref");
    CHECK(corpus.sets[3].solutions[0].id == "b2");
}

TEST_CASE("load_corpus surfaces violations instead of throwing", "[ingest]") {
    ScratchDir dir;
    const std::string problems = dir.file("problems.jsonl");
    testutil::spit(problems, json{{"id", "p1"}, {"statement", "a"}}.dump() + "\n");
    const std::string file_a = dir.file("a.jsonl");
    testutil::spit(file_a, solution_line("a1", "ghost", "human"));
    const LoadedCorpus corpus = load_corpus(problems, {SolutionsFileSpec::parse(file_a)});
    REQUIRE_FALSE(corpus.violations.empty());
    CHECK(corpus.violations[0].code == "dangling_problem_id");
}

namespace {

SolutionSet labeled_set(const std::string& label, const std::string& pid,
                        std::vector<std::pair<std::string, std::string>> id_code) {
    SolutionSet s;
    s.problem_id = pid;
    s.label = label;
    for (auto& [id, code] : id_code) {
        Solution sol;
        sol.id = id;
        sol.problem_id = pid;
        sol.code = code;
        s.solutions.push_back(std::move(sol));
    }
    return s;
}

}  // namespace

TEST_CASE("merge_sets concatenates under a merged label", "[ingest]") {
    const SolutionSet a = labeled_set("modelA", "p", {{"a1", "x"}, {"a2", "y"}});
    const SolutionSet b = labeled_set("modelB", "p", {{"b1", "z"}});
    const MergeResult r = merge_sets({a, b});
    CHECK(r.set.label == "merged:modelA+modelB");
    CHECK(r.set.problem_id == "p");
    REQUIRE(r.set.solutions.size() == 3);
    CHECK(r.set.solutions[0].id == "a1");
    CHECK(r.set.solutions[2].id == "b1");
    CHECK(r.duplicates_dropped == 0);
}

TEST_CASE("repeated merges keep a flat label", "[ingest]") {
    const SolutionSet a = labeled_set("modelA", "p", {{"a1", "x"}});
    const SolutionSet b = labeled_set("modelB", "p", {{"b1", "y"}});
    const SolutionSet c = labeled_set("modelC", "p", {{"c1", "z"}});
    const MergeResult ab = merge_sets({a, b});
    const MergeResult abc = merge_sets({ab.set, c});
    CHECK(abc.set.label == "merged:modelA+modelB+modelC");
}

TEST_CASE("dedupe drops byte-identical code and keeps the first", "[ingest]") {
    const SolutionSet a = labeled_set("modelA", "p", {{"a1", "same"}, {"a2", "unique"}});
    const SolutionSet b = labeled_set("modelB", "p", {{"b1", "same"}, {"b2", "same "}});
    const MergeResult kept = merge_sets({a, b}, /*dedupe=*/false);
    CHECK(kept.set.solutions.size() == 4);  // duplicates are frequency signal

    const MergeResult deduped = merge_sets({a, b}, /*dedupe=*/true);
    CHECK(deduped.duplicates_dropped == 1);  // trailing space makes b2 distinct
    REQUIRE(deduped.set.solutions.size() == 3);
    CHECK(deduped.set.solutions[0].id == "a1");
}

TEST_CASE("self-merge with dedupe returns the original size", "[ingest]") {
    const SolutionSet a = labeled_set("modelA", "p", {{"a1", "x"}, {"a2", "y"}});
    SolutionSet copy = a;
    for (auto& s : copy.solutions) s.id += "_dup";  // distinct ids, same code
    const MergeResult r = merge_sets({a, copy}, /*dedupe=*/true);
    CHECK(r.set.solutions.size() == a.solutions.size());
    CHECK(r.duplicates_dropped == a.solutions.size());
}

TEST_CASE("merge_sets refuses mixed problems and colliding ids", "[ingest]") {
    const SolutionSet a = labeled_set("modelA", "p1", {{"a1", "x"}});
    const SolutionSet b = labeled_set("modelB", "p2", {{"b1", "y"}});
    CHECK_THROWS_AS(merge_sets({a, b}), std::invalid_argument);

    const SolutionSet dup = labeled_set("modelB", "p1", {{"a1", "y"}});
    CHECK_THROWS_AS(merge_sets({a, dup}), std::invalid_argument);
    CHECK_THROWS_AS(merge_sets({}), std::invalid_argument);
}

TEST_CASE("default set labels come from origin", "[ingest]") {
    Solution human;
    human.origin = Origin::human();
    CHECK(default_set_label(human) == "human");
    Solution model;
    model.origin = Origin::model("m1");
    CHECK(default_set_label(model) == "m1");
}
