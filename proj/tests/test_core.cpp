#include <catch2/catch_amalgamated.hpp>

#include <algodiv/core.hpp>

using namespace algodiv;

namespace {

Solution make_solution(std::string id, std::string problem_id, std::string code,
                       Correctness c = Correctness::Unknown) {
    Solution s;
    s.id = std::move(id);
    s.problem_id = std::move(problem_id);
    s.code = std::move(code);
    s.correctness = c;
    return s;
}

SolutionSet small_set() {
    SolutionSet set;
    set.problem_id = "p1";
    set.label = "modelA";
    set.solutions = {
            make_solution("s1", "p1", "print(1)", Correctness::Pass),
            make_solution("s2", "p1", "print(2)", Correctness::Fail),
            make_solution("s3", "p1", "print(3)", Correctness::Pass),
            make_solution("s4", "p1", "print(4)", Correctness::Unknown),
    };
    return set;
}

}  // namespace

TEST_CASE("origin encodes human and model provenance", "[core]") {
    CHECK(Origin::human().str() == "human");
    CHECK_FALSE(Origin::human().is_model);
    const Origin m = Origin::model("gpt-x");
    CHECK(m.is_model);
    CHECK(m.model_id == "gpt-x");
    CHECK(m.str() == "model:gpt-x");
}

TEST_CASE("correctness names are stable", "[core]") {
    CHECK(to_string(Correctness::Unknown) == "unknown");
    CHECK(to_string(Correctness::Pass) == "pass");
    CHECK(to_string(Correctness::Fail) == "fail");
}

TEST_CASE("filter_correct keeps only passing solutions", "[core]") {
    const SolutionSet set = small_set();
    const SolutionSet kept = filter_correct(set);
    REQUIRE(kept.size() == 2);
    CHECK(kept.solutions[0].id == "s1");
    CHECK(kept.solutions[1].id == "s3");
    CHECK(kept.problem_id == "p1");
    CHECK(kept.label == "modelA:correct");
    // The input is untouched.
    CHECK(set.size() == 4);
    CHECK(set.label == "modelA");
}

TEST_CASE("filter_correct does not stack the :correct suffix", "[core]") {
    SolutionSet set = small_set();
    set.label = "modelA:correct";
    CHECK(filter_correct(set).label == "modelA:correct");
}

TEST_CASE("validate_corpus accepts a clean corpus", "[core]") {
    Problem p;
    p.id = "p1";
    p.statement = "do the thing";
    const SolutionSet set = small_set();
    CHECK(validate_corpus({p}, {set}).empty());
}

TEST_CASE("validate_corpus flags every integrity violation", "[core]") {
    Problem good;
    good.id = "p1";
    Problem blank;  // empty id
    Problem dup;
    dup.id = "p1";

    SolutionSet set;
    set.problem_id = "p1";
    set.label = "broken";
    set.solutions = {
            make_solution("", "p1", "x"),           // empty solution id
            make_solution("a", "p1", "x"),          //
            make_solution("a", "p1", "y"),          // duplicate solution id
            make_solution("b", "p1", ""),           // empty code
            make_solution("c", "ghost", "z"),       // dangling + mixed problem id
    };

    const auto violations = validate_corpus({good, blank, dup}, {set});
    std::set<std::string> codes;
    for (const auto& v : violations) codes.insert(v.code);
    CHECK(codes.count("empty_problem_id"));
    CHECK(codes.count("duplicate_problem_id"));
    CHECK(codes.count("empty_solution_id"));
    CHECK(codes.count("duplicate_solution_id"));
    CHECK(codes.count("empty_code"));
    CHECK(codes.count("dangling_problem_id"));
    CHECK(codes.count("mixed_problem_id"));
}

TEST_CASE("problem_index maps ids to problems", "[core]") {
    Problem a;
    a.id = "p1";
    Problem b;
    b.id = "p2";
    const std::vector<Problem> problems = {a, b};
    const auto index = problem_index(problems);
    REQUIRE(index.size() == 2);
    CHECK(index.at("p2")->id == "p2");
    CHECK(index.count("p3") == 0);
}
