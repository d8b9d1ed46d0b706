#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "algodiv/core.hpp"
#include "algodiv/rng.hpp"

namespace algodiv {

// Synthetic corpus: runnable Python solutions to trivial arithmetic problems,
// drawn from a few genuinely different algorithmic families. Every solution
// carries its family in a "# ALGO:<family>" marker line, so the marker-oracle
// judge recovers the ground-truth partition noiselessly — which is what the
// end-to-end determinism checks cluster against.
struct SynthConfig {
    std::size_t problems = 10;
    std::size_t per_problem = 20;
    std::size_t families = 3;
    std::uint64_t seed = 42;
};

struct SynthCorpus {
    std::vector<Problem> problems;
    std::vector<SolutionSet> sets;  // one per problem, label "synth"
};

namespace detail {

inline std::string synth_family_name(std::size_t j) {
    static const char* base[] = {"fam_loop", "fam_builtin", "fam_recurse"};
    if (j < 3) return base[j];
    return "fam_" + std::to_string(j);
}

// Three behaviorally identical programs (print K times the sum of the
// inputs) written three algorithmically different ways. The sample index
// only lands in a comment: solutions within a family differ in bytes but
// not in logic.
inline std::string synth_code(std::size_t family, std::size_t k_factor,
                              const std::string& family_name, std::size_t sample_idx) {
    const std::string k = std::to_string(k_factor);
    const std::string head =
            "# ALGO:" + family_name + "\n# sample " + std::to_string(sample_idx) + "\n";
    switch (family % 3) {
        case 0:
            return head +
                   "import sys\n"
                   "data = sys.stdin.read().split()\n"
                   "n = int(data[0])\n"
                   "total = 0\n"
                   "for t in data[1:1 + n]:\n"
                   "    total += int(t) * " + k + "\n"
                   "print(total)\n";
        case 1:
            return head +
                   "import sys\n"
                   "toks = sys.stdin.read().split()\n"
                   "vals = list(map(int, toks[1:1 + int(toks[0])]))\n"
                   "print(" + k + " * sum(vals))\n";
        default:
            return head +
                   "import sys\n"
                   "def rec(xs):\n"
                   "    if not xs:\n"
                   "        return 0\n"
                   "    return xs[0] * " + k + " + rec(xs[1:])\n"
                   "data = sys.stdin.read().split()\n"
                   "n = int(data[0])\n"
                   "print(rec([int(t) for t in data[1:1 + n]]))\n";
    }
}

}  // namespace detail

inline SynthCorpus make_synthetic_corpus(const SynthConfig& cfg = {}) {
    SynthCorpus corpus;
    SplitMix64 rng(cfg.seed);
    static const char* difficulties[] = {"introductory", "interview", "competition"};

    for (std::size_t p = 0; p < cfg.problems; ++p) {
        const std::size_t k_factor = p + 1;
        Problem problem;
        problem.id = "synth_" + std::to_string(p);
        problem.statement =
                "Read an integer n from the first line of standard input and n space-separated "
                "integers from the second line. Print the sum of the integers after multiplying "
                "each by " + std::to_string(k_factor) + ".";
        problem.source = "synthetic";
        problem.difficulty = difficulties[p % 3];
        for (int t = 0; t < 2; ++t) {
            const std::size_t n = 3 + rng.bounded(5);
            std::string input = std::to_string(n) + "\n";
            long long total = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto x = static_cast<long long>(rng.bounded(100));
                total += x * static_cast<long long>(k_factor);
                input += std::to_string(x);
                input += i + 1 == n ? '\n' : ' ';
            }
            problem.tests.push_back({input, std::to_string(total) + "\n"});
        }

        SolutionSet set;
        set.problem_id = problem.id;
        set.label = "synth";
        for (std::size_t i = 0; i < cfg.per_problem; ++i) {
            // Odd problems skew toward family 0 so cluster-size distributions
            // (and thus the metric values) vary across the corpus.
            std::size_t family = rng.bounded(cfg.families + (p % 2 ? 2 : 0));
            if (family >= cfg.families) family = 0;
            const std::string family_name = detail::synth_family_name(family);
            Solution s;
            s.id = "synth/" + problem.id + "/" + std::to_string(i);
            s.problem_id = problem.id;
            s.code = detail::synth_code(family, k_factor, family_name, i);
            s.origin = Origin::model("synth");
            s.correctness = Correctness::Pass;  // honest: the code passes; exec re-verifies
            set.solutions.push_back(std::move(s));
        }
        corpus.problems.push_back(std::move(problem));
        corpus.sets.push_back(std::move(set));
    }
    return corpus;
}

}  // namespace algodiv
