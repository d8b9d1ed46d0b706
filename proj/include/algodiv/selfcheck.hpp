#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "algodiv/cluster.hpp"
#include "algodiv/core.hpp"
#include "algodiv/judge.hpp"
#include "algodiv/metrics.hpp"
#include "algodiv/rng.hpp"
#include "algodiv/synth.hpp"

namespace algodiv {

// One property/oracle suite outcome. detail carries the first counterexample
// on failure and a case count on success.
struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct CheckOptions {
    std::size_t estimator_cases = 1000;
    std::size_t oracle_cases = 100;
    std::size_t mc_trials = 100000;
    std::size_t ea_cases = 1000;
    std::size_t nauadc_cases = 200;
    std::size_t cluster_cases = 500;
    std::size_t order_seeds = 5;
    std::size_t call_count_cases = 100;
    std::uint64_t seed = 0x5eedf00dULL;
};

namespace detail {

// Random cluster-size vector with n ≤ max_n, M ≤ max_m, every size ≥ 1.
inline ClusterSizes random_sizes(SplitMix64& rng, std::size_t max_n, std::size_t max_m) {
    ClusterSizes cs;
    const std::size_t m = 1 + rng.bounded(max_m);
    const std::size_t n = m + rng.bounded(max_n - m + 1);
    cs.n = n;
    cs.sizes.assign(m, 1);
    for (std::size_t extra = n - m; extra > 0; --extra) ++cs.sizes[rng.bounded(m)];
    return cs;
}

inline std::string sizes_str(const ClusterSizes& cs) {
    std::string s = "n=" + std::to_string(cs.n) + " sizes=[";
    for (std::size_t i = 0; i < cs.sizes.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(cs.sizes[i]);
    }
    return s + "]";
}

// All partitions of n into nonincreasing positive parts.
inline void integer_partitions(std::size_t n, std::size_t max_part,
                               std::vector<std::size_t>& current,
                               std::vector<std::vector<std::size_t>>& out) {
    if (n == 0) {
        out.push_back(current);
        return;
    }
    for (std::size_t part = std::min(n, max_part); part >= 1; --part) {
        current.push_back(part);
        integer_partitions(n - part, part, current, out);
        current.pop_back();
    }
}

// A random solution set with ground-truth labels, plus the label map the
// oracle judge needs. Labels "L0".."L<m-1>"; n ≤ max_n.
struct LabeledSet {
    Problem problem;
    SolutionSet set;
    std::unordered_map<std::string, std::string> labels;
};

inline LabeledSet random_labeled_set(SplitMix64& rng, std::size_t max_n,
                                     std::size_t max_labels) {
    LabeledSet ls;
    ls.problem.id = "p";
    ls.problem.statement = "synthetic";
    ls.set.problem_id = "p";
    ls.set.label = "random";
    const std::size_t n = 1 + rng.bounded(max_n);
    const std::size_t label_count = 1 + rng.bounded(max_labels);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string label = "L" + std::to_string(rng.bounded(label_count));
        Solution s;
        s.id = "s" + std::to_string(i);
        s.problem_id = "p";
        s.code = "# " + label + "\nprint(" + std::to_string(i) + ")\n";
        ls.labels.emplace(s.id, label);
        ls.set.solutions.push_back(std::move(s));
    }
    return ls;
}

// Canonical form for partition comparison: set of sorted member-id groups.
inline std::set<std::vector<std::string>> canonical_partition(
        const std::vector<std::vector<std::string>>& groups) {
    std::set<std::vector<std::string>> out;
    for (auto g : groups) {
        std::sort(g.begin(), g.end());
        out.insert(std::move(g));
    }
    return out;
}

inline std::set<std::vector<std::string>> partition_of_clustering(const Clustering& c) {
    std::vector<std::vector<std::string>> groups;
    for (const auto& cl : c.clusters) groups.push_back(cl.member_ids);
    return canonical_partition(groups);
}

inline std::set<std::vector<std::string>> partition_of_labels(
        const SolutionSet& set, const std::unordered_map<std::string, std::string>& labels) {
    std::map<std::string, std::vector<std::string>> by_label;
    for (const auto& s : set.solutions) by_label[labels.at(s.id)].push_back(s.id);
    std::vector<std::vector<std::string>> groups;
    for (auto& [_, ids] : by_label) groups.push_back(std::move(ids));
    return canonical_partition(groups);
}

}  // namespace detail

// da_at_k(·,1) = 1 and da_at_k(·,n) = M (tolerance 1e-9), nondecreasing in k,
// and bounded by [1, min(k, M)], over randomized sizes with n ≤ 200, M ≤ 20.
inline CheckResult check_estimator_identities(std::size_t cases, std::uint64_t seed) {
    CheckResult r{"estimator-identities"};
    SplitMix64 rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const ClusterSizes cs = detail::random_sizes(rng, 200, 20);
        const double m = static_cast<double>(cs.sizes.size());
        if (std::abs(da_at_k(cs, 1) - 1.0) > 1e-9 ||
            std::abs(da_at_k(cs, static_cast<int>(cs.n)) - m) > 1e-9) {
            r.passed = false;
            r.detail = "boundary identity failed for " + detail::sizes_str(cs);
            return r;
        }
        double prev = 0.0;
        for (std::size_t k = 1; k <= cs.n; ++k) {
            const double v = da_at_k(cs, static_cast<int>(k));
            const double cap = std::min(static_cast<double>(k), m);
            if (v + 1e-9 < prev || v < 1.0 - 1e-9 || v > cap + 1e-9) {
                r.passed = false;
                r.detail = "monotonicity/bounds failed at k=" + std::to_string(k) + " for " +
                           detail::sizes_str(cs);
                return r;
            }
            prev = v;
        }
    }
    r.detail = std::to_string(cases) + " randomized size vectors";
    return r;
}

// Closed form vs Monte-Carlo sampler: |difference| ≤ 5·σ̂_mean. When every
// trial hits every cluster the sample variance is zero, but the closed form
// can still sit a hair below M: a miss probability p < ~1/trials is simply
// unobservable. Zero misses in T trials bounds p at roughly 3/T (the rule of
// three), so the degenerate band falls back to 3·M/trials instead of 5·σ̂.
inline CheckResult check_mc_oracle(std::size_t cases, std::size_t trials, std::uint64_t seed) {
    CheckResult r{"mc-oracle"};
    SplitMix64 rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const ClusterSizes cs = detail::random_sizes(rng, 200, 20);
        const int k = 1 + static_cast<int>(rng.bounded(cs.n));
        const double closed = da_at_k(cs, k);
        const McEstimate mc = da_at_k_mc_stats(cs, k, trials, rng.next());
        const double degenerate = 3.0 * static_cast<double>(cs.sizes.size()) /
                                  static_cast<double>(trials);
        const double tolerance = mc.stderr_mean > 0 ? 5.0 * mc.stderr_mean : degenerate;
        if (std::abs(closed - mc.mean) > tolerance) {
            r.passed = false;
            r.detail = "closed=" + std::to_string(closed) + " mc=" + std::to_string(mc.mean) +
                       " tol=" + std::to_string(tolerance) + " at k=" + std::to_string(k) +
                       " for " + detail::sizes_str(cs);
            return r;
        }
    }
    r.detail = std::to_string(cases) + " cases x " + std::to_string(trials) + " trials";
    return r;
}

// Exhaustive subset enumeration agrees with the closed form (1e-9) for every
// cluster-size partition of every n ≤ max_n and every k.
inline CheckResult check_exhaustive_da(std::size_t max_n = 12) {
    CheckResult r{"exhaustive-da"};
    std::size_t checked = 0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        std::vector<std::vector<std::size_t>> partitions;
        std::vector<std::size_t> current;
        detail::integer_partitions(n, n, current, partitions);
        for (const auto& sizes : partitions) {
            std::vector<std::size_t> cluster_of(n);
            std::size_t at = 0;
            for (std::size_t m = 0; m < sizes.size(); ++m)
                for (std::size_t i = 0; i < sizes[m]; ++i) cluster_of[at++] = m;

            std::vector<long double> sum(n + 1, 0.0L);
            std::vector<std::size_t> count(n + 1, 0);
            for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
                const auto k = static_cast<std::size_t>(std::popcount(mask));
                std::uint32_t clusters_hit = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (mask & (1u << i)) clusters_hit |= 1u << cluster_of[i];
                sum[k] += std::popcount(clusters_hit);
                ++count[k];
            }
            const ClusterSizes cs{n, sizes};
            for (std::size_t k = 1; k <= n; ++k) {
                const double expected = static_cast<double>(sum[k] / count[k]);
                if (std::abs(da_at_k(cs, static_cast<int>(k)) - expected) > 1e-9) {
                    r.passed = false;
                    r.detail = "mismatch at k=" + std::to_string(k) + " for " +
                               detail::sizes_str(cs);
                    return r;
                }
                ++checked;
            }
        }
    }
    r.detail = std::to_string(checked) + " (partition, k) instances with n <= " +
               std::to_string(max_n);
    return r;
}

// Fixed values (independent high-precision entropy), a long-double
// reimplementation on random sizes, bounds, and bitwise permutation
// invariance.
inline CheckResult check_ea(std::size_t cases, std::uint64_t seed) {
    CheckResult r{"ea"};
    if (std::abs(ea({8, {4, 4}}) - 2.0) > 1e-12) {
        r.passed = false;
        r.detail = "sizes [4,4] did not give 2.0";
        return r;
    }
    if (std::abs(ea({4, {3, 1}}) - 1.7547651554579685) > 1e-6) {
        r.passed = false;
        r.detail = "sizes [3,1] off from reference entropy value";
        return r;
    }
    SplitMix64 rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const ClusterSizes cs = detail::random_sizes(rng, 200, 20);
        const double value = ea(cs);
        long double entropy = 0.0L;
        for (const std::size_t s : cs.sizes) {
            const long double p = static_cast<long double>(s) / static_cast<long double>(cs.n);
            entropy -= p * std::log(p);
        }
        const auto reference = static_cast<double>(std::exp(entropy));
        if (std::abs(value - reference) > 1e-9 || value < 1.0 ||
            value > static_cast<double>(cs.sizes.size())) {
            r.passed = false;
            r.detail = "value " + std::to_string(value) + " vs reference " +
                       std::to_string(reference) + " for " + detail::sizes_str(cs);
            return r;
        }
        ClusterSizes shuffled = cs;
        for (std::size_t i = shuffled.sizes.size(); i > 1; --i)
            std::swap(shuffled.sizes[i - 1], shuffled.sizes[rng.bounded(i)]);
        if (ea(shuffled) != value) {  // bitwise: ea sorts internally
            r.passed = false;
            r.detail = "permutation changed ea for " + detail::sizes_str(cs);
            return r;
        }
    }
    r.detail = std::to_string(cases) + " randomized size vectors";
    return r;
}

// Constant-curve identity (exact), the hand-computed trapezoid fixture, and
// range bounds on random curves.
inline CheckResult check_nauadc(std::size_t cases, std::uint64_t seed) {
    CheckResult r{"nauadc"};
    const Curve fixture{{1, 2, 3}, {1.0, 1.6, 1.9}};
    if (std::abs(nauadc(fixture) - 1.525) > 1e-12) {
        r.passed = false;
        r.detail = "fixture [1.0,1.6,1.9] over ks [1,2,3] did not give 1.525";
        return r;
    }
    SplitMix64 rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t len = 2 + rng.bounded(30);
        Curve curve;
        int k = 1;
        const double constant = rng.uniform01() * 25.0 + 1.0;
        for (std::size_t i = 0; i < len; ++i) {
            curve.ks.push_back(k);
            k += 1 + static_cast<int>(rng.bounded(3));
            curve.values.push_back(constant);
        }
        if (nauadc(curve) != constant) {
            r.passed = false;
            r.detail = "constant-curve identity failed at c=" + std::to_string(constant);
            return r;
        }
        Curve random_curve = curve;
        for (auto& v : random_curve.values) v = rng.uniform01() * 25.0;
        const double value = nauadc(random_curve);
        const auto [lo, hi] = std::minmax_element(random_curve.values.begin(),
                                                  random_curve.values.end());
        if (value < *lo || value > *hi) {
            r.passed = false;
            r.detail = "nauadc left the value range";
            return r;
        }
    }
    r.detail = std::to_string(cases) + " constant + random curves";
    return r;
}

// Label-oracle clustering recovers the ground-truth partition for every
// order seed; the degenerate judges give 1 and n clusters.
inline CheckResult check_cluster_fidelity(std::size_t cases, std::size_t order_seeds,
                                          std::uint64_t seed) {
    CheckResult r{"cluster-fidelity"};
    SplitMix64 rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const detail::LabeledSet ls = detail::random_labeled_set(rng, 50, 6);
        const auto truth = detail::partition_of_labels(ls.set, ls.labels);
        LabelOracleJudge judge(ls.labels);
        for (std::size_t s = 0; s < order_seeds; ++s) {
            const std::uint64_t order_seed = s == 0 ? 0 : rng.next();
            const Clustering clustering =
                    cluster_solutions(ls.problem, ls.set, judge, order_seed);
            if (!is_partition_of(clustering, ls.set)) {
                r.passed = false;
                r.detail = "output is not a partition (case " + std::to_string(c) + ")";
                return r;
            }
            if (detail::partition_of_clustering(clustering) != truth) {
                r.passed = false;
                r.detail = "partition differs from ground truth (case " + std::to_string(c) +
                           ", seed " + std::to_string(order_seed) + ")";
                return r;
            }
        }
    }
    r.detail = std::to_string(cases) + " labeled sets x " + std::to_string(order_seeds) +
               " order seeds";
    return r;
}

inline CheckResult check_degenerate_judges(std::uint64_t seed) {
    CheckResult r{"degenerate-judges"};
    SplitMix64 rng(seed);
    for (std::size_t c = 0; c < 25; ++c) {
        const detail::LabeledSet ls = detail::random_labeled_set(rng, 30, 6);
        FixedDecisionJudge same(Decision::Same), different(Decision::Different);
        const auto one = cluster_solutions(ls.problem, ls.set, same, rng.next());
        const auto all = cluster_solutions(ls.problem, ls.set, different, rng.next());
        if (one.clusters.size() != 1 ||
            one.clusters.front().member_ids.size() != ls.set.size()) {
            r.passed = false;
            r.detail = "always-Same judge did not give one full cluster";
            return r;
        }
        if (all.clusters.size() != ls.set.size()) {
            r.passed = false;
            r.detail = "always-Different judge did not give all singletons";
            return r;
        }
    }
    r.detail = "25 random sets, both degenerate judges";
    return r;
}

// Judge-call count equals Σ_j (remaining_j − 1) over the leader rounds.
inline CheckResult check_call_accounting(std::size_t cases, std::uint64_t seed) {
    CheckResult r{"judge-call-accounting"};
    SplitMix64 rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const detail::LabeledSet ls = detail::random_labeled_set(rng, 50, 6);
        LabelOracleJudge oracle(ls.labels);
        CountingJudge counter(oracle);
        const Clustering clustering = cluster_solutions(ls.problem, ls.set, counter, rng.next());
        std::size_t expected = 0;
        std::size_t remaining = ls.set.size();
        for (const auto& cluster : clustering.clusters) {
            expected += remaining - 1;
            remaining -= cluster.member_ids.size();
        }
        if (counter.calls() != expected) {
            r.passed = false;
            r.detail = "counted " + std::to_string(counter.calls()) + " calls, formula says " +
                       std::to_string(expected) + " (case " + std::to_string(c) + ")";
            return r;
        }
    }
    r.detail = std::to_string(cases) + " counted clustering runs";
    return r;
}

// Completion fixtures ending in each instructed decision sentence parse to
// that decision; the never-parseable path forces Different after retries.
inline CheckResult check_decision_parsing() {
    CheckResult r{"decision-parsing"};
    const struct {
        const char* completion;
        RawDecision expected;
    } fixtures[] = {
            {"Both solutions accumulate the running total in a single pass over the input, so "
             "the underlying algorithm is the same.\n"
             "Decision: similar to the previous solution.",
             RawDecision::Same},
            {"The previous solution sorts and scans; this one maintains a heap of candidates "
             "and pops the best repeatedly, a structurally different strategy.\n"
             "Decision: a novel approach.",
             RawDecision::Different},
            {"At first glance one might say Decision: a novel approach.\n"
             "On closer reading both use the identical two-pointer sweep.\n"
             "Decision: similar to the previous solution.",
             RawDecision::Same},
            {"decision: A NOVEL APPROACH!!", RawDecision::Different},
            {"  Decision: similar to the previous solution.   \n", RawDecision::Same},
            {"The solutions look related but I cannot commit to a classification.",
             RawDecision::Unparseable},
            {"Decision: similar to the previous solution, or perhaps a novel approach.",
             RawDecision::Unparseable},
            {"", RawDecision::Unparseable},
    };
    for (const auto& f : fixtures) {
        if (parse_decision(f.completion) != f.expected) {
            r.passed = false;
            r.detail = std::string("misparsed fixture: ") + f.completion;
            return r;
        }
    }

    Problem problem;
    problem.id = "p";
    Solution a{"a", "p", "print(1)\n", Origin::human(), Correctness::Unknown, "", {}, {}};
    Solution b{"b", "p", "print(2)\n", Origin::human(), Correctness::Unknown, "", {}, {}};
    {
        ScriptedCompletionSource source({"no verdict", "still rambling", "nothing again"});
        CompletionJudge judge(source, "scripted", 2);
        const JudgeVerdict v = judge.judge_pair(problem, a, b);
        if (v.decision != Decision::Different ||
            v.parse_status.kind != ParseStatus::ForcedDefault) {
            r.passed = false;
            r.detail = "exhausted retries did not force Different";
            return r;
        }
    }
    {
        ScriptedCompletionSource source(
                {"??", "??", "Decision: similar to the previous solution."});
        CompletionJudge judge(source, "scripted", 2);
        const JudgeVerdict v = judge.judge_pair(problem, a, b);
        if (v.decision != Decision::Same ||
            v.parse_status != ParseStatus::recovered(2)) {
            r.passed = false;
            r.detail = "late parse did not record RecoveredAfterRetry(2)";
            return r;
        }
    }
    r.detail = "8 completion fixtures + retry paths";
    return r;
}

// Fixed identities plus the exhaustive subset oracle for every (n, c, k)
// with n ≤ max_n.
inline CheckResult check_pass_at_k(std::size_t max_n = 12) {
    CheckResult r{"pass-at-k"};
    if (pass_at_k(100, 0, 10) != 0.0 || pass_at_k(100, 100, 1) != 1.0 ||
        std::abs(pass_at_k(5, 2, 3) - 0.9) > 1e-12) {
        r.passed = false;
        r.detail = "fixed pass@k identities failed";
        return r;
    }
    std::size_t checked = 0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        for (std::size_t c = 0; c <= n; ++c) {
            std::vector<long double> hits(n + 1, 0.0L);
            std::vector<std::size_t> total(n + 1, 0);
            for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
                const auto k = static_cast<std::size_t>(std::popcount(mask));
                // the first c elements are the correct ones
                hits[k] += (mask & ((1u << c) - 1u)) != 0 ? 1.0L : 0.0L;
                ++total[k];
            }
            for (std::size_t k = 1; k <= n; ++k) {
                const auto expected = static_cast<double>(hits[k] / total[k]);
                if (std::abs(pass_at_k(n, c, k) - expected) > 1e-12) {
                    r.passed = false;
                    r.detail = "mismatch at n=" + std::to_string(n) + " c=" + std::to_string(c) +
                               " k=" + std::to_string(k);
                    return r;
                }
                ++checked;
            }
        }
    }
    r.detail = std::to_string(checked) + " (n,c,k) instances vs subset enumeration";
    return r;
}

// The full pipeline on the bundled synthetic corpus with the marker oracle
// reproduces metrics computed straight from the ground-truth labels,
// bit-for-bit, and is deterministic across repeated runs.
inline CheckResult check_end_to_end() {
    CheckResult r{"end-to-end-synthetic"};
    const SynthCorpus corpus = make_synthetic_corpus();
    MarkerOracleJudge judge;
    for (std::size_t i = 0; i < corpus.problems.size(); ++i) {
        const Problem& problem = corpus.problems[i];
        const SolutionSet correct = filter_correct(corpus.sets[i]);
        const Clustering clustering = cluster_solutions(problem, correct, judge, 0);

        // Ground truth from the markers directly: sizes in first-appearance
        // order, which with seed 0 is exactly the leader order.
        std::vector<std::string> order;
        std::map<std::string, std::size_t> counts;
        for (const auto& s : correct.solutions) {
            const auto label = MarkerOracleJudge::extract_marker(s.code, "ALGO:");
            if (!counts.count(*label)) order.push_back(*label);
            ++counts[*label];
        }
        ClusterSizes truth;
        truth.n = correct.size();
        for (const auto& label : order) truth.sizes.push_back(counts[label]);

        const ClusterSizes got = cluster_sizes(clustering);
        if (got.n != truth.n || got.sizes != truth.sizes) {
            r.passed = false;
            r.detail = "cluster sizes differ from label truth on " + problem.id;
            return r;
        }
        const DiversityReport via_pipeline =
                make_report(clustering, corpus.sets[i].size(),
                            filter_correct(corpus.sets[i]).size());
        if (via_pipeline.ea != ea(truth) || via_pipeline.nauadc != nauadc(adc(truth)) ||
            via_pipeline.da_curve.values != adc(truth).values) {
            r.passed = false;
            r.detail = "pipeline metrics differ bitwise from label-derived metrics on " +
                       problem.id;
            return r;
        }
        const Clustering again = cluster_solutions(problem, correct, judge, 0);
        if (json(again) != json(clustering)) {
            r.passed = false;
            r.detail = "re-run produced a different clustering on " + problem.id;
            return r;
        }
    }
    r.detail = std::to_string(corpus.problems.size()) + " synthetic problems, oracle pipeline";
    return r;
}

inline std::vector<CheckResult> run_all_checks(const CheckOptions& opt = {}) {
    return {
            check_estimator_identities(opt.estimator_cases, opt.seed),
            check_mc_oracle(opt.oracle_cases, opt.mc_trials, opt.seed + 1),
            check_exhaustive_da(),
            check_ea(opt.ea_cases, opt.seed + 2),
            check_nauadc(opt.nauadc_cases, opt.seed + 3),
            check_cluster_fidelity(opt.cluster_cases, opt.order_seeds, opt.seed + 4),
            check_degenerate_judges(opt.seed + 5),
            check_call_accounting(opt.call_count_cases, opt.seed + 6),
            check_decision_parsing(),
            check_pass_at_k(),
            check_end_to_end(),
    };
}

}  // namespace algodiv
