#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "algodiv/core.hpp"
#include "algodiv/judge.hpp"
#include "algodiv/rng.hpp"

namespace algodiv {

struct Cluster {
    std::string leader_id;
    std::vector<std::string> member_ids;  // leader first, then joiners in visit order
};

inline void to_json(json& j, const Cluster& c) {
    j = json{{"leader_id", c.leader_id}, {"member_ids", c.member_ids}};
}

inline void from_json(const json& j, Cluster& c) {
    j.at("leader_id").get_to(c.leader_id);
    j.at("member_ids").get_to(c.member_ids);
}

// A pair the judge could not process (transport failure etc.) under the
// skip policy; the candidate was treated as Different for that comparison.
struct SkippedPair {
    std::string leader_id;
    std::string candidate_id;
    std::string reason;
};

inline void to_json(json& j, const SkippedPair& p) {
    j = json{{"leader_id", p.leader_id}, {"candidate_id", p.candidate_id}, {"reason", p.reason}};
}

inline void from_json(const json& j, SkippedPair& p) {
    j.at("leader_id").get_to(p.leader_id);
    j.at("candidate_id").get_to(p.candidate_id);
    j.at("reason").get_to(p.reason);
}

// The partition of one solution set, with enough provenance to reproduce it:
// the visit-order seed, the judge, and how often the judge misbehaved.
struct Clustering {
    std::string problem_id;
    std::string set_label;
    std::vector<Cluster> clusters;
    std::uint64_t order_seed = 0;
    std::string judge_id;
    std::string template_version;
    std::size_t forced_default_count = 0;  // verdicts decided by the forced fallback
    std::vector<SkippedPair> skipped_pairs;
};

inline void to_json(json& j, const Clustering& c) {
    j = json{{"problem_id", c.problem_id},
             {"set_label", c.set_label},
             {"clusters", c.clusters},
             {"order_seed", c.order_seed},
             {"judge_id", c.judge_id},
             {"template_version", c.template_version},
             {"forced_default_count", c.forced_default_count},
             {"skipped_pairs", c.skipped_pairs}};
}

inline void from_json(const json& j, Clustering& c) {
    j.at("problem_id").get_to(c.problem_id);
    j.at("set_label").get_to(c.set_label);
    j.at("clusters").get_to(c.clusters);
    j.at("order_seed").get_to(c.order_seed);
    j.at("judge_id").get_to(c.judge_id);
    j.at("template_version").get_to(c.template_version);
    c.forced_default_count = j.value("forced_default_count", std::size_t{0});
    if (j.contains("skipped_pairs")) j.at("skipped_pairs").get_to(c.skipped_pairs);
}

// What to do when the judge fails operationally mid-clustering.
enum class JudgeErrorPolicy {
    Abort,            // rethrow; no partial Clustering
    SkipAsDifferent,  // treat the pair as Different and record it
};

// Greedy leader clustering. Solutions are visited in a seeded permutation of
// the stored order (seed 0 = stored order). Each round pops the first
// remaining solution as a new cluster's leader and compares every remaining
// solution against that leader only — never against other members — moving
// the Same ones into the cluster. Rounds repeat until nothing remains, so the
// clusters partition the set.
//
// The comparison is directional: the leader fills the "previous solution"
// slot. Judge inconsistency (x~y, y~z, x≁z) is not repaired.
inline Clustering cluster_solutions(const Problem& problem, const SolutionSet& set, Judge& judge,
                                    std::uint64_t order_seed = 0,
                                    JudgeErrorPolicy policy = JudgeErrorPolicy::Abort) {
    if (set.empty()) throw std::invalid_argument("cluster_solutions: empty solution set");

    Clustering out;
    out.problem_id = set.problem_id.empty() ? set.solutions.front().problem_id : set.problem_id;
    out.set_label = set.label;
    out.order_seed = order_seed;
    out.judge_id = judge.judge_id();
    out.template_version = judge.template_version();

    std::vector<const Solution*> remaining;
    remaining.reserve(set.size());
    for (const std::size_t i : seeded_permutation(set.size(), order_seed))
        remaining.push_back(&set.solutions[i]);

    while (!remaining.empty()) {
        const Solution* leader = remaining.front();
        Cluster cluster{leader->id, {leader->id}};
        std::vector<const Solution*> next_round;
        next_round.reserve(remaining.size());
        for (std::size_t i = 1; i < remaining.size(); ++i) {
            const Solution* cand = remaining[i];
            Decision d;
            try {
                const JudgeVerdict v = judge.judge_pair(problem, *leader, *cand);
                if (v.parse_status.kind == ParseStatus::ForcedDefault) ++out.forced_default_count;
                d = v.decision;
            } catch (const JudgeError& e) {
                if (policy == JudgeErrorPolicy::Abort) throw;
                out.skipped_pairs.push_back({leader->id, cand->id, e.what()});
                d = Decision::Different;
            }
            if (d == Decision::Same)
                cluster.member_ids.push_back(cand->id);
            else
                next_round.push_back(cand);
        }
        out.clusters.push_back(std::move(cluster));
        remaining = std::move(next_round);
    }
    return out;
}

struct ClusterSizes {
    std::size_t n = 0;                // total solutions N
    std::vector<std::size_t> sizes;   // [s_1 … s_M], cluster order
};

inline ClusterSizes cluster_sizes(const Clustering& clustering) {
    ClusterSizes out;
    out.sizes.reserve(clustering.clusters.size());
    for (const auto& c : clustering.clusters) {
        out.sizes.push_back(c.member_ids.size());
        out.n += c.member_ids.size();
    }
    return out;
}

// Structural check used by tests and the self-check suite: every input id in
// exactly one cluster, no strangers, every cluster led by its first member.
inline bool is_partition_of(const Clustering& clustering, const SolutionSet& set) {
    std::unordered_set<std::string> seen;
    for (const auto& c : clustering.clusters) {
        if (c.member_ids.empty() || c.member_ids.front() != c.leader_id) return false;
        for (const auto& id : c.member_ids)
            if (!seen.insert(id).second) return false;
    }
    if (seen.size() != set.size()) return false;
    for (const auto& s : set.solutions)
        if (!seen.count(s.id)) return false;
    return true;
}

}  // namespace algodiv
