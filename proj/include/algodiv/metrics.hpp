#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "algodiv/cluster.hpp"
#include "algodiv/core.hpp"
#include "algodiv/jsonl.hpp"
#include "algodiv/rng.hpp"

namespace algodiv {

inline constexpr int kDefaultKMax = 25;

// Expected number of distinct clusters represented in a uniform k-subset of
// the n solutions:
//
//   DA@k = Σ_m (1 − C(n−s_m, k) / C(n, k))
//
// The binomial ratio is evaluated as the incremental product
// Π_{i=0}^{k−1} (n−s_m−i)/(n−i) — no factorials are materialized — with the
// convention that the ratio is 0 once k > n−s_m (the subset cannot avoid the
// cluster). For k ≥ n the subset is the whole set, so DA@k saturates at M.
// The result is clamped to the estimator's proven range [1, M] to absorb
// last-ulp rounding in the product sums.
inline double da_at_k(const ClusterSizes& sizes, int k) {
    if (k < 1) throw std::invalid_argument("da_at_k: k must be >= 1");
    if (sizes.sizes.empty() || sizes.n == 0)
        throw std::invalid_argument("da_at_k: empty cluster sizes");
    const double m = static_cast<double>(sizes.sizes.size());
    if (static_cast<std::size_t>(k) >= sizes.n) return m;
    if (k == 1) return 1.0;  // Σ s_m/n, exactly 1 for any partition
    double total = 0.0;
    for (const std::size_t s : sizes.sizes) {
        const std::size_t avail = sizes.n - s;  // solutions outside cluster m
        double ratio = 0.0;
        if (static_cast<std::size_t>(k) <= avail) {
            ratio = 1.0;
            for (int i = 0; i < k; ++i)
                ratio *= static_cast<double>(avail - static_cast<std::size_t>(i)) /
                         static_cast<double>(sizes.n - static_cast<std::size_t>(i));
            ratio = std::clamp(ratio, 0.0, 1.0);
        }
        total += 1.0 - ratio;
    }
    return std::clamp(total, 1.0, m);
}

struct McEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;  // sqrt(sample variance / trials)
    std::size_t trials = 0;
};

// Monte-Carlo oracle for da_at_k: draw uniform k-subsets without replacement
// from a population laid out by cluster, count distinct clusters hit, and
// average. Deliberately independent of the closed form — a partial
// Fisher-Yates draw plus an epoch-stamped distinct counter.
inline McEstimate da_at_k_mc_stats(const ClusterSizes& sizes, int k, std::size_t trials,
                                   std::uint64_t seed) {
    if (sizes.sizes.empty() || sizes.n == 0)
        throw std::invalid_argument("da_at_k_mc: empty cluster sizes");
    if (k < 1 || static_cast<std::size_t>(k) > sizes.n)
        throw std::invalid_argument("da_at_k_mc: need 1 <= k <= n");
    if (trials < 1) throw std::invalid_argument("da_at_k_mc: trials must be >= 1");

    std::vector<std::uint32_t> population;  // population[i] = cluster index
    population.reserve(sizes.n);
    for (std::size_t m = 0; m < sizes.sizes.size(); ++m)
        population.insert(population.end(), sizes.sizes[m], static_cast<std::uint32_t>(m));

    SplitMix64 rng(seed);
    std::vector<std::uint64_t> last_seen(sizes.sizes.size(), 0);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t t = 1; t <= trials; ++t) {
        // Partial Fisher-Yates: after the loop the first k entries are a
        // uniform k-subset. The leftover shuffle state carries into the next
        // trial, which only re-arranges the same multiset — harmless.
        std::size_t distinct = 0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.bounded(sizes.n - i));
            std::swap(population[i], population[j]);
            if (last_seen[population[i]] != t) {
                last_seen[population[i]] = t;
                ++distinct;
            }
        }
        const auto d = static_cast<double>(distinct);
        sum += d;
        sumsq += d * d;
    }
    McEstimate est;
    est.trials = trials;
    est.mean = sum / static_cast<double>(trials);
    const double var =
            std::max(0.0, sumsq / static_cast<double>(trials) - est.mean * est.mean);
    est.stderr_mean = std::sqrt(var / static_cast<double>(trials));
    return est;
}

inline double da_at_k_mc(const ClusterSizes& sizes, int k, std::size_t trials,
                         std::uint64_t seed) {
    return da_at_k_mc_stats(sizes, k, trials, seed).mean;
}

// Effective number of algorithms: exp of the Shannon entropy of the cluster
// distribution p_m = s_m/n. Sizes are summed in sorted order so any
// permutation of the same multiset produces a bit-identical result; the
// value is clamped to the entropy bounds [1, M].
inline double ea(const ClusterSizes& sizes) {
    if (sizes.sizes.empty() || sizes.n == 0) throw std::invalid_argument("ea: empty cluster sizes");
    std::vector<std::size_t> sorted = sizes.sizes;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double n = static_cast<double>(sizes.n);
    double entropy = 0.0;
    for (const std::size_t s : sorted) {
        const double p = static_cast<double>(s) / n;
        entropy -= p * std::log(p);
    }
    return std::clamp(std::exp(entropy), 1.0, static_cast<double>(sorted.size()));
}

// DA@k sampled over an integer grid: the diversity curve reports plot.
struct Curve {
    std::vector<int> ks;          // strictly increasing
    std::vector<double> values;   // same length
};

inline void to_json(json& j, const Curve& c) {
    j = json{{"ks", c.ks}, {"values", c.values}};
}

inline void from_json(const json& j, Curve& c) {
    j.at("ks").get_to(c.ks);
    j.at("values").get_to(c.values);
}

// DA@k over the fixed grid k = 1..k_max, independent of n: past k = n the
// saturation rule fills the tail with M, which keeps areas comparable across
// problems with different solution counts.
inline Curve adc(const ClusterSizes& sizes, int k_max = kDefaultKMax) {
    if (k_max < 2) throw std::invalid_argument("adc: k_max must be >= 2");
    Curve curve;
    curve.ks.reserve(static_cast<std::size_t>(k_max));
    curve.values.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        curve.ks.push_back(k);
        curve.values.push_back(da_at_k(sizes, k));
    }
    return curve;
}

// Trapezoidal area under the curve divided by the grid width, i.e. the
// weighted mean height. Clamped to [min(values), max(values)] — the mean of
// a function lies inside its range, so the normalization identity
// nauadc(constant c) == c holds exactly.
inline double nauadc(const Curve& curve) {
    if (curve.ks.size() < 2 || curve.ks.size() != curve.values.size())
        throw std::invalid_argument("nauadc: need at least 2 curve points");
    for (std::size_t i = 1; i < curve.ks.size(); ++i)
        if (curve.ks[i] <= curve.ks[i - 1])
            throw std::invalid_argument("nauadc: ks must be strictly increasing");
    double area = 0.0;
    for (std::size_t i = 1; i < curve.ks.size(); ++i)
        area += 0.5 * (curve.values[i] + curve.values[i - 1]) *
                static_cast<double>(curve.ks[i] - curve.ks[i - 1]);
    const double width = static_cast<double>(curve.ks.back() - curve.ks.front());
    const auto [lo, hi] = std::minmax_element(curve.values.begin(), curve.values.end());
    return std::clamp(area / width, *lo, *hi);
}

// Unbiased estimator of the probability that at least one of k samples drawn
// without replacement from n_samples is correct: 1 − C(n−c, k)/C(n, k),
// evaluated as an incremental product.
inline double pass_at_k(std::size_t n_samples, std::size_t n_correct, std::size_t k) {
    if (n_correct > n_samples) throw std::invalid_argument("pass_at_k: n_correct > n_samples");
    if (k < 1 || k > n_samples) throw std::invalid_argument("pass_at_k: need 1 <= k <= n_samples");
    if (n_correct == 0) return 0.0;
    if (n_correct > n_samples - k) return 1.0;  // every k-subset hits a correct one
    double ratio = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        ratio *= static_cast<double>(n_samples - n_correct - i) /
                 static_cast<double>(n_samples - i);
    return std::clamp(1.0 - ratio, 0.0, 1.0);
}

// ---- per-problem report ------------------------------------------------------

struct ReportFlags {
    std::size_t forced_default_count = 0;
    std::size_t skipped_pairs = 0;
};

// Everything the tables and plots need for one (problem, set) pair. n and m
// describe the clustered (correct) solutions; pass_at is estimated from the
// full pre-filter sample counts, the way pass@k is defined.
struct DiversityReport {
    std::string problem_id;
    std::string set_label;
    std::size_t n = 0;  // clustered solutions
    std::size_t m = 0;  // clusters
    Curve da_curve;
    double ea = 0.0;
    double nauadc = 0.0;
    std::map<int, double> pass_at;
    std::string judge_id;
    ReportFlags flags;
};

inline void to_json(json& j, const DiversityReport& r) {
    json pass = json::object();
    for (const auto& [k, v] : r.pass_at) pass[std::to_string(k)] = v;
    j = json{{"problem_id", r.problem_id},
             {"set_label", r.set_label},
             {"n", r.n},
             {"m", r.m},
             {"da_curve", r.da_curve},
             {"ea", r.ea},
             {"nauadc", r.nauadc},
             {"pass_at", pass},
             {"judge_id", r.judge_id},
             {"flags",
              {{"forced_default_count", r.flags.forced_default_count},
               {"skipped_pairs", r.flags.skipped_pairs}}}};
}

inline void from_json(const json& j, DiversityReport& r) {
    j.at("problem_id").get_to(r.problem_id);
    j.at("set_label").get_to(r.set_label);
    j.at("n").get_to(r.n);
    j.at("m").get_to(r.m);
    j.at("da_curve").get_to(r.da_curve);
    j.at("ea").get_to(r.ea);
    j.at("nauadc").get_to(r.nauadc);
    r.pass_at.clear();
    for (const auto& [k, v] : j.at("pass_at").items())
        r.pass_at[std::stoi(k)] = v.get<double>();
    j.at("judge_id").get_to(r.judge_id);
    r.flags.forced_default_count = j.at("flags").value("forced_default_count", std::size_t{0});
    r.flags.skipped_pairs = j.at("flags").value("skipped_pairs", std::size_t{0});
}

// Builds the report for one clustering. total_samples/total_correct are the
// pre-filter counts of the originating set; pass@k values whose k exceeds
// total_samples are omitted rather than extrapolated.
inline DiversityReport make_report(const Clustering& clustering, std::size_t total_samples,
                                   std::size_t total_correct,
                                   const std::vector<int>& pass_ks = {1, 10},
                                   int k_max = kDefaultKMax) {
    const ClusterSizes sizes = cluster_sizes(clustering);
    DiversityReport r;
    r.problem_id = clustering.problem_id;
    r.set_label = clustering.set_label;
    r.n = sizes.n;
    r.m = sizes.sizes.size();
    r.da_curve = adc(sizes, k_max);
    r.ea = ea(sizes);
    r.nauadc = nauadc(r.da_curve);
    for (const int k : pass_ks)
        if (k >= 1 && static_cast<std::size_t>(k) <= total_samples)
            r.pass_at[k] = pass_at_k(total_samples, total_correct, static_cast<std::size_t>(k));
    r.judge_id = clustering.judge_id;
    r.flags.forced_default_count = clustering.forced_default_count;
    r.flags.skipped_pairs = clustering.skipped_pairs.size();
    return r;
}

// ---- corpus aggregation ------------------------------------------------------

struct GroupSummary {
    std::string source;
    std::string difficulty;
    std::string set_label;
    std::size_t problems = 0;  // reports contributing to the means
    double mean_ea = 0.0;
    double mean_nauadc = 0.0;
    std::map<int, double> mean_pass_at;
};

struct AggregateResult {
    std::vector<GroupSummary> groups;   // sorted by (source, difficulty, set_label)
    std::size_t excluded_reports = 0;   // reports below min_n
};

// Unweighted per-problem means grouped by (source, difficulty, set_label).
// Reports with fewer than min_n clustered solutions are excluded and tallied;
// a report whose problem is not in the index lands in an unnamed group.
inline AggregateResult aggregate(const std::vector<DiversityReport>& reports,
                                 const std::unordered_map<std::string, const Problem*>& problems,
                                 std::size_t min_n = 1) {
    struct Accum {
        std::size_t count = 0;
        double ea = 0.0, nauadc = 0.0;
        std::map<int, std::pair<double, std::size_t>> pass;  // k -> (sum, count)
    };
    std::map<std::tuple<std::string, std::string, std::string>, Accum> acc;
    AggregateResult out;
    for (const auto& r : reports) {
        if (r.n < min_n) {
            ++out.excluded_reports;
            continue;
        }
        std::string source, difficulty;
        if (const auto it = problems.find(r.problem_id); it != problems.end()) {
            source = it->second->source;
            difficulty = it->second->difficulty;
        }
        Accum& a = acc[{source, difficulty, r.set_label}];
        ++a.count;
        a.ea += r.ea;
        a.nauadc += r.nauadc;
        for (const auto& [k, v] : r.pass_at) {
            a.pass[k].first += v;
            ++a.pass[k].second;
        }
    }
    for (const auto& [key, a] : acc) {
        GroupSummary g;
        std::tie(g.source, g.difficulty, g.set_label) = key;
        g.problems = a.count;
        g.mean_ea = a.ea / static_cast<double>(a.count);
        g.mean_nauadc = a.nauadc / static_cast<double>(a.count);
        for (const auto& [k, sc] : a.pass)
            g.mean_pass_at[k] = sc.first / static_cast<double>(sc.second);
        out.groups.push_back(std::move(g));
    }
    return out;
}

// ---- exports -----------------------------------------------------------------

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

// Long-format curve export for plotting: one row per (report, k).
inline std::string curves_to_csv(const std::vector<DiversityReport>& reports) {
    std::string csv = "k,value,problem_id,set_label\n";
    char buf[64];
    for (const auto& r : reports) {
        for (std::size_t i = 0; i < r.da_curve.ks.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,", r.da_curve.ks[i], r.da_curve.values[i]);
            csv += buf;
            csv += detail::csv_field(r.problem_id);
            csv += ',';
            csv += detail::csv_field(r.set_label);
            csv += '\n';
        }
    }
    return csv;
}

inline void write_curves_csv(const std::string& path,
                             const std::vector<DiversityReport>& reports) {
    write_text_atomic(path, curves_to_csv(reports));
}

}  // namespace algodiv
