// algodiv — pipeline driver: sample solutions, verify them, cluster by
// algorithmic equivalence, and report diversity metrics.

#include <atomic>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <algodiv/algodiv.hpp>

using namespace algodiv;

namespace {

std::string sanitize_filename(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s)
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'
                       ? c
                       : '_';
    return out;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : s) {
        if (c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

template <typename Fn>
void parallel_indices(std::size_t count, int parallelism, Fn fn) {
    if (count == 0) return;
    const int workers = std::clamp(parallelism, 1, static_cast<int>(count));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mu;
    std::exception_ptr first;
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first) first = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

// ---- shared option bundles -----------------------------------------------

struct CorpusArgs {
    std::string problems_path;
    std::vector<std::string> solution_specs;
    std::string label_filter;
    bool allow_violations = false;
};

void add_corpus_options(CLI::App* cmd, CorpusArgs& args, bool solutions_required = true) {
    cmd->add_option("--problems", args.problems_path, "problems.jsonl")
            ->required()
            ->check(CLI::ExistingFile);
    auto* opt = cmd->add_option("--solutions", args.solution_specs,
                                "solutions.jsonl, optionally label=path (repeatable)");
    if (solutions_required) opt->required();
    cmd->add_option("--label", args.label_filter, "process only sets with this label");
    cmd->add_flag("--allow-violations", args.allow_violations,
                  "continue despite corpus integrity violations");
}

LoadedCorpus load_for(const CorpusArgs& args) {
    std::vector<SolutionsFileSpec> specs;
    specs.reserve(args.solution_specs.size());
    for (const auto& raw : args.solution_specs) specs.push_back(SolutionsFileSpec::parse(raw));
    LoadedCorpus corpus = load_corpus(args.problems_path, specs);
    for (const auto& v : corpus.violations)
        std::cerr << "warning: " << v.code << " (" << v.subject << "): " << v.message << "\n";
    if (!corpus.violations.empty() && !args.allow_violations)
        throw std::runtime_error("corpus failed validation with " +
                                 std::to_string(corpus.violations.size()) +
                                 " violation(s); fix the inputs or pass --allow-violations");
    if (!args.label_filter.empty()) {
        std::erase_if(corpus.sets, [&](const SolutionSet& s) {
            return s.label != args.label_filter;
        });
        if (corpus.sets.empty())
            throw std::runtime_error("no solution set has label '" + args.label_filter + "'");
    }
    if (corpus.sets.empty()) std::cerr << "warning: no solution sets loaded\n";
    return corpus;
}

struct JudgeArgs {
    std::string oracle;  // marker[:PREFIX] | always-same | always-different
    std::string endpoint;
    std::string model = "meta-llama/Llama-3.1-8B-Instruct";
    std::string cache_path;
    std::string on_error = "abort";
    int max_retries = 2;
    int timeout_ms = 60000;
    int concurrency = 4;
    std::size_t request_cap = 0;
    double temperature = 0.0;  // greedy decoding for reproducibility
    double top_p = 1.0;
    int max_tokens = 1024;
};

void add_judge_options(CLI::App* cmd, JudgeArgs& args) {
    cmd->add_option("--judge", args.oracle,
                    "oracle judge: marker[:PREFIX] | always-same | always-different");
    cmd->add_option("--judge-endpoint", args.endpoint,
                    "chat-completions endpoint URL for the LLM judge");
    cmd->add_option("--judge-model", args.model, "judge model name")->capture_default_str();
    cmd->add_option("--cache", args.cache_path, "verdict cache file (verdicts.jsonl)");
    cmd->add_option("--on-judge-error", args.on_error,
                    "judge transport failure handling: skip treats the pair as Different "
                    "and records it; abort stops the run")
            ->check(CLI::IsMember({"skip", "abort"}))
            ->capture_default_str();
    cmd->add_option("--judge-max-retries", args.max_retries,
                    "re-asks per unparseable completion")
            ->capture_default_str();
    cmd->add_option("--judge-timeout-ms", args.timeout_ms, "per-request timeout")
            ->capture_default_str();
    cmd->add_option("--concurrency", args.concurrency, "max in-flight judge requests")
            ->capture_default_str();
    cmd->add_option("--request-cap", args.request_cap,
                    "hard budget on total HTTP requests (0 = unlimited)");
    cmd->add_option("--judge-temperature", args.temperature, "judge sampling temperature")
            ->capture_default_str();
}

// Owns whichever pieces the judge selection needs; top() is what gets used.
struct JudgeStack {
    std::unique_ptr<ChatClient> client;
    std::unique_ptr<CompletionSource> source;
    std::unique_ptr<Judge> base;
    std::unique_ptr<VerdictCache> cache;
    std::unique_ptr<Judge> cached;

    Judge& top() { return cached ? *cached : *base; }
};

JudgeStack make_judge(const JudgeArgs& args) {
    JudgeStack stack;
    if (!args.endpoint.empty() && !args.oracle.empty())
        throw std::runtime_error("--judge and --judge-endpoint are mutually exclusive");
    if (!args.endpoint.empty()) {
        ChatOptions opt;
        opt.endpoint_url = args.endpoint;
        opt.request_timeout_ms = args.timeout_ms;
        opt.concurrency_limit = args.concurrency;
        opt.request_cap = args.request_cap;
        stack.client = std::make_unique<ChatClient>(opt);
        stack.source = std::make_unique<HttpCompletionSource>(
                *stack.client, args.model, args.temperature, args.top_p, args.max_tokens);
        stack.base = std::make_unique<CompletionJudge>(*stack.source, args.model,
                                                       args.max_retries);
    } else if (args.oracle == "always-same") {
        stack.base = std::make_unique<FixedDecisionJudge>(Decision::Same);
    } else if (args.oracle == "always-different") {
        stack.base = std::make_unique<FixedDecisionJudge>(Decision::Different);
    } else if (args.oracle == "marker" || args.oracle.rfind("marker:", 0) == 0) {
        const std::string prefix =
                args.oracle == "marker" ? "ALGO:" : args.oracle.substr(7);
        stack.base = std::make_unique<MarkerOracleJudge>(prefix);
    } else if (args.oracle.empty()) {
        throw std::runtime_error("pick a judge: --judge-endpoint URL or --judge "
                                 "marker[:PREFIX]|always-same|always-different");
    } else {
        throw std::runtime_error("unknown --judge '" + args.oracle + "'");
    }
    if (!args.cache_path.empty()) {
        stack.cache = std::make_unique<VerdictCache>(args.cache_path);
        stack.cached = std::make_unique<CachedJudge>(*stack.base, *stack.cache);
    }
    return stack;
}

JudgeErrorPolicy policy_of(const JudgeArgs& args) {
    return args.on_error == "skip" ? JudgeErrorPolicy::SkipAsDifferent
                                   : JudgeErrorPolicy::Abort;
}

// Drops non-Pass members when correct_only is set; empty results are skipped
// with a warning so downstream stages always see nonempty sets.
std::vector<SolutionSet> select_sets(const LoadedCorpus& corpus, bool correct_only) {
    std::vector<SolutionSet> out;
    for (const auto& set : corpus.sets) {
        SolutionSet chosen = correct_only ? filter_correct(set) : set;
        if (chosen.empty()) {
            std::cerr << "warning: set '" << set.label << "' for problem '" << set.problem_id
                      << "' has no " << (correct_only ? "correct " : "")
                      << "solutions; skipped\n";
            continue;
        }
        out.push_back(std::move(chosen));
    }
    return out;
}

// ---- subcommands -----------------------------------------------------------

int cmd_synth(const std::string& out_dir, const SynthConfig& cfg) {
    const SynthCorpus corpus = make_synthetic_corpus(cfg);
    std::vector<Solution> flat;
    for (const auto& set : corpus.sets)
        flat.insert(flat.end(), set.solutions.begin(), set.solutions.end());
    const auto dir = std::filesystem::path(out_dir);
    write_objects_jsonl((dir / "problems.jsonl").string(), corpus.problems);
    write_objects_jsonl((dir / "solutions.jsonl").string(), flat);
    std::cout << "wrote " << corpus.problems.size() << " problems and " << flat.size()
              << " solutions to " << dir.string() << "\n";
    return 0;
}

int cmd_validate(const CheckOptions& opt) {
    const auto results = run_all_checks(opt);
    std::size_t failures = 0;
    for (const auto& r : results) {
        if (r.passed) {
            std::cout << "ok   " << r.name << " — " << r.detail << "\n";
        } else {
            ++failures;
            std::cout << "FAIL " << r.name << " — " << r.detail << "\n";
        }
    }
    std::cout << (results.size() - failures) << "/" << results.size()
              << " check suites passed (seed " << opt.seed << ")\n";
    if (failures > 0)
        throw std::runtime_error(std::to_string(failures) + " self-check suite(s) failed");
    return 0;
}

struct ExecArgs {
    CorpusArgs corpus;
    std::string interpreter = "python3 {file}";
    int timeout_ms = 10000;
    std::size_t output_cap = 1 << 20;
    std::string normalization = "trim";
    std::string file_suffix = ".py";
    int parallelism = 4;
    std::string out = "solutions_verified.jsonl";
    std::string audit;
};

int cmd_exec(const ExecArgs& args) {
    const LoadedCorpus corpus = load_for(args.corpus);
    const auto index = problem_index(corpus.problems);
    ExecConfig cfg;
    cfg.interpreter_cmd = split_ws(args.interpreter);
    if (cfg.interpreter_cmd.empty()) throw std::runtime_error("empty --interpreter");
    cfg.timeout_ms = args.timeout_ms;
    cfg.output_cap = args.output_cap;
    cfg.normalization = args.normalization == "exact" ? OutputNormalization::ExactBytes
                                                      : OutputNormalization::TrimTrailing;
    cfg.file_suffix = args.file_suffix;

    std::vector<Solution> flat;
    std::vector<ExecRecord> all_records;
    std::size_t passed = 0, failed = 0, unknown = 0;
    for (const auto& set : corpus.sets) {
        std::vector<ExecRecord> records;
        const SolutionSet verified = verify_set(set, index, cfg, args.parallelism, &records);
        for (const auto& s : verified.solutions) {
            if (s.correctness == Correctness::Pass) ++passed;
            else if (s.correctness == Correctness::Fail) ++failed;
            else ++unknown;
            flat.push_back(s);
        }
        all_records.insert(all_records.end(), records.begin(), records.end());
    }
    write_objects_jsonl(args.out, flat);
    if (!args.audit.empty()) write_objects_jsonl(args.audit, all_records);
    std::cout << "verified " << flat.size() << " solutions: " << passed << " pass, " << failed
              << " fail, " << unknown << " unknown -> " << args.out << "\n";
    return 0;
}

struct ClusterArgs {
    CorpusArgs corpus;
    JudgeArgs judge;
    std::uint64_t order_seed = 0;
    bool correct_only = true;
    int parallelism = 4;
    std::string out = "clusterings.jsonl";
};

std::vector<Clustering> run_clusterings(const ClusterArgs& args, JudgeStack& stack) {
    const LoadedCorpus corpus = load_for(args.corpus);
    const auto index = problem_index(corpus.problems);
    const std::vector<SolutionSet> sets = select_sets(corpus, args.correct_only);
    std::vector<Clustering> clusterings(sets.size());
    const JudgeErrorPolicy policy = policy_of(args.judge);
    // An LLM judge parallelizes across sets (transport-bound); a single
    // clustering is sequential by construction.
    parallel_indices(sets.size(), args.parallelism, [&](std::size_t i) {
        const auto it = index.find(sets[i].problem_id);
        if (it == index.end())
            throw std::runtime_error("set '" + sets[i].label + "' references unknown problem '" +
                                     sets[i].problem_id + "'");
        clusterings[i] =
                cluster_solutions(*it->second, sets[i], stack.top(), args.order_seed, policy);
    });
    return clusterings;
}

int cmd_cluster(const ClusterArgs& args) {
    JudgeStack stack = make_judge(args.judge);
    const std::vector<Clustering> clusterings = run_clusterings(args, stack);
    write_objects_jsonl(args.out, clusterings);
    std::size_t forced = 0, skipped = 0;
    for (const auto& c : clusterings) {
        forced += c.forced_default_count;
        skipped += c.skipped_pairs.size();
    }
    std::cout << "wrote " << clusterings.size() << " clusterings (order seed "
              << args.order_seed << ") -> " << args.out << "\n";
    if (forced || skipped)
        std::cerr << "warning: " << forced << " forced-default verdicts, " << skipped
                  << " skipped pairs\n";
    return 0;
}

int cmd_judge(const ClusterArgs& args) {
    if (args.judge.cache_path.empty())
        throw std::runtime_error("judge: --cache is required (pre-warming writes the cache)");
    JudgeStack stack = make_judge(args.judge);
    const std::size_t before = stack.cache->size();
    const std::vector<Clustering> clusterings = run_clusterings(args, stack);
    std::size_t pairs = 0;
    for (const auto& c : clusterings) {
        std::size_t remaining = 0;
        for (const auto& cl : c.clusters) remaining += cl.member_ids.size();
        for (const auto& cl : c.clusters) {
            pairs += remaining - 1;
            remaining -= cl.member_ids.size();
        }
    }
    std::cout << "judged " << pairs << " pairs; cache " << before << " -> "
              << stack.cache->size() << " verdicts at " << args.judge.cache_path << "\n";
    return 0;
}

struct MetricsArgs {
    CorpusArgs corpus;
    std::string clusterings_path;
    int kmax = kDefaultKMax;
    std::vector<int> pass_ks = {1, 10};
    std::string out = "reports.jsonl";
    std::string curves = "curves.csv";
};

int cmd_metrics(const MetricsArgs& args) {
    const LoadedCorpus corpus = load_for(args.corpus);
    const auto clusterings = read_jsonl_as<Clustering>(args.clusterings_path);
    std::map<std::pair<std::string, std::string>, const SolutionSet*> sets;
    for (const auto& s : corpus.sets) sets[{s.problem_id, s.label}] = &s;

    // A clustering of "X:correct" draws its pass@k sample counts from the
    // unfiltered set "X".
    const auto originating_set = [&](const Clustering& c) -> const SolutionSet* {
        if (const auto it = sets.find({c.problem_id, c.set_label}); it != sets.end())
            return it->second;
        static const std::string suffix = ":correct";
        if (c.set_label.size() > suffix.size() &&
            c.set_label.compare(c.set_label.size() - suffix.size(), suffix.size(), suffix) == 0) {
            const std::string base = c.set_label.substr(0, c.set_label.size() - suffix.size());
            if (const auto it = sets.find({c.problem_id, base}); it != sets.end())
                return it->second;
        }
        return nullptr;
    };

    std::vector<DiversityReport> reports;
    reports.reserve(clusterings.size());
    for (const auto& c : clusterings) {
        const SolutionSet* origin = originating_set(c);
        if (!origin)
            throw std::runtime_error("no loaded set matches clustering (" + c.problem_id + ", " +
                                     c.set_label + "); pass the same --solutions used for "
                                     "clustering");
        std::size_t correct = 0;
        for (const auto& s : origin->solutions)
            if (s.correctness == Correctness::Pass) ++correct;
        reports.push_back(make_report(c, origin->size(), correct, args.pass_ks, args.kmax));
    }
    write_objects_jsonl(args.out, reports);
    if (!args.curves.empty()) write_curves_csv(args.curves, reports);
    std::cout << "wrote " << reports.size() << " reports -> " << args.out;
    if (!args.curves.empty()) std::cout << " and curves -> " << args.curves;
    std::cout << "\n";
    return 0;
}

struct MergeArgs {
    CorpusArgs corpus;
    bool dedupe = false;
    std::string out = "solutions_merged.jsonl";
};

int cmd_merge(const MergeArgs& args) {
    // Cross-file id collisions are merge's normal input (the same solution
    // shipped under two labels), so load-time violations only warn here;
    // merge_sets still rejects duplicates that survive into one merged set.
    CorpusArgs tolerant = args.corpus;
    tolerant.allow_violations = true;
    const LoadedCorpus corpus = load_for(tolerant);
    // Group the loaded sets by problem, keeping first-appearance order of
    // both problems and labels.
    std::vector<std::string> problem_order;
    std::map<std::string, std::vector<const SolutionSet*>> by_problem;
    for (const auto& s : corpus.sets) {
        if (!by_problem.count(s.problem_id)) problem_order.push_back(s.problem_id);
        by_problem[s.problem_id].push_back(&s);
    }
    std::vector<Solution> flat;
    std::size_t dropped = 0;
    std::string label;
    for (const auto& pid : problem_order) {
        std::vector<SolutionSet> group;
        group.reserve(by_problem[pid].size());
        for (const auto* s : by_problem[pid]) group.push_back(*s);
        MergeResult merged = merge_sets(group, args.dedupe);
        dropped += merged.duplicates_dropped;
        label = merged.set.label;
        for (auto& sol : merged.set.solutions) flat.push_back(std::move(sol));
    }
    write_objects_jsonl(args.out, flat);
    std::cout << "merged " << corpus.sets.size() << " sets over " << problem_order.size()
              << " problems under label '" << label << "' -> " << args.out << "\n";
    if (args.dedupe) std::cout << "dropped " << dropped << " byte-identical duplicates\n";
    std::cout << "load it with --solutions '" << label << "=" << args.out << "'\n";
    return 0;
}

struct ReportArgs {
    std::string reports_path;
    std::string problems_path;
    std::size_t min_n = 1;
    std::string format = "text";
    std::string out = "-";
};

std::string format_report_table(const AggregateResult& agg, const std::vector<int>& pass_ks,
                                bool csv) {
    std::string out;
    const auto cell = [&](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        return std::string(buf);
    };
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"source", "difficulty", "set_label", "problems"};
    for (const int k : pass_ks) header.push_back("pass@" + std::to_string(k));
    header.push_back("ea");
    header.push_back("nauadc");
    rows.push_back(header);
    for (const auto& g : agg.groups) {
        std::vector<std::string> row = {g.source.empty() ? "-" : g.source,
                                        g.difficulty.empty() ? "-" : g.difficulty, g.set_label,
                                        std::to_string(g.problems)};
        for (const int k : pass_ks) {
            const auto it = g.mean_pass_at.find(k);
            row.push_back(it == g.mean_pass_at.end() ? "-" : cell(it->second));
        }
        row.push_back(cell(g.mean_ea));
        row.push_back(cell(g.mean_nauadc));
        rows.push_back(std::move(row));
    }
    if (csv) {
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ',';
                out += row[i];
            }
            out += '\n';
        }
        return out;
    }
    std::vector<std::size_t> widths(rows.front().size(), 0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += row[i];
            if (i + 1 < row.size()) out += std::string(widths[i] - row[i].size() + 2, ' ');
        }
        out += '\n';
    }
    return out;
}

int cmd_report(const ReportArgs& args) {
    const auto reports = read_jsonl_as<DiversityReport>(args.reports_path);
    std::vector<Problem> problems;
    if (!args.problems_path.empty()) problems = read_jsonl_as<Problem>(args.problems_path);
    const auto index = problem_index(problems);
    const AggregateResult agg = aggregate(reports, index, args.min_n);
    std::set<int> ks;
    for (const auto& g : agg.groups)
        for (const auto& [k, _] : g.mean_pass_at) ks.insert(k);
    const std::string table = format_report_table(agg, {ks.begin(), ks.end()},
                                                  args.format == "csv");
    if (args.out == "-") {
        std::cout << table;
    } else {
        write_text_atomic(args.out, table);
        std::cout << "wrote report table -> " << args.out << "\n";
    }
    if (agg.excluded_reports > 0)
        std::cerr << "note: " << agg.excluded_reports << " report(s) below --min-n "
                  << args.min_n << " excluded\n";
    return 0;
}

struct SampleArgs {
    std::string problems_path;
    std::string endpoint;
    std::string model;
    int n = 1;
    double temperature = 1.0;
    double top_p = 0.95;
    int max_tokens = 1024;
    bool sweep = false;
    std::vector<double> temps;
    std::string out = "completions.jsonl";
    std::string out_dir = ".";
    std::string solutions_out;
    int concurrency = 4;
    std::size_t request_cap = 0;
    int timeout_ms = 120000;
};

int cmd_sample(const SampleArgs& args) {
    const auto problems = read_jsonl_as<Problem>(args.problems_path);
    if (problems.empty()) throw std::runtime_error("no problems in " + args.problems_path);
    ChatOptions copt;
    copt.endpoint_url = args.endpoint;
    copt.concurrency_limit = args.concurrency;
    copt.request_cap = args.request_cap;
    copt.request_timeout_ms = args.timeout_ms;
    ChatClient client(copt);
    GenConfig cfg;
    cfg.endpoint_url = args.endpoint;
    cfg.model_name = args.model;
    cfg.n_samples = args.n;
    cfg.temperature = args.temperature;
    cfg.top_p = args.top_p;
    cfg.max_tokens = args.max_tokens;

    if (args.sweep || !args.temps.empty()) {
        const std::vector<double>& temps = args.temps.empty() ? kDefaultSweepGrid : args.temps;
        const auto dir = std::filesystem::path(args.out_dir);
        std::filesystem::create_directories(dir);
        std::map<std::string, std::ofstream> streams;  // label -> completions stream
        const auto batches = temperature_sweep(
                problems, temps, cfg, client,
                [&](const std::string& label, const RawCompletion& c) {
                    auto& stream = streams[label];
                    if (!stream.is_open())
                        stream.open(dir / ("completions_" + sanitize_filename(label) + ".jsonl"),
                                    std::ios::binary | std::ios::trunc);
                    stream << json(c).dump() << '\n';
                    stream.flush();  // partial batches must survive a crash
                });
        for (const auto& batch : batches) {
            const ExtractionResult extracted = completions_to_solutions(batch.completions);
            const auto path =
                    dir / ("solutions_" + sanitize_filename(batch.label) + ".jsonl");
            write_objects_jsonl(path.string(), extracted.solutions);
            std::cout << "T=" << format_temperature(batch.temperature) << ": "
                      << extracted.solutions.size() << " solutions (" << extracted.dropped
                      << " without a code block) -> " << path.string() << "\n";
        }
        return 0;
    }

    std::ofstream stream(args.out, std::ios::binary | std::ios::trunc);
    if (!stream) throw std::runtime_error("cannot open " + args.out);
    std::vector<RawCompletion> all;
    for (const auto& problem : problems) {
        const auto batch =
                sample_solutions(problem, cfg, client, [&](const RawCompletion& c) {
                    stream << json(c).dump() << '\n';
                    stream.flush();
                });
        all.insert(all.end(), batch.begin(), batch.end());
    }
    std::cout << "sampled " << all.size() << " completions -> " << args.out << "\n";
    if (!args.solutions_out.empty()) {
        const ExtractionResult extracted = completions_to_solutions(all);
        write_objects_jsonl(args.solutions_out, extracted.solutions);
        std::cout << "extracted " << extracted.solutions.size() << " solutions ("
                  << extracted.dropped << " dropped) -> " << args.solutions_out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"algodiv — algorithmic diversity of code solution sets"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; flags override it");

    // synth
    auto* synth = app.add_subcommand("synth", "generate the bundled synthetic corpus");
    std::string synth_dir = "data/synthetic";
    SynthConfig synth_cfg;
    synth->add_option("--out-dir", synth_dir, "output directory")->capture_default_str();
    synth->add_option("--problems-n", synth_cfg.problems, "number of problems")
            ->capture_default_str();
    synth->add_option("--per-problem", synth_cfg.per_problem, "solutions per problem")
            ->capture_default_str();
    synth->add_option("--families", synth_cfg.families, "algorithm families")
            ->capture_default_str();
    synth->add_option("--seed", synth_cfg.seed, "corpus seed")->capture_default_str();
    synth->callback([&] { cmd_synth(synth_dir, synth_cfg); });

    // validate
    auto* validate = app.add_subcommand(
            "validate", "run the estimator/oracle/property self-check suites");
    CheckOptions check_opt;
    validate->add_option("--seed", check_opt.seed, "randomization seed")->capture_default_str();
    validate->add_option("--mc-trials", check_opt.mc_trials, "Monte-Carlo trials per case")
            ->capture_default_str();
    validate->add_option("--oracle-cases", check_opt.oracle_cases, "Monte-Carlo oracle cases")
            ->capture_default_str();
    validate->callback([&] { cmd_validate(check_opt); });

    // exec
    auto* exec_cmd = app.add_subcommand("exec", "verify correctness by running the tests");
    ExecArgs exec_args;
    add_corpus_options(exec_cmd, exec_args.corpus);
    exec_cmd->add_option("--interpreter", exec_args.interpreter,
                         "interpreter command; {file} is the solution path")
            ->capture_default_str();
    exec_cmd->add_option("--timeout-ms", exec_args.timeout_ms, "per-test timeout")
            ->capture_default_str();
    exec_cmd->add_option("--output-cap", exec_args.output_cap, "captured bytes per stream")
            ->capture_default_str();
    exec_cmd->add_option("--normalization", exec_args.normalization,
                         "output comparison: trim | exact")
            ->check(CLI::IsMember({"trim", "exact"}))
            ->capture_default_str();
    exec_cmd->add_option("--file-suffix", exec_args.file_suffix, "solution file suffix")
            ->capture_default_str();
    exec_cmd->add_option("--parallelism", exec_args.parallelism, "concurrent solutions")
            ->capture_default_str();
    exec_cmd->add_option("--out", exec_args.out, "verified solutions output")
            ->capture_default_str();
    exec_cmd->add_option("--audit", exec_args.audit, "exec_results.jsonl audit log");
    exec_cmd->callback([&] { cmd_exec(exec_args); });

    // cluster
    auto* cluster = app.add_subcommand("cluster", "partition each set by algorithmic "
                                                  "equivalence (greedy leader pass)");
    ClusterArgs cluster_args;
    add_corpus_options(cluster, cluster_args.corpus);
    add_judge_options(cluster, cluster_args.judge);
    cluster->add_option("--order-seed", cluster_args.order_seed,
                        "visit-order seed; 0 = stored order")
            ->capture_default_str();
    cluster->add_flag("!--include-incorrect", cluster_args.correct_only,
                      "also cluster non-passing solutions");
    cluster->add_option("--parallelism", cluster_args.parallelism, "concurrent sets")
            ->capture_default_str();
    cluster->add_option("--out", cluster_args.out, "clusterings output")->capture_default_str();
    cluster->callback([&] { cmd_cluster(cluster_args); });

    // judge (cache pre-warm)
    auto* judge = app.add_subcommand("judge", "pre-warm the verdict cache for a corpus");
    ClusterArgs judge_args;
    add_corpus_options(judge, judge_args.corpus);
    add_judge_options(judge, judge_args.judge);
    judge->add_option("--order-seed", judge_args.order_seed,
                      "visit-order seed; 0 = stored order")
            ->capture_default_str();
    judge->add_flag("!--include-incorrect", judge_args.correct_only,
                    "also judge non-passing solutions");
    judge->add_option("--parallelism", judge_args.parallelism, "concurrent sets")
            ->capture_default_str();
    judge->callback([&] { cmd_judge(judge_args); });

    // metrics
    auto* metrics = app.add_subcommand("metrics",
                                       "per-problem diversity reports from clusterings");
    MetricsArgs metrics_args;
    add_corpus_options(metrics, metrics_args.corpus);
    metrics->add_option("--clusterings", metrics_args.clusterings_path, "clusterings.jsonl")
            ->required()
            ->check(CLI::ExistingFile);
    metrics->add_option("--kmax", metrics_args.kmax, "diversity-curve grid 1..kmax")
            ->capture_default_str();
    metrics->add_option("--pass-k", metrics_args.pass_ks, "pass@k values to report")
            ->delimiter(',')
            ->capture_default_str();
    metrics->add_option("--out", metrics_args.out, "reports output")->capture_default_str();
    metrics->add_option("--curves", metrics_args.curves,
                        "curve CSV output (empty string disables)")
            ->capture_default_str();
    metrics->callback([&] { cmd_metrics(metrics_args); });

    // merge
    auto* merge = app.add_subcommand("merge", "concatenate per-problem sets across labels");
    MergeArgs merge_args;
    add_corpus_options(merge, merge_args.corpus);
    merge->add_flag("--dedupe", merge_args.dedupe, "drop byte-identical code duplicates");
    merge->add_option("--out", merge_args.out, "merged solutions output")->capture_default_str();
    merge->callback([&] { cmd_merge(merge_args); });

    // report
    auto* report = app.add_subcommand("report", "aggregate reports into a summary table");
    ReportArgs report_args;
    report->add_option("--reports", report_args.reports_path, "reports.jsonl")
            ->required()
            ->check(CLI::ExistingFile);
    report->add_option("--problems", report_args.problems_path,
                       "problems.jsonl (supplies source/difficulty grouping)")
            ->check(CLI::ExistingFile);
    report->add_option("--min-n", report_args.min_n,
                       "exclude problems with fewer clustered solutions")
            ->capture_default_str();
    report->add_option("--format", report_args.format, "text | csv")
            ->check(CLI::IsMember({"text", "csv"}))
            ->capture_default_str();
    report->add_option("--out", report_args.out, "output file, - for stdout")
            ->capture_default_str();
    report->callback([&] { cmd_report(report_args); });

    // sample
    auto* sample = app.add_subcommand("sample", "sample solutions from a model endpoint");
    SampleArgs sample_args;
    sample->add_option("--problems", sample_args.problems_path, "problems.jsonl")
            ->required()
            ->check(CLI::ExistingFile);
    sample->add_option("--endpoint", sample_args.endpoint, "chat-completions endpoint URL")
            ->required();
    sample->add_option("--model", sample_args.model, "model name")->required();
    sample->add_option("--n", sample_args.n, "samples per problem")->capture_default_str();
    sample->add_option("--temperature", sample_args.temperature, "sampling temperature")
            ->capture_default_str();
    sample->add_option("--top-p", sample_args.top_p, "nucleus sampling mass")
            ->capture_default_str();
    sample->add_option("--max-tokens", sample_args.max_tokens, "completion token budget")
            ->capture_default_str();
    sample->add_flag("--sweep", sample_args.sweep,
                     "temperature sweep over the default grid 0.2..1.4 step 0.2");
    sample->add_option("--temps", sample_args.temps, "explicit sweep temperatures")
            ->delimiter(',');
    sample->add_option("--out", sample_args.out, "completions output (single-temperature mode)")
            ->capture_default_str();
    sample->add_option("--out-dir", sample_args.out_dir, "sweep output directory")
            ->capture_default_str();
    sample->add_option("--solutions-out", sample_args.solutions_out,
                       "also extract code into this solutions file");
    sample->add_option("--concurrency", sample_args.concurrency, "max in-flight requests")
            ->capture_default_str();
    sample->add_option("--request-cap", sample_args.request_cap,
                       "hard budget on total HTTP requests (0 = unlimited)");
    sample->add_option("--timeout-ms", sample_args.timeout_ms, "per-request timeout")
            ->capture_default_str();
    sample->callback([&] { cmd_sample(sample_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
