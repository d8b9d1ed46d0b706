#pragma once

#include <cstdio>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "algodiv/chat.hpp"
#include "algodiv/core.hpp"
#include "algodiv/ingest.hpp"

namespace algodiv {

struct GenConfig {
    std::string endpoint_url;
    std::string model_name;
    int n_samples = 1;  // per problem; deliberately small so cost is opt-in
    double temperature = 1.0;
    double top_p = 0.95;
    int max_tokens = 1024;
    bool stop_on_eos = true;  // rely on the endpoint's end-of-sequence handling
};

// Unlike the judging prompt, the generation prompt carries no protocol
// constraints; this minimal instruction exists only to make completions land
// in a single extractable fenced block.
inline constexpr std::string_view kGenInstruction =
        "Solve the following programming problem. Reply with exactly one fenced code block "
        "containing a complete program that reads from standard input and writes the answer "
        "to standard output.";

inline std::string build_gen_prompt(const Problem& problem) {
    std::string prompt(kGenInstruction);
    prompt += "\n\n";
    prompt += problem.statement;
    return prompt;
}

// Draws config.n_samples completions for one problem, recording the sampling
// parameters in gen_meta. on_completion (when given) fires as each completion
// arrives, so callers can persist partial batches before a later transport
// failure; such a failure surfaces as a runtime_error naming the problem.
inline std::vector<RawCompletion> sample_solutions(
        const Problem& problem, const GenConfig& config, ChatClient& client,
        const std::function<void(const RawCompletion&)>& on_completion = {}) {
    if (config.n_samples < 1)
        throw std::invalid_argument("sample_solutions: n_samples must be >= 1");
    if (config.temperature < 0.0)
        throw std::invalid_argument("sample_solutions: temperature must be >= 0");
    const std::string prompt = build_gen_prompt(problem);
    std::vector<RawCompletion> out;
    out.reserve(static_cast<std::size_t>(config.n_samples));
    for (int i = 0; i < config.n_samples; ++i) {
        std::string text;
        try {
            text = client.complete(config.model_name, prompt, config.temperature, config.top_p,
                                   config.max_tokens);
        } catch (const RequestCapExceeded&) {
            throw;
        } catch (const std::exception& e) {
            throw std::runtime_error("sampling failed for problem '" + problem.id + "' (" +
                                     std::to_string(i) + "/" +
                                     std::to_string(config.n_samples) + " done): " + e.what());
        }
        RawCompletion c;
        c.problem_id = problem.id;
        c.model_id = config.model_name;
        c.text = std::move(text);
        c.gen_meta = GenMeta{config.temperature, config.top_p, config.max_tokens};
        if (on_completion) on_completion(c);
        out.push_back(std::move(c));
    }
    return out;
}

// "0.2" / "1.0" — shortest decimal with at least one fractional digit, so
// sweep labels look like temperatures, not integers.
inline std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", t);
    std::string s(buf);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
    return s;
}

inline std::string sweep_label(const std::string& model_name, double temperature) {
    return model_name + "@T=" + format_temperature(temperature);
}

inline const std::vector<double> kDefaultSweepGrid = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4};

struct SweepBatch {
    double temperature = 0.0;
    std::string label;  // "<model>@T=<t>"
    std::vector<RawCompletion> completions;
};

// Samples every problem once per temperature. Each batch's completions carry
// the sweep label as their model_id, which keeps derived solution ids and
// default set labels unique across temperatures of the same model; the true
// model name still goes to the endpoint and the temperature is in gen_meta.
inline std::vector<SweepBatch> temperature_sweep(
        const std::vector<Problem>& problems, const std::vector<double>& temps,
        const GenConfig& base_config, ChatClient& client,
        const std::function<void(const std::string& label, const RawCompletion&)>&
                on_completion = {}) {
    if (temps.empty()) throw std::invalid_argument("temperature_sweep: no temperatures");
    std::set<std::string> labels;
    for (const double t : temps) {
        if (t < 0.0) throw std::invalid_argument("temperature_sweep: negative temperature");
        if (!labels.insert(format_temperature(t)).second)
            throw std::invalid_argument("temperature_sweep: duplicate temperature " +
                                        format_temperature(t));
    }
    std::vector<SweepBatch> out;
    out.reserve(temps.size());
    for (const double t : temps) {
        SweepBatch batch;
        batch.temperature = t;
        batch.label = sweep_label(base_config.model_name, t);
        GenConfig cfg = base_config;
        cfg.temperature = t;
        for (const auto& problem : problems) {
            auto completions = sample_solutions(
                    problem, cfg, client, [&](const RawCompletion& raw) {
                        if (on_completion) {
                            RawCompletion tagged = raw;
                            tagged.model_id = batch.label;
                            on_completion(batch.label, tagged);
                        }
                    });
            for (auto& c : completions) {
                c.model_id = batch.label;
                batch.completions.push_back(std::move(c));
            }
        }
        out.push_back(std::move(batch));
    }
    return out;
}

}  // namespace algodiv
