#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "algodiv/core.hpp"

namespace algodiv {

// Parse or I/O failure pinned to a file location ("path:line: detail").
class JsonlError : public std::runtime_error {
public:
    JsonlError(const std::string& path, std::size_t line, const std::string& detail)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + detail),
          path_(path),
          line_(line) {}
    JsonlError(const std::string& path, const std::string& detail)
        : std::runtime_error(path + ": " + detail), path_(path), line_(0) {}

    const std::string& path() const { return path_; }
    std::size_t line() const { return line_; }  // 1-based; 0 = whole file

private:
    std::string path_;
    std::size_t line_;
};

// ---- JSON <-> domain types -------------------------------------------------
//
// Parsing copies the whole object into .extra first and then erases the
// fields we own, so fields written by other tools survive a round-trip.
// Serialization starts from .extra and overwrites the owned fields.

inline void to_json(json& j, const TestCase& t) {
    j = json{{"input", t.input}, {"expected_output", t.expected_output}};
}

inline void from_json(const json& j, TestCase& t) {
    j.at("input").get_to(t.input);
    j.at("expected_output").get_to(t.expected_output);
}

inline void to_json(json& j, const GenMeta& g) {
    j = json{{"temperature", g.temperature}, {"top_p", g.top_p}, {"max_tokens", g.max_tokens}};
}

inline void from_json(const json& j, GenMeta& g) {
    g = GenMeta{};
    if (j.contains("temperature")) j.at("temperature").get_to(g.temperature);
    if (j.contains("top_p")) j.at("top_p").get_to(g.top_p);
    if (j.contains("max_tokens")) j.at("max_tokens").get_to(g.max_tokens);
}

inline void to_json(json& j, const Problem& p) {
    j = p.extra.is_object() ? p.extra : json::object();
    j["id"] = p.id;
    j["statement"] = p.statement;
    j["source"] = p.source;
    j["difficulty"] = p.difficulty;
    j["tests"] = p.tests;
}

inline void from_json(const json& j, Problem& p) {
    p = Problem{};
    j.at("id").get_to(p.id);
    if (j.contains("statement")) j.at("statement").get_to(p.statement);
    if (j.contains("source")) j.at("source").get_to(p.source);
    if (j.contains("difficulty")) j.at("difficulty").get_to(p.difficulty);
    if (j.contains("tests")) j.at("tests").get_to(p.tests);
    p.extra = j;
    for (const char* k : {"id", "statement", "source", "difficulty", "tests"}) p.extra.erase(k);
}

inline std::string origin_to_string(const Origin& o) { return o.str(); }

inline Origin origin_from_string(const std::string& s) {
    if (s == "human") return Origin::human();
    static const std::string prefix = "model:";
    if (s.rfind(prefix, 0) == 0) return Origin::model(s.substr(prefix.size()));
    throw std::invalid_argument("bad origin '" + s + "' (expected \"human\" or \"model:<id>\")");
}

inline Correctness correctness_from_string(const std::string& s) {
    if (s == "pass") return Correctness::Pass;
    if (s == "fail") return Correctness::Fail;
    if (s == "unknown") return Correctness::Unknown;
    throw std::invalid_argument("bad correctness '" + s + "'");
}

inline void to_json(json& j, const Solution& s) {
    j = s.extra.is_object() ? s.extra : json::object();
    j["id"] = s.id;
    j["problem_id"] = s.problem_id;
    j["code"] = s.code;
    j["origin"] = origin_to_string(s.origin);
    j["correctness"] = to_string(s.correctness);
    if (s.correctness == Correctness::Fail)
        j["fail_reason"] = s.fail_reason;
    else
        j.erase("fail_reason");
    if (s.gen_meta)
        j["gen_meta"] = *s.gen_meta;
    else
        j.erase("gen_meta");
}

inline void from_json(const json& j, Solution& s) {
    s = Solution{};
    j.at("id").get_to(s.id);
    j.at("problem_id").get_to(s.problem_id);
    j.at("code").get_to(s.code);
    s.origin = origin_from_string(j.value("origin", "human"));
    s.correctness = correctness_from_string(j.value("correctness", "unknown"));
    if (j.contains("fail_reason")) j.at("fail_reason").get_to(s.fail_reason);
    if (j.contains("gen_meta") && !j.at("gen_meta").is_null())
        s.gen_meta = j.at("gen_meta").get<GenMeta>();
    s.extra = j;
    for (const char* k :
         {"id", "problem_id", "code", "origin", "correctness", "fail_reason", "gen_meta"})
        s.extra.erase(k);
}

// ---- line-oriented file I/O -------------------------------------------------

// Calls fn(parsed_object, line_number) for every non-blank line. Malformed
// JSON or a throwing fn surfaces as JsonlError carrying path:line.
inline void read_jsonl(const std::string& path,
                       const std::function<void(const json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw JsonlError(path, "cannot open file");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw JsonlError(path, lineno, "malformed JSON");
        try {
            fn(j, lineno);
        } catch (const JsonlError&) {
            throw;
        } catch (const std::exception& e) {
            throw JsonlError(path, lineno, e.what());
        }
    }
}

template <typename T>
std::vector<T> read_jsonl_as(const std::string& path) {
    std::vector<T> out;
    read_jsonl(path, [&](const json& j, std::size_t) { out.push_back(j.get<T>()); });
    return out;
}

// Writes content to a sibling temp file and renames it into place, so
// readers never observe a half-written file.
inline void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw JsonlError(tmp.string(), "cannot open for writing");
        out << content;
        out.flush();
        if (!out) throw JsonlError(tmp.string(), "write failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw JsonlError(path, "rename failed: " + ec.message());
    }
}

inline void write_jsonl_atomic(const std::string& path, const std::vector<json>& rows) {
    std::string content;
    for (const auto& row : rows) {
        content += row.dump();
        content += '\n';
    }
    write_text_atomic(path, content);
}

template <typename T>
void write_objects_jsonl(const std::string& path, const std::vector<T>& items) {
    std::vector<json> rows;
    rows.reserve(items.size());
    for (const auto& item : items) rows.push_back(json(item));
    write_jsonl_atomic(path, rows);
}

}  // namespace algodiv
