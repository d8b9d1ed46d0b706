#pragma once

// Shared helpers for the test suites: scratch directories, file I/O, and
// driving the CLI binary as a subprocess.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <algodiv/exec.hpp>

#ifndef ALGODIV_CLI_PATH
#define ALGODIV_CLI_PATH ""
#endif

namespace testutil {

// Unique scratch directory, removed on destruction.
struct ScratchDir {
    std::filesystem::path path;

    ScratchDir() {
        std::string tmpl =
                (std::filesystem::temp_directory_path() / "algodiv_test.XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path = tmpl;
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

inline std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (const char c : text)
        if (c == '\n') ++n;
    return n;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the algodiv CLI with the given arguments and returns its output.
inline CliResult run_cli(const std::vector<std::string>& args,
                         const std::string& stdin_data = "") {
    std::vector<std::string> argv;
    argv.reserve(args.size() + 1);
    argv.push_back(ALGODIV_CLI_PATH);
    argv.insert(argv.end(), args.begin(), args.end());
    const algodiv::ProcessResult r =
            algodiv::run_process(argv, stdin_data, /*timeout_ms=*/180000,
                                 /*output_cap=*/8u << 20);
    if (r.spawn_failed)
        throw std::runtime_error("cannot spawn CLI binary: " + r.spawn_error);
    if (r.timed_out) throw std::runtime_error("CLI run timed out: " + argv[1]);
    return CliResult{r.exit_code, r.out, r.err};
}

}  // namespace testutil
