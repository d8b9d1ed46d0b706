#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <string.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "algodiv/core.hpp"

namespace algodiv {

enum class OutputNormalization {
    ExactBytes,
    TrimTrailing,  // strip trailing blanks per line and trailing final newlines
};

struct ExecConfig {
    // argv template; every "{file}" occurrence is replaced by the path of the
    // solution file.
    std::vector<std::string> interpreter_cmd = {"python3", "{file}"};
    int timeout_ms = 10000;              // per test
    std::size_t output_cap = 1 << 20;    // 1 MiB per stream; overflow is discarded
    OutputNormalization normalization = OutputNormalization::TrimTrailing;
    std::string file_suffix = ".py";
};

// The conventional judge comparison: trailing blanks on each line and
// trailing empty lines don't count.
inline std::string normalize_output(std::string_view s, OutputNormalization mode) {
    if (mode == OutputNormalization::ExactBytes) return std::string(s);
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find('\n', start);
        if (end == std::string_view::npos) end = s.size();
        auto line = s.substr(start, end - start);
        while (!line.empty() &&
               (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.remove_suffix(1);
        lines.push_back(line);
        if (end == s.size()) break;
        start = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i > 0) out += '\n';
        out += lines[i];
    }
    return out;
}

enum class TestVerdictKind { Pass, WrongOutput, Timeout, RuntimeError };

inline std::string to_string(TestVerdictKind k) {
    switch (k) {
        case TestVerdictKind::Pass: return "pass";
        case TestVerdictKind::WrongOutput: return "wrong_output";
        case TestVerdictKind::Timeout: return "timeout";
        default: return "runtime_error";
    }
}

struct TestVerdict {
    TestVerdictKind kind = TestVerdictKind::Pass;
    std::string detail;  // diff summary or stderr head
    int exit_code = 0;   // meaningful for RuntimeError
};

inline void to_json(json& j, const TestVerdict& v) {
    j = json{{"verdict", to_string(v.kind)}, {"detail", v.detail}, {"exit_code", v.exit_code}};
}

struct ExecResult {
    std::vector<TestVerdict> tests;

    bool passed() const {
        for (const auto& t : tests)
            if (t.kind != TestVerdictKind::Pass) return false;
        return true;
    }

    // "test <i>: <kind>" for the first failing test; empty when passed.
    std::string fail_reason() const {
        for (std::size_t i = 0; i < tests.size(); ++i)
            if (tests[i].kind != TestVerdictKind::Pass)
                return "test " + std::to_string(i) + ": " + to_string(tests[i].kind);
        return "";
    }
};

// The interpreter could not be started at all (missing binary, fork failure).
// Distinct from a solution failing: this one aborts the run.
class ExecEnvironmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProcessResult {
    int exit_code = 0;
    int term_signal = 0;   // nonzero when the process died by signal
    bool timed_out = false;
    bool spawn_failed = false;  // exec itself failed; see spawn_error
    std::string spawn_error;
    std::string out;
    std::string err;
};

namespace detail {

inline void ignore_sigpipe() {
    // A child exiting before reading its stdin must not kill us.
    static const bool done = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

struct UniqueFd {
    int fd = -1;
    UniqueFd() = default;
    explicit UniqueFd(int f) : fd(f) {}
    UniqueFd(const UniqueFd&) = delete;
    UniqueFd& operator=(const UniqueFd&) = delete;
    ~UniqueFd() { reset(); }
    void reset() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
    bool open() const { return fd >= 0; }
};

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        std::string tmpl =
                (std::filesystem::temp_directory_path() / "algodiv.XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (::mkdtemp(buf.data()) == nullptr)
            throw ExecEnvironmentError("mkdtemp failed: " + std::string(::strerror(errno)));
        path_ = buf.data();
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline std::string truncate_head(std::string_view s, std::size_t limit) {
    if (s.size() <= limit) return std::string(s);
    return std::string(s.substr(0, limit)) + "...";
}

}  // namespace detail

// Runs argv with stdin_data on standard input, capturing both output streams
// up to output_cap each (the overflow is drained and dropped so the child
// never blocks on a full pipe). The child gets its own process group and the
// whole group is SIGKILLed at the deadline. An exec failure is reported via
// spawn_failed — detected through a close-on-exec status pipe, so a missing
// interpreter is distinguishable from a crashing solution.
inline ProcessResult run_process(const std::vector<std::string>& argv,
                                 std::string_view stdin_data, int timeout_ms,
                                 std::size_t output_cap) {
    using Clock = std::chrono::steady_clock;
    if (argv.empty()) throw std::invalid_argument("run_process: empty argv");
    if (timeout_ms <= 0) throw std::invalid_argument("run_process: timeout must be positive");
    detail::ignore_sigpipe();

    int in_pipe[2], out_pipe[2], err_pipe[2], status_pipe[2];
    if (::pipe(in_pipe) || ::pipe(out_pipe) || ::pipe(err_pipe) ||
        ::pipe2(status_pipe, O_CLOEXEC))
        throw ExecEnvironmentError("pipe failed: " + std::string(::strerror(errno)));

    const pid_t pid = ::fork();
    if (pid < 0) throw ExecEnvironmentError("fork failed: " + std::string(::strerror(errno)));
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        for (const int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0],
                             err_pipe[1], status_pipe[0]})
            ::close(fd);
        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        ::execvp(cargv[0], cargv.data());
        const int err = errno;
        ssize_t ignored = ::write(status_pipe[1], &err, sizeof err);
        (void)ignored;
        ::_exit(127);
    }

    ::setpgid(pid, pid);  // also from the parent side; loser of the race is a no-op
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    ::close(status_pipe[1]);
    detail::UniqueFd stdin_fd(in_pipe[1]), stdout_fd(out_pipe[0]), stderr_fd(err_pipe[0]),
            status_fd(status_pipe[0]);
    ::fcntl(stdin_fd.fd, F_SETFL, O_NONBLOCK);

    ProcessResult res;
    int exec_errno = 0;
    std::size_t written = 0;
    if (stdin_data.empty()) stdin_fd.reset();

    const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    auto kill_deadline = Clock::time_point::max();  // set once the group is killed

    const auto kill_group = [&] {
        ::kill(-pid, SIGKILL);
        ::kill(pid, SIGKILL);
        kill_deadline = Clock::now() + std::chrono::seconds(2);
    };

    char buf[65536];
    while (stdin_fd.open() || stdout_fd.open() || stderr_fd.open() || status_fd.open()) {
        const auto now = Clock::now();
        if (!res.timed_out && now >= deadline) {
            res.timed_out = true;
            kill_group();
        }
        if (res.timed_out && now >= kill_deadline) break;  // descendant kept a pipe open

        struct pollfd fds[4];
        int* owner[4];
        int nfds = 0;
        const auto arm = [&](detail::UniqueFd& f, short events) {
            if (!f.open()) return;
            fds[nfds] = {f.fd, events, 0};
            owner[nfds++] = &f.fd;
        };
        arm(stdin_fd, POLLOUT);
        arm(stdout_fd, POLLIN);
        arm(stderr_fd, POLLIN);
        arm(status_fd, POLLIN);

        const auto until = res.timed_out ? kill_deadline : deadline;
        auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(until - now).count();
        wait_ms = std::max<long long>(0, std::min<long long>(wait_ms, 60000)) + 10;
        const int rc = ::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(wait_ms));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) continue;

        for (int i = 0; i < nfds; ++i) {
            if (fds[i].revents == 0) continue;
            if (owner[i] == &stdin_fd.fd) {
                if (fds[i].revents & (POLLERR | POLLHUP)) {
                    stdin_fd.reset();  // child closed stdin early; fine
                    continue;
                }
                const std::size_t chunk = std::min<std::size_t>(sizeof buf,
                                                                stdin_data.size() - written);
                const ssize_t n = ::write(stdin_fd.fd, stdin_data.data() + written, chunk);
                if (n > 0) written += static_cast<std::size_t>(n);
                else if (n < 0 && errno != EAGAIN && errno != EINTR)
                    stdin_fd.reset();
                if (written == stdin_data.size()) stdin_fd.reset();  // EOF for the child
            } else {
                detail::UniqueFd& f = owner[i] == &stdout_fd.fd ? stdout_fd
                                      : owner[i] == &stderr_fd.fd ? stderr_fd
                                                                  : status_fd;
                const ssize_t n = ::read(f.fd, buf, sizeof buf);
                if (n > 0) {
                    if (&f == &status_fd) {
                        if (static_cast<std::size_t>(n) >= sizeof exec_errno)
                            ::memcpy(&exec_errno, buf, sizeof exec_errno);
                    } else {
                        std::string& sink = &f == &stdout_fd ? res.out : res.err;
                        if (sink.size() < output_cap)
                            sink.append(buf, std::min<std::size_t>(static_cast<std::size_t>(n),
                                                                   output_cap - sink.size()));
                        // past the cap: drained and dropped
                    }
                } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                    f.reset();
                }
            }
        }
    }

    int status = 0;
    ::waitpid(pid, &status, 0);
    ::kill(-pid, SIGKILL);  // reap any stragglers in the group
    if (exec_errno != 0) {
        res.spawn_failed = true;
        res.spawn_error = ::strerror(exec_errno);
    } else if (WIFEXITED(status)) {
        res.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        res.term_signal = WTERMSIG(status);
    }
    return res;
}

namespace detail {

inline std::vector<std::string> interpreter_argv(const ExecConfig& cfg,
                                                 const std::string& file_path) {
    std::vector<std::string> argv;
    argv.reserve(cfg.interpreter_cmd.size());
    for (std::string part : cfg.interpreter_cmd) {
        std::size_t at;
        while ((at = part.find("{file}")) != std::string::npos)
            part.replace(at, 6, file_path);
        argv.push_back(std::move(part));
    }
    return argv;
}

// "line 3: expected '10' got '11'" — enough to eyeball, short enough to log.
inline std::string diff_summary(const std::string& expected, const std::string& got) {
    std::vector<std::string_view> el, gl;
    const auto split = [](std::string_view s, std::vector<std::string_view>& out) {
        std::size_t start = 0;
        while (start <= s.size()) {
            auto end = s.find('\n', start);
            if (end == std::string_view::npos) end = s.size();
            out.push_back(s.substr(start, end - start));
            if (end == s.size()) break;
            start = end + 1;
        }
    };
    split(expected, el);
    split(got, gl);
    for (std::size_t i = 0; i < std::max(el.size(), gl.size()); ++i) {
        const std::string_view e = i < el.size() ? el[i] : std::string_view("<eof>");
        const std::string_view g = i < gl.size() ? gl[i] : std::string_view("<eof>");
        if (e != g)
            return "line " + std::to_string(i + 1) + ": expected '" +
                   truncate_head(e, 60) + "' got '" + truncate_head(g, 60) + "'";
    }
    return "outputs differ";
}

}  // namespace detail

// Executes one solution against every test of its problem, sequentially.
// Per-test outcomes are verdicts; only a broken environment (missing
// interpreter) throws.
inline ExecResult run_solution(const Solution& solution, const Problem& problem,
                               const ExecConfig& cfg) {
    detail::TempDir dir;
    const std::string file_path =
            (std::filesystem::path(dir.path()) / ("solution" + cfg.file_suffix)).string();
    {
        std::ofstream f(file_path, std::ios::binary);
        f << solution.code;
        if (!f.flush()) throw ExecEnvironmentError("cannot write " + file_path);
    }
    const auto argv = detail::interpreter_argv(cfg, file_path);

    ExecResult result;
    result.tests.reserve(problem.tests.size());
    for (const auto& test : problem.tests) {
        const ProcessResult pr = run_process(argv, test.input, cfg.timeout_ms, cfg.output_cap);
        if (pr.spawn_failed)
            throw ExecEnvironmentError("cannot run interpreter '" + argv.front() +
                                       "': " + pr.spawn_error);
        TestVerdict v;
        if (pr.timed_out) {
            v.kind = TestVerdictKind::Timeout;
            v.detail = "timed out after " + std::to_string(cfg.timeout_ms) + "ms";
        } else if (pr.term_signal != 0 || pr.exit_code != 0) {
            v.kind = TestVerdictKind::RuntimeError;
            v.exit_code = pr.term_signal != 0 ? 128 + pr.term_signal : pr.exit_code;
            v.detail = pr.term_signal != 0
                               ? "killed by signal " + std::to_string(pr.term_signal)
                               : detail::truncate_head(pr.err, 200);
        } else {
            const std::string want = normalize_output(test.expected_output, cfg.normalization);
            const std::string got = normalize_output(pr.out, cfg.normalization);
            if (want == got) {
                v.kind = TestVerdictKind::Pass;
            } else {
                v.kind = TestVerdictKind::WrongOutput;
                v.detail = detail::diff_summary(want, got);
            }
        }
        result.tests.push_back(std::move(v));
    }
    return result;
}

// Per-solution audit row for exec_results.jsonl.
struct ExecRecord {
    std::string solution_id;
    std::string problem_id;
    Correctness correctness = Correctness::Unknown;
    std::string fail_reason;
    std::vector<TestVerdict> tests;
};

inline void to_json(json& j, const ExecRecord& r) {
    j = json{{"solution_id", r.solution_id},
             {"problem_id", r.problem_id},
             {"correctness", to_string(r.correctness)},
             {"fail_reason", r.fail_reason},
             {"tests", r.tests}};
}

// Returns a copy of the set with every member's correctness decided (Pass, or
// Fail with a reason). Members whose problem has no tests stay Unknown.
// Solutions run concurrently up to `parallelism`; results land by index, so
// the output order — and content, for deterministic programs — is stable.
inline SolutionSet verify_set(const SolutionSet& set,
                              const std::unordered_map<std::string, const Problem*>& problems,
                              const ExecConfig& cfg, int parallelism = 1,
                              std::vector<ExecRecord>* audit = nullptr) {
    SolutionSet out = set;
    if (audit) audit->assign(out.solutions.size(), {});
    if (out.solutions.empty()) return out;

    const int workers =
            std::clamp(parallelism, 1, static_cast<int>(out.solutions.size()));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex err_mu;
    std::exception_ptr first_error;

    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= out.solutions.size() || failed.load()) return;
            Solution& s = out.solutions[i];
            try {
                const auto it = problems.find(s.problem_id);
                if (it == problems.end())
                    throw std::invalid_argument("verify_set: unknown problem '" + s.problem_id +
                                                "' in solution '" + s.id + "'");
                const Problem& p = *it->second;
                ExecRecord rec;
                rec.solution_id = s.id;
                rec.problem_id = s.problem_id;
                if (p.tests.empty()) {
                    s.correctness = Correctness::Unknown;  // nothing to verify against
                } else {
                    ExecResult r = run_solution(s, p, cfg);
                    if (r.passed()) {
                        s.correctness = Correctness::Pass;
                        s.fail_reason.clear();
                    } else {
                        s.correctness = Correctness::Fail;
                        s.fail_reason = r.fail_reason();
                    }
                    rec.tests = std::move(r.tests);
                }
                rec.correctness = s.correctness;
                rec.fail_reason = s.fail_reason;
                if (audit) (*audit)[i] = std::move(rec);
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace algodiv
