#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <mutex>
#include <sstream>
#include <utility>
#include <string>
#include <vector>

#include "ghostvar/error.hpp"
#include "ghostvar/io/csv.hpp"
#include "ghostvar/linalg/matrix.hpp"
#include "ghostvar/predictors/prediction_function.hpp"

namespace ghostvar {

/// A model living in another process. Each batch is one invocation: CSV
/// (header of variable names, LF line endings) on stdin, one prediction per
/// line on stdout.
struct ExternalPredictorConfig {
    std::vector<std::string> argv;  ///< program followed by its arguments
    double timeout_seconds = 60.0;
    std::size_t max_batch_rows = 100000;

    /// Runs `command` through /bin/sh -c.
    static ExternalPredictorConfig shell(const std::string& command, double timeout_seconds = 60.0) {
        return {{"/bin/sh", "-c", command}, timeout_seconds, 100000};
    }
};

namespace detail {

struct ProcessResult {
    std::string out;
    std::string err;
    int status = 0;
};

class Fd {
public:
    explicit Fd(int fd = -1) noexcept : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Fd& operator=(Fd&& o) noexcept {
        if (this != &o) {
            reset();
            fd_ = std::exchange(o.fd_, -1);
        }
        return *this;
    }
    ~Fd() { reset(); }
    void reset() noexcept {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }
    [[nodiscard]] int get() const noexcept { return fd_; }

private:
    int fd_;
};

inline void make_pipe(Fd& r, Fd& w) {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) fail(ErrorCode::SpawnFailed, std::string("pipe: ") + std::strerror(errno));
    r = Fd(fds[0]);
    w = Fd(fds[1]);
}

inline void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] {
        struct sigaction sa {};
        ::sigaction(SIGPIPE, nullptr, &sa);
        if (sa.sa_handler == SIG_DFL) {
            sa.sa_handler = SIG_IGN;
            ::sigaction(SIGPIPE, &sa, nullptr);
        }
    });
}

/// Spawns argv, feeds `input` to stdin, collects stdout/stderr, enforces a timeout.
inline ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input, double timeout_s) {
    require(!argv.empty(), ErrorCode::SpawnFailed, "empty command line");
    ignore_sigpipe();
    Fd in_r, in_w, out_r, out_w, err_r, err_w, exec_r, exec_w;
    make_pipe(in_r, in_w);
    make_pipe(out_r, out_w);
    make_pipe(err_r, err_w);
    make_pipe(exec_r, exec_w);

    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) fail(ErrorCode::SpawnFailed, std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(in_r.get(), STDIN_FILENO);
        ::dup2(out_w.get(), STDOUT_FILENO);
        ::dup2(err_w.get(), STDERR_FILENO);
        ::execvp(cargv[0], cargv.data());
        const int e = errno;
        [[maybe_unused]] auto ignored = ::write(exec_w.get(), &e, sizeof e);
        ::_exit(127);
    }
    in_r.reset();
    out_w.reset();
    err_w.reset();
    exec_w.reset();

    int exec_errno = 0;
    if (::read(exec_r.get(), &exec_errno, sizeof exec_errno) == static_cast<ssize_t>(sizeof exec_errno)) {
        ::waitpid(pid, nullptr, 0);
        fail(ErrorCode::SpawnFailed, "cannot execute '" + argv[0] + "': " + std::strerror(exec_errno));
    }

    ::fcntl(in_w.get(), F_SETFL, O_NONBLOCK);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    ProcessResult res;
    std::size_t written = 0;
    if (input.empty()) in_w.reset();
    char buf[65536];
    while (out_r.get() >= 0 || err_r.get() >= 0) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, nullptr, 0);
            fail(ErrorCode::Timeout, "predictor did not finish within " + std::to_string(timeout_s) + " s");
        }
        pollfd fds[3];
        nfds_t nfds = 0;
        auto add = [&](const Fd& fd, short events) {
            if (fd.get() >= 0) fds[nfds++] = pollfd{fd.get(), events, 0};
        };
        add(in_w, POLLOUT);
        add(out_r, POLLIN);
        add(err_r, POLLIN);
        const int rc = ::poll(fds, nfds, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (rc < 0 && errno != EINTR) fail(ErrorCode::SpawnFailed, std::string("poll: ") + std::strerror(errno));
        for (nfds_t k = 0; k < nfds && rc > 0; ++k) {
            if (fds[k].revents == 0) continue;
            if (fds[k].fd == in_w.get()) {
                const ssize_t w = ::write(in_w.get(), input.data() + written, input.size() - written);
                if (w > 0) written += static_cast<std::size_t>(w);
                if ((w < 0 && errno != EAGAIN && errno != EINTR) || written == input.size()) in_w.reset();
            } else {
                Fd& src = fds[k].fd == out_r.get() ? out_r : err_r;
                std::string& dst = fds[k].fd == out_r.get() ? res.out : res.err;
                const ssize_t r = ::read(src.get(), buf, sizeof buf);
                if (r > 0)
                    dst.append(buf, static_cast<std::size_t>(r));
                else if (r == 0 || (errno != EAGAIN && errno != EINTR))
                    src.reset();
            }
        }
    }
    in_w.reset();
    ::waitpid(pid, &res.status, 0);
    return res;
}

}  // namespace detail

class ExternalModel final : public Model {
public:
    ExternalModel(ExternalPredictorConfig cfg, std::vector<std::string> names)
        : cfg_(std::move(cfg)), names_(std::move(names)) {
        require(cfg_.timeout_seconds > 0.0, ErrorCode::InvalidArgument, "timeout must be positive");
        require(!cfg_.argv.empty(), ErrorCode::InvalidArgument, "empty predictor command");
        require(cfg_.max_batch_rows > 0, ErrorCode::InvalidArgument, "max batch rows must be positive");
    }

    [[nodiscard]] Vector predict(const Matrix& x) const override {
        std::lock_guard lock(mutex_);
        Vector out;
        out.reserve(x.rows());
        for (std::size_t start = 0; start < x.rows(); start += cfg_.max_batch_rows) {
            const std::size_t stop = std::min(x.rows(), start + cfg_.max_batch_rows);
            std::vector<std::size_t> idx(stop - start);
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = start + i;
            const Vector part = run_batch(x.select_rows(idx));
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }

private:
    Vector run_batch(const Matrix& x) const {
        std::ostringstream csv;
        write_matrix_csv(csv, names_, x);
        const auto res = detail::run_process(cfg_.argv, csv.str(), cfg_.timeout_seconds);
        // 126 and 127 are what /bin/sh reports for a command it cannot run or find.
        if (WIFEXITED(res.status) && (WEXITSTATUS(res.status) == 126 || WEXITSTATUS(res.status) == 127))
            fail(ErrorCode::SpawnFailed, "predictor command could not be started: " + res.err.substr(0, 500));
        if (!WIFEXITED(res.status) || WEXITSTATUS(res.status) != 0)
            fail(ErrorCode::ProtocolViolation, "predictor exited abnormally (status " + std::to_string(res.status) +
                                                   "): " + res.err.substr(0, 500));
        Vector y;
        y.reserve(x.rows());
        std::size_t start = 0;
        std::size_t line_no = 0;
        while (start < res.out.size()) {
            std::size_t end = res.out.find('\n', start);
            if (end == std::string::npos) end = res.out.size();
            const std::string_view line(res.out.data() + start, end - start);
            start = end + 1;
            ++line_no;
            double v = 0.0;
            if (!parse_double(line, v))
                fail(ErrorCode::ProtocolViolation,
                     "predictor output line " + std::to_string(line_no) + " is not a number: '" + std::string(line) + "'");
            y.push_back(v);
        }
        if (y.size() != x.rows())
            fail(ErrorCode::ProtocolViolation, "predictor returned " + std::to_string(y.size()) + " lines for " +
                                                   std::to_string(x.rows()) + " rows");
        return y;
    }

    ExternalPredictorConfig cfg_;
    std::vector<std::string> names_;
    mutable std::mutex mutex_;
};

inline PredictionFunction external_predictor(const ExternalPredictorConfig& cfg,
                                             const std::vector<std::string>& variable_names) {
    auto model = std::make_shared<const ExternalModel>(cfg, variable_names);
    return {model, ModelInfo{variable_names, "external", {{"timeout_seconds", cfg.timeout_seconds}}}};
}

}  // namespace ghostvar
