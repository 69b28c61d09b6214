#include "upmp/subprocess.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <mutex>
#include <system_error>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

namespace upmp {

namespace {

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

[[noreturn]] void throw_errno(const char* what) { throw std::system_error(errno, std::generic_category(), what); }

void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv, const ProcessLimits& limits) {
    if (argv.empty()) {
        throw std::system_error(std::make_error_code(std::errc::invalid_argument), "empty command line");
    }
    ignore_sigpipe_once();

    int in_pipe[2];
    int out_pipe[2];
    int err_pipe[2];  // reports exec failure, closed by a successful exec
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw_errno("pipe");
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) throw_errno("pipe");
    if (::pipe2(err_pipe, O_CLOEXEC) != 0) throw_errno("pipe");

    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) throw_errno("fork");
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        if (!limits.forward_stderr) {
            const int devnull = ::open("/dev/null", O_WRONLY);
            if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
        }
        if (limits.memory_mb > 0) {
            const rlim_t bytes = static_cast<rlim_t>(limits.memory_mb) * 1024 * 1024;
            struct rlimit rl {bytes, bytes};
            ::setrlimit(RLIMIT_AS, &rl);
        }
        if (limits.cpu_seconds > 0) {
            struct rlimit rl {limits.cpu_seconds, limits.cpu_seconds + 1};
            ::setrlimit(RLIMIT_CPU, &rl);
        }
        ::execvp(cargv[0], cargv.data());
        const int err = errno;
        [[maybe_unused]] auto n = ::write(err_pipe[1], &err, sizeof err);
        ::_exit(127);
    }

    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    pid_ = pid;
    stdin_fd_ = in_pipe[1];
    stdout_fd_ = out_pipe[0];

    int child_errno = 0;
    ssize_t n;
    do {
        n = ::read(err_pipe[0], &child_errno, sizeof child_errno);
    } while (n < 0 && errno == EINTR);
    ::close(err_pipe[0]);
    if (n == sizeof child_errno) {
        ::waitpid(pid_, nullptr, 0);
        pid_ = -1;
        close_fd(stdin_fd_);
        close_fd(stdout_fd_);
        throw std::system_error(child_errno, std::generic_category(), "exec '" + argv[0] + "'");
    }
}

Subprocess::~Subprocess() { release(); }

Subprocess::Subprocess(Subprocess&& other) noexcept
    : pid_(other.pid_),
      stdin_fd_(other.stdin_fd_),
      stdout_fd_(other.stdout_fd_),
      buffer_(std::move(other.buffer_)),
      exit_status_(other.exit_status_) {
    other.pid_ = -1;
    other.stdin_fd_ = -1;
    other.stdout_fd_ = -1;
}

Subprocess& Subprocess::operator=(Subprocess&& other) noexcept {
    if (this != &other) {
        release();
        pid_ = std::exchange(other.pid_, -1);
        stdin_fd_ = std::exchange(other.stdin_fd_, -1);
        stdout_fd_ = std::exchange(other.stdout_fd_, -1);
        buffer_ = std::move(other.buffer_);
        exit_status_ = other.exit_status_;
    }
    return *this;
}

void Subprocess::release() {
    if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, nullptr, 0);
        pid_ = -1;
    }
    close_fd(stdin_fd_);
    close_fd(stdout_fd_);
}

bool Subprocess::write_line(const std::string& line) {
    if (stdin_fd_ < 0) return false;
    std::string data = line;
    data.push_back('\n');
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        const ssize_t n = ::write(stdin_fd_, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
    return true;
}

Subprocess::ReadStatus Subprocess::read_line(std::string& out, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
            out.assign(buffer_, 0, pos);
            buffer_.erase(0, pos + 1);
            return ReadStatus::line;
        }
        if (stdout_fd_ < 0) return ReadStatus::closed;
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return ReadStatus::timeout;
        pollfd pfd{stdout_fd_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            return ReadStatus::closed;
        }
        if (rc == 0) continue;
        char chunk[65536];
        const ssize_t n = ::read(stdout_fd_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            close_fd(stdout_fd_);
            return ReadStatus::closed;
        }
        if (n == 0) {
            close_fd(stdout_fd_);
            return ReadStatus::closed;
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

void Subprocess::close_stdin() { close_fd(stdin_fd_); }

int Subprocess::terminate(std::chrono::milliseconds grace) {
    if (pid_ <= 0) return exit_status_;
    close_fd(stdin_fd_);
    const auto deadline = std::chrono::steady_clock::now() + grace;
    int status = 0;
    pid_t r = 0;
    while ((r = ::waitpid(pid_, &status, WNOHANG)) == 0 && std::chrono::steady_clock::now() < deadline) {
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    if (r == 0) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
    }
    pid_ = -1;
    close_fd(stdout_fd_);
    exit_status_ = WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);
    return exit_status_;
}

}  // namespace upmp
