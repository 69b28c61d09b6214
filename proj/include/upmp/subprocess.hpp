#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <sys/types.h>

namespace upmp {

struct ProcessLimits {
    /// Address-space cap in MiB; 0 leaves it unlimited.
    std::size_t memory_mb = 0;
    /// CPU-time cap in seconds; 0 leaves it unlimited.
    unsigned cpu_seconds = 0;
    bool forward_stderr = false;
};

/// A child process connected through pipes to its stdin and stdout. Killed and
/// reaped on destruction.
class Subprocess {
public:
    enum class ReadStatus { line, timeout, closed };

    /// Throws std::system_error when pipes cannot be created or exec fails.
    Subprocess(const std::vector<std::string>& argv, const ProcessLimits& limits);
    ~Subprocess();

    Subprocess(Subprocess&& other) noexcept;
    Subprocess& operator=(Subprocess&& other) noexcept;
    Subprocess(const Subprocess&) = delete;
    Subprocess& operator=(const Subprocess&) = delete;

    /// Writes `line` plus '\n'. False if the child closed its stdin.
    bool write_line(const std::string& line);

    /// Reads one '\n'-terminated line (without the terminator).
    ReadStatus read_line(std::string& out, std::chrono::milliseconds timeout);

    void close_stdin();

    /// Waits up to `grace` for a voluntary exit, then SIGKILLs. Idempotent.
    /// Returns the exit code, or -signal when killed by a signal.
    int terminate(std::chrono::milliseconds grace);

    [[nodiscard]] bool running() const { return pid_ > 0; }
    [[nodiscard]] pid_t pid() const { return pid_; }

private:
    void release();

    pid_t pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    std::string buffer_;
    int exit_status_ = 0;
};

}  // namespace upmp
