#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "upmp/core.hpp"
#include "upmp/subprocess.hpp"

namespace upmp {

// Client side of the heuristic runner protocol. The runner reads one JSON
// object per line on stdin and answers with exactly one JSON object per line
// on stdout:
//
//   {"id":1,"kind":"load","code":"def select_next_move(...): ..."}
//   {"id":1,"ok":true}
//   {"id":2,"kind":"score","warehouse_states":[[[0,1],[2,3]], ...]}
//   {"id":2,"ok":true,"scores":[1.5, ...]}
//   {"id":3,"kind":"shutdown"}
//   {"id":3,"ok":true}
//
// Failures carry {"ok":false,"error":{"kind":K,"message":M}} where K is one of
// syntax, runtime, bad_shape, non_numeric, timeout, protocol.

enum class SandboxErrorKind { syntax, runtime, bad_shape, non_numeric, timeout, protocol };

std::string to_string(SandboxErrorKind kind);
std::optional<SandboxErrorKind> sandbox_error_kind_from_string(const std::string& s);

class SandboxFailure : public Error {
public:
    SandboxFailure(SandboxErrorKind kind, const std::string& message);
    [[nodiscard]] SandboxErrorKind kind() const { return kind_; }

private:
    SandboxErrorKind kind_;
};

struct SandboxOptions {
    /// Runner command line. Defaults to $UPMP_SANDBOX_RUNNER split on
    /// whitespace, or "upmp-sandbox-runner" from PATH.
    std::vector<std::string> command = default_runner_command();
    /// Wall-clock limit for a single request.
    std::chrono::milliseconds request_timeout{60000};
    std::chrono::milliseconds shutdown_grace{500};
    ProcessLimits limits{1024, 0, false};

    static std::vector<std::string> default_runner_command();
};

/// One runner process serving one heuristic. Requests are strictly sequential.
/// After a timeout, crash or malformed reply the session is dead and every
/// further request fails with SandboxErrorKind::protocol.
class SandboxSession {
public:
    /// Throws SandboxFailure(protocol) when the runner cannot be started.
    explicit SandboxSession(SandboxOptions options);
    ~SandboxSession();

    SandboxSession(SandboxSession&&) noexcept = default;
    SandboxSession& operator=(SandboxSession&&) noexcept = default;

    /// Throws SandboxFailure(syntax | runtime | ...).
    void load(const std::string& code);

    /// Throws SandboxFailure. `timeout` defaults to options.request_timeout.
    std::vector<double> score(std::span<const WarehouseState> states,
                              std::optional<std::chrono::milliseconds> timeout = std::nullopt);

    /// Idempotent; kills the runner if it does not exit within the grace period.
    void shutdown();

    [[nodiscard]] bool alive() const { return !dead_; }

private:
    nlohmann::ordered_json round_trip(nlohmann::ordered_json request, std::chrono::milliseconds timeout);
    [[noreturn]] void fail(SandboxErrorKind kind, const std::string& message);

    SandboxOptions options_;
    Subprocess process_;
    long long next_id_ = 1;
    bool loaded_ = false;
    bool dead_ = false;
};

}  // namespace upmp
