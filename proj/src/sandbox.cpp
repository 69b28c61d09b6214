#include "upmp/sandbox.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <system_error>

#include "upmp/json_io.hpp"

namespace upmp {

namespace {

constexpr const char* kKindNames[] = {"syntax", "runtime", "bad_shape", "non_numeric", "timeout", "protocol"};

}  // namespace

std::string to_string(SandboxErrorKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<SandboxErrorKind> sandbox_error_kind_from_string(const std::string& s) {
    for (int i = 0; i < 6; ++i) {
        if (s == kKindNames[i]) return static_cast<SandboxErrorKind>(i);
    }
    return std::nullopt;
}

SandboxFailure::SandboxFailure(SandboxErrorKind kind, const std::string& message)
    : Error("sandbox " + to_string(kind) + ": " + message), kind_(kind) {}

std::vector<std::string> SandboxOptions::default_runner_command() {
    if (const char* env = std::getenv("UPMP_SANDBOX_RUNNER"); env && *env) {
        std::istringstream in(env);
        std::vector<std::string> argv;
        for (std::string word; in >> word;) argv.push_back(word);
        if (!argv.empty()) return argv;
    }
    return {"upmp-sandbox-runner"};
}

SandboxSession::SandboxSession(SandboxOptions options)
    : options_(std::move(options)), process_([this]() -> Subprocess {
          try {
              return Subprocess(options_.command, options_.limits);
          } catch (const std::system_error& e) {
              throw SandboxFailure(SandboxErrorKind::protocol, std::string("cannot start runner: ") + e.what());
          }
      }()) {}

SandboxSession::~SandboxSession() { shutdown(); }

void SandboxSession::fail(SandboxErrorKind kind, const std::string& message) {
    if (kind == SandboxErrorKind::timeout || kind == SandboxErrorKind::protocol) {
        dead_ = true;
        process_.terminate(std::chrono::milliseconds(0));
    }
    throw SandboxFailure(kind, message);
}

Json SandboxSession::round_trip(Json request, std::chrono::milliseconds timeout) {
    if (dead_) {
        throw SandboxFailure(SandboxErrorKind::protocol, "session is dead");
    }
    const long long id = next_id_++;
    Json framed;
    framed["id"] = id;
    for (auto& [k, v] : request.items()) framed[k] = std::move(v);

    if (!process_.write_line(framed.dump(-1, ' ', false, Json::error_handler_t::replace))) {
        fail(SandboxErrorKind::protocol, "runner closed its input");
    }
    std::string line;
    switch (process_.read_line(line, timeout)) {
        case Subprocess::ReadStatus::timeout:
            fail(SandboxErrorKind::timeout, "no reply within " + std::to_string(timeout.count()) + " ms");
        case Subprocess::ReadStatus::closed:
            fail(SandboxErrorKind::protocol, "runner exited without replying");
        case Subprocess::ReadStatus::line:
            break;
    }
    Json reply;
    try {
        reply = Json::parse(line);
    } catch (const Json::parse_error&) {
        fail(SandboxErrorKind::protocol, "reply is not JSON: " + line.substr(0, 200));
    }
    if (!reply.is_object() || !reply.contains("id") || !reply["id"].is_number_integer() ||
        reply["id"].get<long long>() != id) {
        fail(SandboxErrorKind::protocol, "reply id does not match request " + std::to_string(id));
    }
    if (!reply.contains("ok") || !reply["ok"].is_boolean()) {
        fail(SandboxErrorKind::protocol, "reply lacks boolean 'ok'");
    }
    if (!reply["ok"].get<bool>()) {
        SandboxErrorKind kind = SandboxErrorKind::protocol;
        std::string message = "unspecified error";
        if (reply.contains("error") && reply["error"].is_object()) {
            const Json& err = reply["error"];
            if (err.contains("kind") && err["kind"].is_string()) {
                kind = sandbox_error_kind_from_string(err["kind"].get<std::string>()).value_or(kind);
            }
            if (err.contains("message") && err["message"].is_string()) {
                message = err["message"].get<std::string>();
            }
        }
        fail(kind, message);
    }
    return reply;
}

void SandboxSession::load(const std::string& code) {
    Json req;
    req["kind"] = "load";
    req["code"] = code;
    round_trip(std::move(req), options_.request_timeout);
    loaded_ = true;
}

std::vector<double> SandboxSession::score(std::span<const WarehouseState> states,
                                          std::optional<std::chrono::milliseconds> timeout) {
    if (!loaded_) {
        throw SandboxFailure(SandboxErrorKind::protocol, "score before load");
    }
    Json req;
    req["kind"] = "score";
    Json batch = Json::array();
    for (const auto& s : states) batch.push_back(state_to_json(s));
    req["warehouse_states"] = std::move(batch);
    const Json reply = round_trip(std::move(req), timeout.value_or(options_.request_timeout));

    if (!reply.contains("scores") || !reply["scores"].is_array()) {
        throw SandboxFailure(SandboxErrorKind::bad_shape, "reply has no score list");
    }
    const Json& arr = reply["scores"];
    if (arr.size() != states.size()) {
        throw SandboxFailure(SandboxErrorKind::bad_shape, "expected " + std::to_string(states.size()) +
                                                              " scores, got " + std::to_string(arr.size()));
    }
    std::vector<double> out;
    out.reserve(arr.size());
    for (const Json& v : arr) {
        if (!v.is_number()) {
            throw SandboxFailure(SandboxErrorKind::non_numeric, "score entry is not a number: " + v.dump());
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            throw SandboxFailure(SandboxErrorKind::non_numeric, "score entry is not finite");
        }
        out.push_back(d);
    }
    return out;
}

void SandboxSession::shutdown() {
    if (!process_.running()) {
        dead_ = true;
        return;
    }
    if (!dead_) {
        Json req;
        req["id"] = next_id_++;
        req["kind"] = "shutdown";
        if (process_.write_line(req.dump())) {
            std::string line;
            process_.read_line(line, options_.shutdown_grace);
        }
    }
    dead_ = true;
    process_.terminate(options_.shutdown_grace);
}

}  // namespace upmp
