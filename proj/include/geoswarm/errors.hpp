#pragma once

#include <stdexcept>
#include <string>

namespace geoswarm {

enum class ErrorCode {
    InvalidMove,
    IncompatibleLocals,
    NoCandidateSites,
    InvalidAgentState,
    InvalidScenario,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

class ModelError : public std::runtime_error {
public:
    ModelError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace geoswarm
