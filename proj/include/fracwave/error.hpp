#pragma once

#include <stdexcept>
#include <string>

namespace fracwave {

enum class Errc {
    NonFiniteInput,
    NonFiniteResult,
    UnsupportedOrder,
    AccuracyLoss,
    InvalidOrder,
    TooFewNodes,
    InvalidSamples,
    GeometryMismatch,
    InvalidExponent,
    NonzeroMean,
    InvalidParams,
    EmptyDeltaWindow,
    InvalidDelta,
    DivergedIteration,
    NoConvergence,
    WindowTooSmall,
    WindowViolation,
    InvalidBeta,
    BracketInvalid,
    ConfigError,
    IoError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace fracwave
