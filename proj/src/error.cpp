#include "fracwave/error.hpp"

namespace fracwave {

const char* errc_name(Errc code)
{
    switch (code) {
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::NonFiniteResult: return "NonFiniteResult";
    case Errc::UnsupportedOrder: return "UnsupportedOrder";
    case Errc::AccuracyLoss: return "AccuracyLoss";
    case Errc::InvalidOrder: return "InvalidOrder";
    case Errc::TooFewNodes: return "TooFewNodes";
    case Errc::InvalidSamples: return "InvalidSamples";
    case Errc::GeometryMismatch: return "GeometryMismatch";
    case Errc::InvalidExponent: return "InvalidExponent";
    case Errc::NonzeroMean: return "NonzeroMean";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::EmptyDeltaWindow: return "EmptyDeltaWindow";
    case Errc::InvalidDelta: return "InvalidDelta";
    case Errc::DivergedIteration: return "DivergedIteration";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::WindowTooSmall: return "WindowTooSmall";
    case Errc::WindowViolation: return "WindowViolation";
    case Errc::InvalidBeta: return "InvalidBeta";
    case Errc::BracketInvalid: return "BracketInvalid";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace fracwave
