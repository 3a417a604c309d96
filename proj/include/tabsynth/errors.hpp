#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tabsynth {

// Every failure the toolkit reports carries one of these kinds. The CLI maps
// each kind to its own exit code (see tools/main.cpp).
enum class ErrorKind {
    Decode = 10,
    Schema,
    DegenerateLabels,
    InsufficientClassRows,
    Shape,
    NonFiniteGradient,
    InsufficientData,
    DrawLimitExceeded,
    Ratio,
    EmptyGenerationRegion,
    Config,
    DegenerateData,
    StrategyMismatch,
    Io,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define TABSYNTH_DEFINE_ERROR(Name, Kind)                                                  \
    class Name : public Error {                                                            \
    public:                                                                                \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {}           \
    };

TABSYNTH_DEFINE_ERROR(DecodeError, Decode)
TABSYNTH_DEFINE_ERROR(SchemaError, Schema)
TABSYNTH_DEFINE_ERROR(DegenerateLabels, DegenerateLabels)
TABSYNTH_DEFINE_ERROR(InsufficientClassRows, InsufficientClassRows)
TABSYNTH_DEFINE_ERROR(ShapeError, Shape)
TABSYNTH_DEFINE_ERROR(NonFiniteGradient, NonFiniteGradient)
TABSYNTH_DEFINE_ERROR(InsufficientData, InsufficientData)
TABSYNTH_DEFINE_ERROR(RatioError, Ratio)
TABSYNTH_DEFINE_ERROR(EmptyGenerationRegion, EmptyGenerationRegion)
TABSYNTH_DEFINE_ERROR(ConfigError, Config)
TABSYNTH_DEFINE_ERROR(DegenerateData, DegenerateData)
TABSYNTH_DEFINE_ERROR(StrategyMismatch, StrategyMismatch)
TABSYNTH_DEFINE_ERROR(IoError, Io)

#undef TABSYNTH_DEFINE_ERROR

// Rejection sampling ran out of draws before collecting the requested rows.
class DrawLimitExceeded : public Error {
public:
    DrawLimitExceeded(std::size_t kept, std::size_t draws)
        : Error(ErrorKind::DrawLimitExceeded,
                "kept " + std::to_string(kept) + " rows after " + std::to_string(draws) + " draws"),
          kept_(kept), draws_(draws) {}

    std::size_t kept() const noexcept { return kept_; }
    std::size_t draws() const noexcept { return draws_; }

private:
    std::size_t kept_;
    std::size_t draws_;
};

}  // namespace tabsynth
