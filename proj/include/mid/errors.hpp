#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mid {

/// Base class for all domain errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -- geometry --------------------------------------------------------------

struct DuplicateRows : Error {
    std::size_t row_a, row_b;
    DuplicateRows(std::size_t a, std::size_t b)
        : Error("duplicate rows: " + std::to_string(a) + " and " + std::to_string(b) +
                " are at zero distance"),
          row_a(a), row_b(b) {}
};

struct KTooLarge : Error {
    KTooLarge(std::size_t k, std::size_t n)
        : Error("k=" + std::to_string(k) + " must be smaller than n=" + std::to_string(n)) {}
};

struct DegenerateRatio : Error {
    std::size_t row;
    explicit DegenerateRatio(std::size_t i)
        : Error("degenerate ratio at row " + std::to_string(i) +
                ": first and second neighbour distances are equal"),
          row(i) {}
};

struct QTooLarge : Error {
    QTooLarge(std::size_t q, std::size_t k)
        : Error("q=" + std::to_string(q) + " exceeds stored neighbours k=" + std::to_string(k)) {}
};

// -- twonn -----------------------------------------------------------------

struct EmptyInput : Error {
    EmptyInput() : Error("empty input") {}
    explicit EmptyInput(const std::string& what) : Error(what) {}
};

struct NonParetoSupport : Error {
    std::size_t row;
    double value;
    NonParetoSupport(std::size_t i, double v)
        : Error("ratio " + std::to_string(v) + " at row " + std::to_string(i) +
                " is outside the open Pareto support (1, inf)"),
          row(i), value(v) {}
};

// -- hidalgo ---------------------------------------------------------------

struct ConfigInvalid : Error {
    using Error::Error;
};

// -- posterior -------------------------------------------------------------

struct EmptyCandidates : Error {
    EmptyCandidates() : Error("no candidate partitions supplied") {}
};

struct LabelOutOfRange : Error {
    LabelOutOfRange(int label, int L)
        : Error("label " + std::to_string(label) + " outside {1.." + std::to_string(L) + "}") {}
};

// -- spatial ---------------------------------------------------------------

struct ZeroVariance : Error {
    ZeroVariance() : Error("zero variance: statistic undefined for a constant field") {}
    explicit ZeroVariance(const std::string& what) : Error(what) {}
};

struct EmptySample : Error {
    EmptySample() : Error("empty sample") {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// -- pipeline --------------------------------------------------------------

struct ParseError : Error {
    using Error::Error;
};

struct DateGap : Error {
    using Error::Error;
};

struct AllFiltered : Error {
    explicit AllFiltered(const std::string& step)
        : Error("no country survives the " + step + " filter") {}
};

struct TooFewObserved : Error {
    TooFewObserved(const std::string& country, const std::string& variable)
        : Error("series " + variable + " for " + country +
                " has fewer than 2 observed points; cannot impute") {}
};

struct CoverageError : Error {
    using Error::Error;
};

struct NotImputed : Error {
    using Error::Error;
};

// -- cli / artifacts -------------------------------------------------------

struct MissingArtifact : Error {
    explicit MissingArtifact(const std::string& stage)
        : Error("missing artifact from stage '" + stage + "'") {}
};

}  // namespace mid
