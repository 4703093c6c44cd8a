#pragma once

#include <stdexcept>
#include <string>

namespace leibniz {

struct SingularMatrix : std::runtime_error {
    explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};

struct NonConvergent : std::runtime_error {
    explicit NonConvergent(const std::string& what) : std::runtime_error(what) {}
};

struct OutsideSupport : std::runtime_error {
    explicit OutsideSupport(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalInversionFailure : std::runtime_error {
    explicit NumericalInversionFailure(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedConditional : std::runtime_error {
    explicit UnsupportedConditional(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleRegion : std::runtime_error {
    explicit InfeasibleRegion(const std::string& what) : std::runtime_error(what) {}
};

struct RankDeficientIncidence : std::runtime_error {
    explicit RankDeficientIncidence(const std::string& what) : std::runtime_error(what) {}
};

struct ThetaOutOfRange : std::runtime_error {
    explicit ThetaOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct NotDifferentiable : std::runtime_error {
    explicit NotDifferentiable(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidThresholds : std::runtime_error {
    explicit InvalidThresholds(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace leibniz
