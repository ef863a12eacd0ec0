#pragma once

#include <stdexcept>
#include <string>

namespace tsa {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MeasurementFailure : Error {
    using Error::Error;
};

struct InvalidCurvature : Error {
    using Error::Error;
};

struct DomainViolation : Error {
    using Error::Error;
};

struct RegionViolation : Error {
    double lo, hi;
    RegionViolation(const std::string& what, double lo_, double hi_) : Error(what), lo(lo_), hi(hi_) {}
};

struct SingularCovariance : Error {
    using Error::Error;
};

struct DofTooSmall : Error {
    using Error::Error;
};

struct UpdateBreakdown : Error {
    using Error::Error;
};

struct NotSymmetric : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace tsa
