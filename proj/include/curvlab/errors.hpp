#pragma once

#include <stdexcept>
#include <string>

namespace curvlab {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "Error"; }
};

#define CURVLAB_ERROR(Name)                                              \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(what) {}          \
        const char* kind() const noexcept override { return #Name; }     \
    };

CURVLAB_ERROR(ConeViolation)
CURVLAB_ERROR(DomainViolation)
CURVLAB_ERROR(ConeExit)
CURVLAB_ERROR(ToleranceFailure)
CURVLAB_ERROR(BarrierViolation)
CURVLAB_ERROR(NonConvergence)
CURVLAB_ERROR(Pinch)
CURVLAB_ERROR(StabilityViolation)
CURVLAB_ERROR(InsufficientTail)
CURVLAB_ERROR(QuadratureFailure)
CURVLAB_ERROR(WindowTooShort)
CURVLAB_ERROR(WindowTooNarrow)
CURVLAB_ERROR(ConfigError)

#undef CURVLAB_ERROR

}  // namespace curvlab
