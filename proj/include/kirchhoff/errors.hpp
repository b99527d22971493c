#pragma once

#include <stdexcept>
#include <string>

namespace kirchhoff {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define KIRCHHOFF_DEFINE_ERROR(Name)                      \
    class Name : public Error {                           \
    public:                                               \
        using Error::Error;                               \
    }

KIRCHHOFF_DEFINE_ERROR(DomainError);
KIRCHHOFF_DEFINE_ERROR(QuadratureError);
KIRCHHOFF_DEFINE_ERROR(UnboundedError);
KIRCHHOFF_DEFINE_ERROR(DegenerateError);
KIRCHHOFF_DEFINE_ERROR(BracketError);
KIRCHHOFF_DEFINE_ERROR(NonFiniteError);
KIRCHHOFF_DEFINE_ERROR(SmoothnessError);
KIRCHHOFF_DEFINE_ERROR(StallError);
KIRCHHOFF_DEFINE_ERROR(NoConvergence);
KIRCHHOFF_DEFINE_ERROR(SingularSystem);
KIRCHHOFF_DEFINE_ERROR(EmptyAdmissible);
KIRCHHOFF_DEFINE_ERROR(DegenerateInterval);
KIRCHHOFF_DEFINE_ERROR(ConfigError);

#undef KIRCHHOFF_DEFINE_ERROR

}  // namespace kirchhoff
