#pragma once

#include <stdexcept>
#include <string>

namespace wptlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define WPTLAB_DEFINE_ERROR(Name)            \
    class Name : public Error {              \
    public:                                  \
        using Error::Error;                  \
    }

WPTLAB_DEFINE_ERROR(ConfigError);
WPTLAB_DEFINE_ERROR(DomainError);
WPTLAB_DEFINE_ERROR(BracketError);
WPTLAB_DEFINE_ERROR(NonFiniteError);
WPTLAB_DEFINE_ERROR(SamplingError);
WPTLAB_DEFINE_ERROR(DimensionError);
WPTLAB_DEFINE_ERROR(NarrowbandError);
WPTLAB_DEFINE_ERROR(ShapeError);
WPTLAB_DEFINE_ERROR(RandomSignalError);
WPTLAB_DEFINE_ERROR(OrderError);
WPTLAB_DEFINE_ERROR(UnsupportedError);
WPTLAB_DEFINE_ERROR(DegenerateChannelError);
WPTLAB_DEFINE_ERROR(ZeroChannelError);
WPTLAB_DEFINE_ERROR(DivisibilityError);
WPTLAB_DEFINE_ERROR(QuadratureError);
WPTLAB_DEFINE_ERROR(InfeasibleError);
WPTLAB_DEFINE_ERROR(DivergenceError);
WPTLAB_DEFINE_ERROR(DegenerateError);

#undef WPTLAB_DEFINE_ERROR

}  // namespace wptlab
