#pragma once

#include <stdexcept>
#include <string>

namespace tsl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define TSL_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                  \
    public:                                                      \
        explicit Name(const std::string& what)                   \
            : Error(std::string(#Name) + ": " + what) {}         \
    }

// grids and transforms
TSL_DEFINE_ERROR(EdgeMassError);
TSL_DEFINE_ERROR(GridError);
TSL_DEFINE_ERROR(ScaleResolutionError);
TSL_DEFINE_ERROR(SupportOverlapError);
TSL_DEFINE_ERROR(FormatError);

// kernels
TSL_DEFINE_ERROR(MomentDisagreement);
TSL_DEFINE_ERROR(DegenerateKernel);
TSL_DEFINE_ERROR(UnknownKernel);

// synthesis
TSL_DEFINE_ERROR(AnisotropicCalibration);
TSL_DEFINE_ERROR(ZeroCalibration);
TSL_DEFINE_ERROR(DivisionUnderflow);
TSL_DEFINE_ERROR(LadderTruncationError);

// class estimates, besov, pde
TSL_DEFINE_ERROR(HypothesisFailure);
TSL_DEFINE_ERROR(InvalidArgument);
TSL_DEFINE_ERROR(ConeViolation);
TSL_DEFINE_ERROR(SupportViolation);

// driver
TSL_DEFINE_ERROR(ConfigError);
TSL_DEFINE_ERROR(StepError);

#undef TSL_DEFINE_ERROR

}  // namespace tsl
