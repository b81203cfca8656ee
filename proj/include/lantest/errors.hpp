#pragma once

#include <stdexcept>
#include <string>

namespace lantest {

/// Base class for all lantest runtime errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad keys, out-of-range values, inconsistent sizes).
struct ConfigError : Error {
    using Error::Error;
};

/// AR coefficient check failed (sum of |rho_j| >= 1, or |rho| >= 1).
struct NonstationaryModel : Error {
    using Error::Error;
};

/// The conditional scale sigma(theta, z) (or its locally perturbed version)
/// was <= 0 at some probed state.
struct ScaleNotPositive : Error {
    using Error::Error;
};

/// Normal-equation matrix numerically singular in least squares.
struct SingularDesign : Error {
    using Error::Error;
};

/// Central-sequence gradient too close to zero to divide by; callers fall
/// back to the uncorrected discrete estimate.
struct GradientTooSmall : Error {
    using Error::Error;
};

/// The quadratic form for tau^2 came out negative (inconsistent inputs).
struct NegativeTau2 : Error {
    using Error::Error;
};

/// tau^2 <= 0 where a test statistic needs tau > 0.
struct NonpositiveTau2 : Error {
    using Error::Error;
};

/// A local scale shift 1 + h' n^{-1/2} S/sigma was <= 0, so the perturbed
/// density is not valid.
struct InvalidScaleShift : Error {
    using Error::Error;
};

} // namespace lantest
