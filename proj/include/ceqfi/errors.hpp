#pragma once

#include <stdexcept>
#include <string>

namespace ceqfi {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonHermitianError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct InvalidProbabilitiesError : Error { using Error::Error; };
struct OutOfRangeError : Error { using Error::Error; };
struct DegenerateChannelError : Error { using Error::Error; };
struct WrongRankError : Error { using Error::Error; };
struct OutOfDomainError : Error { using Error::Error; };
struct UpperHemisphereError : Error { using Error::Error; };
struct OutOfDiskError : Error { using Error::Error; };
struct AllInfeasibleError : Error { using Error::Error; };
struct NotCovariantError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

}  // namespace ceqfi
