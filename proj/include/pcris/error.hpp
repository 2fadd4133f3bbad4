#pragma once

#include <stdexcept>
#include <string>

namespace pcris {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define PCRIS_ERROR(Name)                  \
    struct Name : Error {                  \
        using Error::Error;                \
        Name() : Error(#Name) {}           \
    };

PCRIS_ERROR(CompositeModulus)
PCRIS_ERROR(NotASubfield)
PCRIS_ERROR(NoSolution)
PCRIS_ERROR(BaseMismatch)
PCRIS_ERROR(AmbientMismatch)
PCRIS_ERROR(PrecisionMismatch)
PCRIS_ERROR(PrecisionExhausted)
PCRIS_ERROR(PrecisionInsufficient)
PCRIS_ERROR(NotNygaard)
PCRIS_ERROR(NotNygaardDomain)
PCRIS_ERROR(NotInKernel)
PCRIS_ERROR(WindowTooSmall)
PCRIS_ERROR(BadParameters)
PCRIS_ERROR(CaseInapplicable)
PCRIS_ERROR(SchemaError)

#undef PCRIS_ERROR

}  // namespace pcris
