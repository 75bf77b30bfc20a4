#pragma once

#include <stdexcept>
#include <string>

namespace trisieve {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define TRISIEVE_ERROR(name)                         \
    struct name : Error {                            \
        using Error::Error;                          \
    }

TRISIEVE_ERROR(InvalidDimension);
TRISIEVE_ERROR(InvalidArgument);
TRISIEVE_ERROR(DomainError);
TRISIEVE_ERROR(DegenerateGeometry);
TRISIEVE_ERROR(NotWellDefined);
TRISIEVE_ERROR(ConfigError);
TRISIEVE_ERROR(DuplicatePair);
TRISIEVE_ERROR(FrozenStore);
TRISIEVE_ERROR(EmptySearch);
TRISIEVE_ERROR(NoSolution);
TRISIEVE_ERROR(SizeGuard);
TRISIEVE_ERROR(RankDeficient);
TRISIEVE_ERROR(SamplerFailure);
TRISIEVE_ERROR(InfeasibleBox);

#undef TRISIEVE_ERROR

// Parse failures carry a 1-based position.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what + " at line " + std::to_string(line) + ", column " +
                std::to_string(column)),
          line(line), column(column) {}
    std::size_t line;
    std::size_t column;
};

}  // namespace trisieve
