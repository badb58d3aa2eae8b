#pragma once

#include <stdexcept>

namespace gaitopt {

struct InvalidArgument : std::runtime_error { using std::runtime_error::runtime_error; };
struct NumericalFailure : std::runtime_error { using std::runtime_error::runtime_error; };
struct FormatError : std::runtime_error { using std::runtime_error::runtime_error; };
struct VersionError : std::runtime_error { using std::runtime_error::runtime_error; };
struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };
struct IoError : std::runtime_error { using std::runtime_error::runtime_error; };
struct Exhausted : std::runtime_error { using std::runtime_error::runtime_error; };

}  // namespace gaitopt
