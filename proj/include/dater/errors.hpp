#pragma once

#include <stdexcept>
#include <string>

namespace dater {

// Base class for every error raised by this library. Catching dater::Error
// catches anything the pipeline can throw; callers that care about a
// specific failure catch the concrete type declared next to the module
// that raises it.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

} // namespace dater
