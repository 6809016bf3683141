#pragma once

#include <stdexcept>
#include <string>

namespace plugrisk {

// Every precondition or invariant failure in the library surfaces as this type.
// The message text is part of the contract (tests match on it).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace plugrisk
