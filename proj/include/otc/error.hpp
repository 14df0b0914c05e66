#pragma once

#include <stdexcept>
#include <string>

namespace otc {

/// Malformed or inconsistent user input (bad graph, bad distribution, bad flag).
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed to reach its tolerance or produced non-finite values.
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace otc
