#pragma once

#include <stdexcept>

namespace kakeya {

// A computation would exceed the configured work budget.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A certified bound or postcondition does not hold.
struct BoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A file could not be opened, read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}
