#pragma once
#include <stdexcept>

namespace mgbid {

// Invalid user-supplied configuration; the message names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller broke an operation precondition.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// An input file does not match the expected schema.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A user-supplied callable could not be evaluated (NaN, out of domain, ...).
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// In-memory data is degenerate for the requested operation (e.g. clustering
// identical rows); the message names the condition.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mgbid
