#pragma once
#include <stdexcept>
#include <string>

// Error taxonomy shared by the library and the CLI exit-code contract:
// domain/admissibility violations -> exit 2, resource caps -> exit 3.

namespace elld {

struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// admissibility violation; carries the smallest offending prime
struct admissibility_error : domain_error {
  long long offending_prime;
  admissibility_error(const std::string& msg, long long p)
      : domain_error(msg), offending_prime(p) {}
};

struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// quadrature or series failed to reach the requested tolerance
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace elld
