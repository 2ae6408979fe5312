#pragma once

#include <stdexcept>
#include <string>

namespace spikes {

// Argument outside the mathematical domain of an operation (non-distant
// spike, log of a non-positive eigenvalue, bad penalty, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iterative eigensolver failed or produced an inadmissible spectrum.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace spikes
