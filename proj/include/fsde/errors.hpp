#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsde {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Caller broke an API contract (length mismatch, too few samples, ...).
class ContractError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed outright (factorization, root finding).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure ran but could not reach the requested accuracy.
class AccuracyError : public NumericalError {
public:
  AccuracyError(const std::string& what, double achieved)
      : NumericalError(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

/// Trajectory left the finite range; `node` is the first bad grid index.
class DivergenceError : public NumericalError {
public:
  DivergenceError(const std::string& what, std::size_t node)
      : NumericalError(what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

private:
  std::size_t node_;
};

/// Fixed-point iteration did not meet its tolerance.
class ConvergenceError : public NumericalError {
public:
  ConvergenceError(const std::string& what, std::vector<double> deltas)
      : NumericalError(what), deltas_(std::move(deltas)) {}
  const std::vector<double>& deltas() const noexcept { return deltas_; }

private:
  std::vector<double> deltas_;
};

/// One or more ensemble members failed; carries their stream ids.
class EnsembleError : public NumericalError {
public:
  EnsembleError(const std::string& what, std::vector<std::uint64_t> failed)
      : NumericalError(what), failed_(std::move(failed)) {}
  const std::vector<std::uint64_t>& failed_streams() const noexcept { return failed_; }

private:
  std::vector<std::uint64_t> failed_;
};

}  // namespace fsde
