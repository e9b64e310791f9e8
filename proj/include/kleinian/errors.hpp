#pragma once

#include <stdexcept>
#include <string>

namespace kleinian {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// groups

class NonHyperbolicGenerator : public Error {
 public:
  explicit NonHyperbolicGenerator(int generator)
      : Error("generator " + std::to_string(generator) + " is not hyperbolic"),
        generator_(generator) {}
  int generator() const { return generator_; }

 private:
  int generator_;
};

/// Ping-pong failure. Letters are encoded as 2*generator (+1 for the inverse).
class MarginViolation : public Error {
 public:
  MarginViolation(int first, int second, const std::string& what)
      : Error(what), first_(first), second_(second) {}
  int first_letter() const { return first_; }
  int second_letter() const { return second_; }

 private:
  int first_;
  int second_;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// counting

class IncompleteCensus : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// One-sided: absence of a certificate is not a refutation.
class NoCertificate : public Error {
 public:
  using Error::Error;
};

// sequences

class AllZero : public Error {
 public:
  using Error::Error;
};

/// Carries the first offending index pair (n, m) or (k, l).
class WitnessedViolation : public Error {
 public:
  WitnessedViolation(const std::string& what, long first, long second)
      : Error(what + " at (" + std::to_string(first) + ", " + std::to_string(second) + ")"),
        first_(first), second_(second) {}
  long first() const { return first_; }
  long second() const { return second_; }

 private:
  long first_;
  long second_;
};

class NotSubmultiplicative : public WitnessedViolation {
 public:
  NotSubmultiplicative(long n, long m)
      : WitnessedViolation("u_{n+m} > u_n u_m", n, m) {}
};

class HypothesisViolated : public WitnessedViolation {
 public:
  using WitnessedViolation::WitnessedViolation;
};

// patterson

class DegenerateNormalizer : public Error {
 public:
  using Error::Error;
};

class MismatchedConstruction : public Error {
 public:
  using Error::Error;
};

// cli

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kleinian
