#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace hadest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotSymmetric : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class RankDeficientDesign : public Error {
 public:
  using Error::Error;
};

/// Context attached to a singular Q⊙Q system. Design fields are filled in
/// once the failure is attributed to a regression design.
struct SingularityInfo {
  double min_pivot = 0.0;
  double threshold = 0.0;
  std::optional<long> n;
  std::optional<long> p;
  std::optional<long> minimal_n;
  std::optional<std::uint64_t> master_seed;
  std::optional<long> trial;
};

class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& what, SingularityInfo info)
      : Error(what), info_(std::move(info)) {}

  const SingularityInfo& info() const noexcept { return info_; }

 private:
  SingularityInfo info_;
};

class LeverageOne : public Error {
 public:
  using Error::Error;
};

class DegenerateCoordinate : public Error {
 public:
  using Error::Error;
};

class InapplicableRegime : public Error {
 public:
  using Error::Error;
};

class MissingDof : public Error {
 public:
  using Error::Error;
};

class NegativeVariance : public Error {
 public:
  using Error::Error;
};

class ZeroDenominator : public Error {
 public:
  using Error::Error;
};

class InsufficientReps : public Error {
 public:
  using Error::Error;
};

}  // namespace hadest
