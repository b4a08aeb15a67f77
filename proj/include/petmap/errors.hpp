#pragma once

#include <stdexcept>
#include <string>

namespace petmap {

struct DegenerateConfiguration : std::runtime_error {
  explicit DegenerateConfiguration(const std::string &msg) : std::runtime_error(msg) {}
};

struct TooFewPoints : std::runtime_error {
  explicit TooFewPoints(const std::string &msg) : std::runtime_error(msg) {}
};

struct PointAtInfinity : std::runtime_error {
  explicit PointAtInfinity(const std::string &msg) : std::runtime_error(msg) {}
};

struct StaleFrame : std::runtime_error {
  explicit StaleFrame(const std::string &msg) : std::runtime_error(msg) {}
};

struct NonMonotonicTimestamp : std::runtime_error {
  explicit NonMonotonicTimestamp(const std::string &msg) : std::runtime_error(msg) {}
};

struct RoiOutOfBounds : std::runtime_error {
  explicit RoiOutOfBounds(const std::string &msg) : std::runtime_error(msg) {}
};

struct InvalidDomain : std::runtime_error {
  explicit InvalidDomain(const std::string &msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string &msg) : std::runtime_error(msg) {}
};

struct StorageFailure : std::runtime_error {
  explicit StorageFailure(const std::string &msg) : std::runtime_error(msg) {}
};

struct InvalidRange : std::runtime_error {
  explicit InvalidRange(const std::string &msg) : std::runtime_error(msg) {}
};

struct InvalidConfig : std::runtime_error {
  explicit InvalidConfig(const std::string &msg) : std::runtime_error(msg) {}
};

}  // namespace petmap
