#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace armid {

/// Broad failure class; the CLI prints it as the error category.
enum class ErrorKind {
  Range,
  Domain,
  Parse,
  UnsupportedFeature,
  IllConditioned,
  InfeasibleWorkspace,
  Config,
  DegenerateDataset,
  OutOfRange,
  TrainingDiverged,
  Contract,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::Parse, what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedFeatureError : public Error {
 public:
  explicit UnsupportedFeatureError(std::string element)
      : Error(ErrorKind::UnsupportedFeature, "unsupported URDF feature: " + element),
        element_(std::move(element)) {}
  const std::string& element() const noexcept { return element_; }

 private:
  std::string element_;
};

class TrainingDivergedError : public Error {
 public:
  explicit TrainingDivergedError(int epoch)
      : Error(ErrorKind::TrainingDiverged,
              "training diverged (non-finite loss) at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace armid
