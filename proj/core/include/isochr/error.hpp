#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace isochr {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or option combination.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Raw file whose byte count does not match the requested dims and dtype.
class SizeMismatchError : public Error {
 public:
  SizeMismatchError(std::uintmax_t expected, std::uintmax_t actual)
      : Error("size mismatch: expected " + std::to_string(expected) +
              " bytes, got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}
  std::uintmax_t expected() const noexcept { return expected_; }
  std::uintmax_t actual() const noexcept { return actual_; }

 private:
  std::uintmax_t expected_;
  std::uintmax_t actual_;
};

class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(std::size_t index)
      : Error("non-finite sample at index " + std::to_string(index)), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class DimsMismatchError : public Error {
 public:
  using Error::Error;
};

/// Stored checksum does not match the data it covers.
class ChecksumError : public Error {
 public:
  using Error::Error;
};

class UnsupportedCodecError : public Error {
 public:
  explicit UnsupportedCodecError(unsigned codec_id)
      : Error("unsupported codec id " + std::to_string(codec_id)), codec_id_(codec_id) {}
  unsigned codec_id() const noexcept { return codec_id_; }

 private:
  unsigned codec_id_;
};

/// Structurally malformed archive (truncation, bad offsets).
class FormatError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionMismatchError : public FormatError {
 public:
  VersionMismatchError(unsigned found, unsigned supported)
      : FormatError("archive version " + std::to_string(found) +
                    " not supported (expected " + std::to_string(supported) + ")"),
        found_(found) {}
  unsigned found() const noexcept { return found_; }

 private:
  unsigned found_;
};

class NoSuchIsovalueError : public Error {
 public:
  explicit NoSuchIsovalueError(double k)
      : Error("isovalue " + std::to_string(k) + " is not a stored candidate"), k_(k) {}
  double isovalue() const noexcept { return k_; }

 private:
  double k_;
};

class InsufficientAccuracyError : public Error {
 public:
  InsufficientAccuracyError(double requested, double stored)
      : Error("requested accuracy " + std::to_string(requested) +
              " exceeds stored accuracy " + std::to_string(stored)),
        requested_(requested),
        stored_(stored) {}
  double requested() const noexcept { return requested_; }
  double stored() const noexcept { return stored_; }

 private:
  double requested_;
  double stored_;
};

}  // namespace isochr
