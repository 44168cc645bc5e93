#pragma once

#include <stdexcept>
#include <string>

namespace capcom {

// Base for every error raised by the library. Callers that only need a
// message can catch this; the derived types exist so tests and the CLI can
// tell failure modes apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& locus, const std::string& what)
      : Error(locus + ": " + what), locus_(locus) {}
  const std::string& locus() const noexcept { return locus_; }

 private:
  std::string locus_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DuplicateIdError : public ValidationError {
 public:
  explicit DuplicateIdError(const std::string& id)
      : ValidationError("duplicate image_id: " + id), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class UnknownIdError : public ValidationError {
 public:
  explicit UnknownIdError(const std::string& id)
      : ValidationError("unknown id: " + id), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

// Network failure that survived all retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Service answered, but the payload does not match the wire contract.
class MalformedResponseError : public Error {
 public:
  using Error::Error;
};

// Captioner returned fewer captions than requested.
class ShortResponseError : public MalformedResponseError {
 public:
  using MalformedResponseError::MalformedResponseError;
};

// Prompt does not fit the summarizer context; callers may retry with fewer
// candidates.
class ContextLengthError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class ZeroVectorError : public Error {
 public:
  using Error::Error;
};

class AnnotatorUnavailableError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Human-eval protocol violations; the REST layer maps these to 4xx codes.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class PoolExhaustedError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class DuplicateSubmissionError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class RatingRangeError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

}  // namespace capcom
