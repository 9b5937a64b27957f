// Error hierarchy. DataError maps to CLI exit code 2, ModelError to 3.
#pragma once

#include <stdexcept>
#include <string>

namespace revcon {

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public Error {
public:
  using Error::Error;
};

class ModelError : public Error {
public:
  using Error::Error;
};

// --- corpus / ingestion ---

class MalformedRecord : public DataError {
public:
  MalformedRecord(std::size_t line, const std::string& reason)
      : DataError("malformed record at line " + std::to_string(line) + ": " + reason),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class DuplicateId : public DataError {
public:
  using DataError::DataError;
};

class UnknownAspectName : public DataError {
public:
  using DataError::DataError;
};

class EmptyReview : public DataError {
public:
  using DataError::DataError;
};

class UnlabeledComments : public DataError {
public:
  using DataError::DataError;
};

class NotACandidate : public DataError {
public:
  using DataError::DataError;
};

class EmptyInput : public DataError {
public:
  using DataError::DataError;
};

class UnknownRpcId : public DataError {
public:
  using DataError::DataError;
};

class ConflictingLabels : public DataError {
public:
  using DataError::DataError;
};

class BadLabelToken : public DataError {
public:
  using DataError::DataError;
};

// --- metrics / evaluation ---

class LengthMismatch : public DataError {
public:
  using DataError::DataError;
  LengthMismatch(std::size_t a, std::size_t b)
      : DataError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class EmptyLabelList : public DataError {
public:
  using DataError::DataError;
};

class MissingGold : public DataError {
public:
  using DataError::DataError;
};

class MissingLabels : public DataError {
public:
  using DataError::DataError;
};

// --- models ---

class EmptyTrainingSet : public ModelError {
public:
  using ModelError::ModelError;
};

class SingleClassTrainingSet : public ModelError {
public:
  using ModelError::ModelError;
};

class EmptyAfterTokenization : public ModelError {
public:
  using ModelError::ModelError;
};

class SummaryAspectRequested : public ModelError {
public:
  using ModelError::ModelError;
};

class EmptyText : public DataError {
public:
  using DataError::DataError;
};

class NotADistribution : public ModelError {
public:
  using ModelError::ModelError;
};

class IncompatibleCheckpoint : public ModelError {
public:
  using ModelError::ModelError;
};

class TooFewReviews : public DataError {
public:
  using DataError::DataError;
};

// --- external service ---

class LlmError : public Error {
public:
  using Error::Error;
};

class AuthError : public LlmError {
public:
  using LlmError::LlmError;
};

class RateLimitExhausted : public LlmError {
public:
  using LlmError::LlmError;
};

class ServiceError : public LlmError {
public:
  using LlmError::LlmError;
};

class MissingPlaceholder : public DataError {
public:
  using DataError::DataError;
};

}  // namespace revcon
