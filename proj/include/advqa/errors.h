#pragma once

#include <stdexcept>
#include <string>

namespace advqa {

// Base for every runtime failure raised by the toolkit. Contract violations
// (bad indices, mismatched lengths) use std::out_of_range and
// std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed command line or unknown enum tag.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Dataset could not be parsed. `locus` names the line or record.
class DatasetError : public Error {
 public:
  DatasetError(std::string locus, std::string detail)
      : Error(locus + ": " + detail),
        locus_(std::move(locus)),
        detail_(std::move(detail)) {}
  const std::string& locus() const { return locus_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string locus_;
  std::string detail_;
};

class GatewayError : public Error {
 public:
  using Error::Error;
};

// Transport failed twice in a row.
class GatewayUnreachable : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

// Server answered with a non-2xx status.
class RemoteModelError : public GatewayError {
 public:
  RemoteModelError(int status, const std::string& body)
      : GatewayError("remote model error (HTTP " + std::to_string(status) +
                     "): " + body),
        status_(status),
        body_(body) {}
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

// Response did not match the wire schema.
class ProtocolError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

// Too many examples failed for the campaign to be meaningful.
class CampaignError : public Error {
 public:
  explicit CampaignError(const std::string& what, bool unreachable = false)
      : Error(what), unreachable_(unreachable) {}
  // True when every failure was a transport failure.
  bool unreachable() const { return unreachable_; }

 private:
  bool unreachable_;
};

}  // namespace advqa
