#pragma once

#include <string>
#include <vector>

#include "json.hpp"

// Golden request/response suite for the wire protocol. A suite file is a
// JSON object {"cases": [...]}; each case has name, endpoint, a request
// body (`request` as JSON or `raw_request` as literal text), the expected
// HTTP status and, for 2xx cases, the expected response body.
namespace advqa::conformance {

struct Case {
  std::string name;
  std::string endpoint;
  nlohmann::json request;
  std::string raw_request;  // used instead of `request` when non-empty
  int status = 200;
  nlohmann::json response;
};

enum class Mode {
  kExact,       // values equal, floats within 1e-9
  kSchemaOnly,  // same keys and JSON types; any values
};

struct CaseResult {
  std::string name;
  bool passed = false;
  std::string detail;  // first mismatch, empty on success
};

std::vector<Case> parse_suite(const nlohmann::json& doc);
std::vector<Case> load_suite(const std::string& path);
nlohmann::json suite_to_json(const std::vector<Case>& cases);

// Empty string when `actual` matches `expected`, else a description of the
// first mismatch with its JSON path.
std::string compare(const nlohmann::json& expected, const nlohmann::json& actual,
                    Mode mode);

// Sends every case to `base_url` and checks status and body. Error cases
// (non-2xx) only require the status and an {"error": string} body.
std::vector<CaseResult> run_suite(const std::string& base_url,
                                  const std::vector<Case>& cases, Mode mode);

// Replays the requests of `cases` against `base_url` and stores the
// observed status and body as the new expectations.
std::vector<Case> record_suite(const std::string& base_url, std::vector<Case> cases);

}  // namespace advqa::conformance
