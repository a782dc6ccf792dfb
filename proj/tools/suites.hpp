#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dflow::suites {

struct SuiteResult {
  std::string name;
  int criterion = 0;
  bool pass = false;
  std::string summary;
  nlohmann::json details;

  nlohmann::json to_json() const;
};

struct SuiteInfo {
  std::string name;
  int criterion;
  std::function<SuiteResult()> run;
};

// Acceptance suites in criterion order; the appendix criterion is split in three.
const std::vector<SuiteInfo>& registry();
const SuiteInfo* find(const std::string& name);

SuiteResult exactness();
SuiteResult oracle_equivalence();
SuiteResult duration();
SuiteResult coloring();
SuiteResult step_bounds();
SuiteResult exponent();
SuiteResult appendix_norm();
SuiteResult appendix_map();
SuiteResult appendix_divergence();

}  // namespace dflow::suites
