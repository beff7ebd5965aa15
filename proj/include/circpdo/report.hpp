#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace circpdo {

using ojson = nlohmann::ordered_json;

// one verified property: residual against a pinned threshold
struct Check {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double threshold = 0.0;
  std::string note;
};

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

// Report layout is versioned and embeds the convention set so numbers are
// interpretable without the source. Everything except meta is a pure
// function of (command, params, seed).
ojson make_report(const std::string& command, const ojson& params,
                  std::uint64_t seed, const std::vector<Check>& checks,
                  const std::string& outcome);

// determinism contract: reports agree after dropping meta
std::string report_payload(const ojson& report);

ojson checks_to_json(const std::vector<Check>& checks);

}  // namespace circpdo
