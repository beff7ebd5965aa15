#include "circpdo/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

namespace circpdo {

namespace {

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// residuals can be infinite (decay fits on compactly supported data); JSON
// has no inf, so clamp to a tagged string
ojson json_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

}  // namespace

ojson checks_to_json(const std::vector<Check>& checks) {
  ojson arr = ojson::array();
  for (const auto& c : checks) {
    ojson j;
    j["name"] = c.name;
    j["pass"] = c.pass;
    j["residual"] = json_real(c.residual);
    j["threshold"] = json_real(c.threshold);
    if (!c.note.empty()) j["note"] = c.note;
    arr.push_back(std::move(j));
  }
  return arr;
}

ojson make_report(const std::string& command, const ojson& params,
                  std::uint64_t seed, const std::vector<Check>& checks,
                  const std::string& outcome) {
  ojson j;
  j["schema"] = "circpdo-report/1";
  j["meta"]["timestamp"] = timestamp_utc();
  j["conventions"]["sign_zero"] = "sign(0) = +1 in the frequency-sign operator";
  j["conventions"]["quantize_k0"] =
      "column k = 0 takes only the degree-0 plus component";
  j["conventions"]["extension_rule"] =
      "theta_g(v) = g^{-1} theta(v g^{-1}) g (structure-group covariant)";
  j["conventions"]["schwinger_normalization"] =
      "(1/4) tr(eps [eps,a] [eps,b])";
  j["conventions"]["trace_window"] = "interior modes |m| <= K/2";
  j["command"] = command;
  j["params"] = params;
  j["seed"] = seed;
  j["checks"] = checks_to_json(checks);
  j["outcome"] = outcome;
  return j;
}

std::string report_payload(const ojson& report) {
  ojson copy = report;
  copy.erase("meta");
  return copy.dump(2) + "\n";
}

}  // namespace circpdo
