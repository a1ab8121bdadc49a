#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace regtune {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  uint64_t seed = 20260825ULL;
  std::string out_dir = "acceptance_out";
  std::vector<int> only;  // empty means all ten criteria
};

// Runs the release gate. Each criterion prints one pass/fail line to log and
// lands in the returned vector.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            std::ostream& log);

// Reduced-scale end-to-end pipeline executed twice from one seed; returns
// true when every emitted CSV/JSON/SVG byte-matches between the two runs.
bool verify_determinism(uint64_t seed, const std::string& out_dir,
                        std::ostream& log);

}  // namespace regtune
