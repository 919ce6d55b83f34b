#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "tetra/config.hpp"
#include "tetra/energy.hpp"
#include "tetra/groundstate.hpp"
#include "tetra/reduction.hpp"
#include "tetra/symmetry.hpp"

namespace tetra {

struct CheckResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string summary;  // one line
  nlohmann::json data;
  double seconds = 0.0;  // wall time, kept out of reports
};

// The nine acceptance properties. Expensive intermediate results (profile,
// scan, mid-window reductions) are computed once and shared between checks.
class CheckSuite {
 public:
  explicit CheckSuite(RunConfig cfg);

  CheckResult group(const GroupTable &reference = reference_table());  // 1
  CheckResult cones();                                                 // 2
  CheckResult ground_state();                                          // 3
  CheckResult kernel();                                                // 4
  CheckResult fixed_point_scaling();                                   // 5
  CheckResult expansion();                                             // 6
  CheckResult maximizer();                                             // 7
  CheckResult full_solution();                                         // 8
  CheckResult overlap_bounds();                                        // 9

  CheckResult run(int id);

  const RadialProfile &profile();
  const ReducedEnergyCurve &scan();
  const FullSolution &solution();
  const RunConfig &config() const { return cfg_; }

 private:
  struct MidRun {
    double h = 0.0;
    CorrectionReport report;
    std::optional<Coercivity> coercivity;
  };
  MidRun &mid_run(double eps, bool with_coercivity);

  RunConfig cfg_;
  std::unique_ptr<RadialProfile> profile_;
  std::unique_ptr<ReducedEnergyCurve> scan_;
  std::unique_ptr<FullSolution> solution_;
  std::map<double, MidRun> mid_;
};

nlohmann::json to_json(const RunConfig &c);
nlohmann::json to_json(const CheckResult &r);

}  // namespace tetra
