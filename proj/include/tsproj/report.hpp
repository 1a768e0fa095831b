#pragma once

#include "tsproj/baseline.hpp"
#include "tsproj/loo.hpp"
#include "tsproj/search.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>

namespace tsproj {

using json = nlohmann::ordered_json;

json elpd_to_json(const ElpdEstimate& e, double k_threshold = 0.7);
json order_to_json(const SarmaOrder& order);
json path_to_json(const SearchPath& path);
json joint_fit_to_json(const JointFit& fit);
json report_to_json(const OrderReport& report);
json baseline_to_json(const BaselineReport& report);

struct Comparison {
    SarmaOrder projpred;
    SarmaOrder baseline;
    ElpdEstimate projpred_elpd;
    ElpdEstimate baseline_elpd;
    ElpdDiff diff;  // projpred - baseline
    bool emboldened = false;
};

/// Zero lies strictly outside diff +- 1.64 se.
bool outside_interval(const ElpdDiff& diff, double z = 1.64);

Comparison compare_reports(const OrderReport& projpred, const BaselineReport& baseline);
json comparison_to_json(const Comparison& c);

/// Run-dependent fields, kept apart from the deterministic payload.
json metadata_block(const std::string& command);

/// Fixed-width summary of a report for terminal output.
void print_summary(std::ostream& out, const OrderReport& report);
void print_summary(std::ostream& out, const BaselineReport& report);
void print_summary(std::ostream& out, const Comparison& c);

}  // namespace tsproj
