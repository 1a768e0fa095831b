#pragma once

#include <span>
#include <string>
#include <vector>

namespace tsproj {

struct RhatResult {
    double value = 1.0;
    bool zero_variance = false;
};

/// Rank-normalized split-Rhat: the maximum of the bulk and folded (tail)
/// versions. Constant draws report 1.0 with `zero_variance` set.
RhatResult split_rhat(std::span<const std::vector<double>> chains);

/// Multi-chain effective sample size (autocorrelations summed over
/// consecutive pairs until the first negative pair sum).
double effective_sample_size(std::span<const std::vector<double>> chains);

/// Bulk ESS: effective_sample_size of the rank-normalized split chains.
double bulk_ess(std::span<const std::vector<double>> chains);

struct ParameterDiagnostics {
    std::string name;
    double rhat = 1.0;
    double ess = 0.0;
    bool zero_variance = false;
};

ParameterDiagnostics diagnose(std::string name, std::span<const std::vector<double>> chains);

double normal_quantile(double p);

double normal_cdf(double x);

}  // namespace tsproj
