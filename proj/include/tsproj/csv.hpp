#pragma once

#include "tsproj/timeseries.hpp"

#include <filesystem>
#include <optional>
#include <span>

namespace tsproj {

/// Loads a single-column (value) or two-column (time index, value) CSV.
/// A non-numeric first row is treated as a header. Missing or non-finite
/// entries raise IoError naming the file and line.
TimeSeries load_series_csv(const std::filesystem::path& path, std::optional<int> period = std::nullopt);

/// Writes "t,value" rows with a header. Values use max_digits10 so a reload is bit-exact.
void write_series_csv(const std::filesystem::path& path, std::span<const double> values);

}  // namespace tsproj
