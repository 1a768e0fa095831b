#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tsproj {

/// Invalid input shape, range or flag combination.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An AR polynomial has a root on or inside the unit circle.
class StationarityError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

/// A design matrix is (numerically) rank deficient. `columns()` lists the
/// columns that lie in the span of the columns before them.
class RankDeficiencyError : public std::runtime_error {
public:
    RankDeficiencyError(const std::string& what, std::vector<int> columns)
        : std::runtime_error(what), columns_(std::move(columns)) {}

    const std::vector<int>& columns() const noexcept { return columns_; }

private:
    std::vector<int> columns_;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The reference fit did not converge and the procedure cannot proceed.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tsproj
