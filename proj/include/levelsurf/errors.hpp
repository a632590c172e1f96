#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace levelsurf {

/// A tetrahedron or triangle with (numerically) zero measure.
class DegenerateElement : public std::runtime_error {
public:
    DegenerateElement(const std::string& what, std::size_t index)
        : std::runtime_error(what + " (element " + std::to_string(index) + ")"), index_(index)
    {
    }
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Iterative method stopped at its iteration cap; carries the best estimate.
class NotConverged : public std::runtime_error {
public:
    NotConverged(const std::string& what, double estimate)
        : std::runtime_error(what), estimate_(estimate)
    {
    }
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

} // namespace levelsurf
