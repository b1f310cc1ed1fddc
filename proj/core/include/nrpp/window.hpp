#pragma once

#include <string>
#include <vector>

namespace nrpp {

struct Interval {
    double lo{0.0};
    double hi{0.0};

    [[nodiscard]] double length() const noexcept { return hi - lo; }
};

/// Observation window: a finite union of disjoint, sorted closed intervals
/// inside [0, tau].
class Window {
public:
    Window() = default;
    /// Sorts and merges overlapping or touching intervals; drops empty ones.
    explicit Window(std::vector<Interval> intervals);

    [[nodiscard]] static Window whole(double horizon);

    [[nodiscard]] const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    [[nodiscard]] bool empty() const noexcept { return intervals_.empty(); }
    [[nodiscard]] double measure() const noexcept;
    [[nodiscard]] bool contains(double t) const noexcept;
    [[nodiscard]] bool within(double horizon) const noexcept;

    /// Intersection with [lo, hi].
    [[nodiscard]] Window clip(double lo, double hi) const;
    /// [lo, hi] minus this window.
    [[nodiscard]] Window complement(double lo, double hi) const;

    /// JSON list of [lo, hi] pairs.
    [[nodiscard]] std::string to_json() const;
    [[nodiscard]] static Window from_json(const std::string& text);

private:
    std::vector<Interval> intervals_;
};

} // namespace nrpp
