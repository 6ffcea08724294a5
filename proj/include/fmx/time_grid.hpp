#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "fmx/error.hpp"

namespace fmx {

/// Graded mesh t_j = T (j/N)^q, j = 0..N.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps, double grading = 1.0)
        : horizon_(horizon), steps_(steps), grading_(grading)
    {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("TimeGrid: horizon must be positive");
        if (steps < 1) throw DomainError("TimeGrid: need at least one step");
        if (!(grading >= 1.0) || !std::isfinite(grading)) throw DomainError("TimeGrid: grading exponent must be >= 1");
        nodes_.resize(steps + 1);
        const double n = static_cast<double>(steps);
        for (std::size_t j = 0; j <= steps; ++j) nodes_[j] = horizon * std::pow(static_cast<double>(j) / n, grading);
        nodes_[steps] = horizon;
        for (std::size_t j = 1; j <= steps; ++j)
            if (!(nodes_[j] > nodes_[j - 1])) throw DomainError("TimeGrid: nodes not strictly increasing (grading too strong)");
    }

    /// Number of intervals N; the grid has N + 1 nodes.
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] double grading() const noexcept { return grading_; }
    [[nodiscard]] double operator[](std::size_t j) const { return nodes_[j]; }
    [[nodiscard]] double step(std::size_t n) const { return nodes_[n] - nodes_[n - 1]; }
    [[nodiscard]] double min_step() const { return nodes_[1] - nodes_[0]; }
    [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }

    [[nodiscard]] TimeGrid refined(std::size_t factor = 2) const { return TimeGrid(horizon_, steps_ * factor, grading_); }

    /// Index n with t_{n} <= t <= t_{n+1} (clamped to the last interval).
    [[nodiscard]] std::size_t locate(double t) const
    {
        if (!(t >= 0.0 && t <= horizon_)) throw DomainError("TimeGrid::locate: time outside [0, T]");
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
        std::size_t n = static_cast<std::size_t>(it - nodes_.begin());
        n = n == 0 ? 0 : n - 1;
        return std::min(n, steps_ - 1);
    }

private:
    double horizon_;
    std::size_t steps_;
    double grading_;
    std::vector<double> nodes_;
};

/// Samples of a function on the nodes of a TimeGrid.
template <class V = double>
struct SampledFunction {
    TimeGrid grid;
    std::vector<V> values;

    SampledFunction(TimeGrid g, std::vector<V> v) : grid(std::move(g)), values(std::move(v)) { validate(); }

    template <class F>
    static SampledFunction sample(const TimeGrid& g, F&& f)
    {
        std::vector<V> v(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) v[j] = static_cast<V>(f(g[j]));
        return SampledFunction(g, std::move(v));
    }

    void validate() const
    {
        if (values.size() != grid.size())
            throw DomainError("SampledFunction: " + std::to_string(values.size()) + " values for " +
                              std::to_string(grid.size()) + " nodes");
        for (const V& x : values)
            if (!std::isfinite(std::abs(x))) throw DomainError("SampledFunction: non-finite sample");
    }

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] const V& operator[](std::size_t j) const { return values[j]; }

    /// Piecewise-linear interpolant at t in [0, T].
    [[nodiscard]] V at(double t) const
    {
        const std::size_t n = grid.locate(t);
        const double t0 = grid[n];
        const double h = grid.step(n + 1);
        const double s = (t - t0) / h;
        return values[n] * (1.0 - s) + values[n + 1] * s;
    }
};

} // namespace fmx
