#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vx/core/error.hpp"
#include "vx/core/rng.hpp"

namespace vx {

struct Axis {
    std::string name;
    std::vector<double> values;
};

/// Cartesian grid of hyper-parameter settings, ordered coordinate-wise.
/// A setting is a tuple of per-axis value indices.
class ParameterSpace {
public:
    using Setting = std::vector<size_t>;

    ParameterSpace() = default;
    explicit ParameterSpace(std::vector<Axis> axes) : axes_(std::move(axes)) {
        for (const auto& a : axes_) {
            detail::require_arg(!a.values.empty(), "axis '" + a.name + "' has no values");
            for (size_t i = 1; i < a.values.size(); ++i) {
                detail::require_arg(a.values[i - 1] < a.values[i], "axis '" + a.name + "' must be strictly increasing");
            }
        }
    }

    const std::vector<Axis>& axes() const { return axes_; }
    size_t dims() const { return axes_.size(); }

    size_t size() const {
        size_t s = 1;
        for (const auto& a : axes_) s *= a.values.size();
        return axes_.empty() ? 0 : s;
    }

    /// Row-major unflattening, last axis fastest.
    Setting setting(size_t flat) const {
        Setting s(axes_.size());
        for (size_t i = axes_.size(); i-- > 0;) {
            s[i] = flat % axes_[i].values.size();
            flat /= axes_[i].values.size();
        }
        return s;
    }

    std::vector<double> values(const Setting& s) const {
        std::vector<double> v(s.size());
        for (size_t i = 0; i < s.size(); ++i) v[i] = axes_[i].values[s[i]];
        return v;
    }

    static bool leq(const Setting& a, const Setting& b) {
        for (size_t i = 0; i < a.size(); ++i) {
            if (a[i] > b[i]) return false;
        }
        return true;
    }

private:
    std::vector<Axis> axes_;
};

struct Measurement {
    /// Throughput; higher is better.
    double speed = 0.0;
    /// Accuracy in [0, 1].
    double accuracy = 0.0;
};

struct OperatingPoint {
    ParameterSpace::Setting setting;
    double speed = 0.0;
    double accuracy = 0.0;

    friend bool operator==(const OperatingPoint&, const OperatingPoint&) = default;
};

inline bool strictly_dominates(double s1, double a1, double s2, double a2) { return s1 > s2 && a1 > a2; }

/// Points not strictly dominated on both coordinates. Among points with
/// identical (speed, accuracy) only the lexicographically smallest setting
/// is kept. Sorted by accuracy, then speed descending, then setting.
inline std::vector<OperatingPoint> pareto_frontier(std::vector<OperatingPoint> points) {
    std::sort(points.begin(), points.end(), [](const OperatingPoint& a, const OperatingPoint& b) {
        if (a.accuracy != b.accuracy) return a.accuracy < b.accuracy;
        if (a.speed != b.speed) return a.speed > b.speed;
        return a.setting < b.setting;
    });
    std::vector<OperatingPoint> out;
    for (size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (i > 0 && points[i - 1].accuracy == p.accuracy && points[i - 1].speed == p.speed) continue;
        bool dominated = false;
        for (const auto& o : points) {
            if (strictly_dominates(o.speed, o.accuracy, p.speed, p.accuracy)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) out.push_back(p);
    }
    return out;
}

/// Failure of the evaluator at a given setting.
class EvaluationError : public Error {
public:
    EvaluationError(ParameterSpace::Setting s, const std::string& what)
        : Error(ErrorKind::InvalidArgument, what), setting_(std::move(s)) {}
    const ParameterSpace::Setting& setting() const { return setting_; }

private:
    ParameterSpace::Setting setting_;
};

using Evaluator = std::function<Measurement(const ParameterSpace::Setting&)>;

struct ExploreResult {
    std::vector<OperatingPoint> frontier;
    std::vector<OperatingPoint> evaluated;
    size_t skipped = 0;
};

/// Visits settings in a seeded random order. Assuming speed does not
/// increase and accuracy does not decrease along every axis, a setting's
/// speed is bounded by the smallest speed measured at a setting below it and
/// its accuracy by the smallest accuracy measured at a setting above it.
/// When an evaluated point strictly beats both bounds the setting cannot be
/// Pareto-optimal and is skipped.
inline ExploreResult explore(const ParameterSpace& space, const Evaluator& eval, std::uint64_t seed = 0) {
    std::vector<size_t> order(space.size());
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    ExploreResult res;
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (size_t flat : order) {
        auto s = space.setting(flat);
        double s_hat = inf, a_hat = inf;
        for (const auto& e : res.evaluated) {
            if (ParameterSpace::leq(e.setting, s)) s_hat = std::min(s_hat, e.speed);
            if (ParameterSpace::leq(s, e.setting)) a_hat = std::min(a_hat, e.accuracy);
        }
        bool skip = false;
        if (s_hat < inf && a_hat < inf) {
            for (const auto& e : res.evaluated) {
                if (strictly_dominates(e.speed, e.accuracy, s_hat, a_hat)) {
                    skip = true;
                    break;
                }
            }
        }
        if (skip) {
            ++res.skipped;
            continue;
        }
        Measurement m;
        try {
            m = eval(s);
        } catch (const std::exception& ex) {
            std::ostringstream os;
            os << "evaluation failed at (";
            for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << space.axes()[i].name << "=" << space.axes()[i].values[s[i]];
            os << "): " << ex.what();
            throw EvaluationError(s, os.str());
        }
        res.evaluated.push_back({s, m.speed, m.accuracy});
    }
    res.frontier = pareto_frontier(res.evaluated);
    return res;
}

} // namespace vx
