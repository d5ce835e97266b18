#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace vrpqaoa::detail {

// Neumaier-compensated accumulator.  Energy evaluation folds penalty terms
// of magnitude ~A that cancel down to a route cost orders of magnitude
// smaller; plain summation loses enough bits there to matter at the
// published tolerances.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// A double plus the rounding residual left behind while accumulating into
// it.  Model builders fold penalty terms of magnitude ~A onto weights that
// are orders of magnitude smaller; the residual keeps the exact real value
// of each coefficient recoverable, so sums in which the penalty parts
// cancel (feasible configurations) come out exact instead of carrying
// ~A*epsilon noise.
struct TwoFold {
    double value = 0.0;
    double residual = 0.0;

    void add(double v) {
        const double s = value + v;
        if (std::abs(value) >= std::abs(v))
            residual += (value - s) + v;
        else
            residual += (v - s) + value;
        value = s;
    }

    // re-split so that value is the correctly rounded total
    void normalize() {
        const double s = value + residual;
        residual = (value - s) + residual;
        value = s;
    }
};

// shortest representation that parses back to the same double
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace vrpqaoa::detail
