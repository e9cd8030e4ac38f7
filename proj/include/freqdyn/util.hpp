#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace freqdyn {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Log-sum-exp accumulation
// ---------------------------------------------------------------------------

// Running log(sum exp(t_i)) over a stream of log-scale terms. The anchor can
// be shared between parallel accumulators (full sum vs. subset sum), which
// keeps their ratio independent of a common additive shift of the terms.
struct LogSumAcc {
    double anchor = kNegInf;  // current shift M
    double sum = 0.0;         // sum of exp(t - M)

    void rescale(double new_anchor) {
        if (new_anchor == anchor) return;
        if (sum > 0.0) sum *= std::exp(anchor - new_anchor);
        anchor = new_anchor;
    }
    void add(double log_term) {
        if (log_term == kNegInf) return;
        if (log_term > anchor) rescale(log_term);
        sum += std::exp(log_term - anchor);
    }
    bool empty() const { return !(sum > 0.0); }
    double log_value() const { return empty() ? kNegInf : anchor + std::log(sum); }
};

// Signed coefficient in log scale: sign * exp(logmag). sign==0 means zero.
struct LogCoef {
    int sign = 0;
    double logmag = kNegInf;

    static LogCoef from_double(double c) {
        if (c == 0.0) return {0, kNegInf};
        return {c > 0.0 ? 1 : -1, std::log(std::fabs(c))};
    }
    double to_double() const { return sign == 0 ? 0.0 : sign * std::exp(logmag); }
};

inline LogCoef log_add(LogCoef a, LogCoef b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.logmag < b.logmag) std::swap(a, b);
    const double d = std::exp(b.logmag - a.logmag);  // <= 1
    const double t = (a.sign == b.sign) ? 1.0 + d : 1.0 - d;
    if (t <= 0.0) return {0, kNegInf};  // exact cancellation
    return {a.sign, a.logmag + std::log(t)};
}

inline LogCoef log_scale(LogCoef a, int sign, double logmag) {
    if (a.sign == 0 || sign == 0) return {0, kNegInf};
    return {a.sign * sign, a.logmag + logmag};
}

// ---------------------------------------------------------------------------
// Misc numeric helpers
// ---------------------------------------------------------------------------

// Neumaier-compensated sum; deterministic for a fixed visiting order.
struct CompensatedSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double t = s + x;
        if (std::fabs(s) >= std::fabs(x)) c += (s - t) + x;
        else c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

// Locale-independent float formatting, 12 significant digits.
inline std::string fmt12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::string(buf);
}

// log(s)-fold iterated logarithm / exponential.
inline double iterated_log(double x, int s) {
    for (int i = 0; i < s; ++i) x = std::log(x);
    return x;
}
inline double iterated_exp(double x, int s) {
    for (int i = 0; i < s; ++i) x = std::exp(x);
    return x;
}

}  // namespace freqdyn
