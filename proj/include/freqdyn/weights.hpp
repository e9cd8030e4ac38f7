#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace freqdyn {

enum class WeightKind { Constant, Rational2, CostakisSambarino, FourBlock, Tabulated, Custom };

// A positive weight sequence (w_n)_{n>=1} with closed-form log-products over
// index ranges. Piecewise kinds (Constant, FourBlock) evaluate products per
// constant run, so ranges far beyond 2^63 are addressable; index arguments
// are therefore integer-valued doubles.
class WeightSeq {
public:
    struct Run {  // maximal constant run [lo, hi], 1-based inclusive
        double lo, hi, value;
        // hi - lo + 1 computed structurally; positions beyond 2^53 round in
        // double while short runs (length ~k) must keep their exact lengths
        double len;
    };

    static WeightSeq constant(double c);
    static WeightSeq rational2();                     // w_n = ((n+1)/n)^2
    static WeightSeq costakis_sambarino(double lam);  // w_n = 1 + lam/n
    // Block layout of the four-value example; runs materialized for blocks
    // k = 2..k_max (k_max <= 30 so run bounds stay inside double range).
    static WeightSeq four_block(double a, double b, double c, double d, int k_max = 24);
    static WeightSeq tabulated(std::vector<double> w);  // w[0] is w_1
    static WeightSeq custom(std::function<double(uint64_t)> f, double sup_hint);

    // const:2 | rational2 | cosam:1.0 | fourblock:1,2,3,4 | table:@file.csv
    static WeightSeq parse(const std::string& spec);

    WeightKind kind() const { return kind_; }
    std::string spec_string() const { return spec_; }

    double value(uint64_t n) const;      // w_n, n >= 1
    double log_value(uint64_t n) const;  // ln w_n

    // sum_{n=i..j} ln w_n, closed form per kind; throws std::domain_error if i > j or i < 1.
    double log_product(double i, double j) const;

    double sup_value(double horizon) const;  // sup_{1<=n<=H} w_n
    bool piecewise() const { return kind_ == WeightKind::Constant || kind_ == WeightKind::FourBlock; }

    // Constant runs clipped to [1, horizon] (piecewise kinds only).
    std::vector<Run> runs(double horizon) const;
    // Largest index the closed form covers exactly (infinite for analytic kinds).
    double max_closed_index() const;

private:
    WeightKind kind_ = WeightKind::Constant;
    std::string spec_;
    double c_ = 1.0;                       // Constant value / CostakisSambarino lambda
    std::vector<Run> runs_;                // FourBlock run table
    std::vector<double> table_;            // Tabulated values
    std::vector<double> table_prefix_;     // prefix sums of ln w
    std::function<double(uint64_t)> fn_;   // Custom
    double sup_hint_ = 1.0;
};

}  // namespace freqdyn
