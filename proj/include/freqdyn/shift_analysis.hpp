#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freqdyn/weights.hpp"

namespace freqdyn {

// Finite-horizon estimates of 1/||B_w||, r_w, lambda_w, r_{p,w}. Every
// quantity is a point estimate with an oscillation width; verdicts that
// consume them must stay width-aware.
struct ShiftQuantities {
    double norm_inv = 0.0;
    double r_w = 0.0;
    double lambda_w = 0.0;
    double r_pw = 0.0;
    double width_rw = 0.0;
    double width_lambda = 0.0;
    double width_rpw = 0.0;
    double horizon_used = 0.0;

    double width() const;
    std::string csv_row() const;  // norm_inv,r_w,lambda_w,r_pw,width,horizon
    // sampled prefix means (n, log_product(1,n)/n) for plots
    std::vector<std::pair<double, double>> prefix_means;
};

// Estimates over n sampled on a geometric grid of [H/2, H]; run-structured
// kinds additionally sample every run boundary (their liminf/limsup live
// there). Throws std::overflow_error when prefix means exceed 700.
ShiftQuantities shift_quantities(const WeightSeq& w, double horizon, double ell_p,
                                 uint64_t seed = 1234);

enum class FhcStatus { Satisfied, NotSatisfied, Inconclusive };
struct FhcVerdict {
    FhcStatus status;
    double tail_ratio;  // mass of [H/2,H] terms relative to the full partial sum
};
// Convergence check of sum_n (w_1...w_n)^{-1} e_n in l^p via the tail of
// sum_n (w_1...w_n)^{-p}.
FhcVerdict fhc_verdict(const WeightSeq& w, double ell_p, uint64_t horizon);

// A set of positive multipliers; countability/unboundedness are structural
// flags set by the caller (they cannot be inferred from a finite list).
struct LambdaSet {
    std::vector<double> values;
    bool countable = true;
    bool unbounded = false;

    void validate() const;
    double inf() const;
    double sup() const;
    size_t effective_size() const { return unbounded ? values.size() + 1 : values.size(); }
};

enum class CommonFhcStatus { NonEmpty, Empty, Unknown };
struct CommonFhcVerdict {
    CommonFhcStatus status;
    std::string reason;
    double gap_lo = 0.0, gap_hi = 0.0;  // undecidable multiplier interval when Unknown
};
CommonFhcVerdict common_fhc_verdict(const WeightSeq& w, double ell_p, const LambdaSet& lambda,
                                    const ShiftQuantities& q);

struct PairEquiv {
    bool comparable;
    double C;  // exp(max |D|) when comparable
};
// Bounded-ratio check of the partial products of two weights (the finite
// family comparability criterion).
PairEquiv pair_equiv_check(const WeightSeq& w1, const WeightSeq& w2, uint64_t horizon);

}  // namespace freqdyn
