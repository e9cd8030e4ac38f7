#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "freqdyn/sparse_vec.hpp"
#include "freqdyn/weights.hpp"

namespace freqdyn {

// ---------------------------------------------------------------------------
// Weighted shift actions on finitely supported vectors
// ---------------------------------------------------------------------------

// B_w: e_{k+1} -> w_{k+1} e_k (entry 0 is annihilated).
SparseVec apply_backward(const WeightSeq& w, const SparseVec& x);
// F_w: e_k -> e_{k+1} / w_{k+1}; right inverse of B_w on finite supports.
SparseVec apply_forward(const WeightSeq& w, const SparseVec& x);

struct ShiftWord {
    bool annihilated;
    double coefficient;  // meaningful when !annihilated
    uint64_t index;      // k + l - m
    int sign;            // of the coefficient
    double log_coefficient;
};
// Closed form of B_{w_num}^m F_{w_den}^l e_k. Single-weight usage passes the
// same weight twice. Valid for m, l far beyond anything iterable.
ShiftWord shift_word(const WeightSeq& w_num, const WeightSeq& w_den, uint64_t m, uint64_t l,
                     uint64_t k);
inline ShiftWord shift_word(const WeightSeq& w, uint64_t m, uint64_t l, uint64_t k) {
    return shift_word(w, w, m, l, k);
}

// ---------------------------------------------------------------------------
// C-type operators
// ---------------------------------------------------------------------------

enum class CTypeFlavor { General, CPlus, CPlusOne };

class CTypeParams {
public:
    // Explicit tables; sizes: v over blocks 1..B-1, phi over 0..B-1, b over
    // 0..B with b[0] = 0, w over 1..b[B]-1 (w[0] unused).
    static CTypeParams general(std::vector<double> v, std::vector<double> w,
                               std::vector<uint64_t> phi, std::vector<uint64_t> b);
    // Dyadic structure: level k in 1..K covers blocks n in [2^{k-1}, 2^k),
    // block length delta[k-1], v = 2^{-tau}, interior weight 2 up to
    // sigma_delta then 1. Block 0 is [0, b1) with weight 2 on its interior.
    static CTypeParams cplus_one(std::vector<uint64_t> delta, std::vector<uint64_t> tau,
                                 std::vector<uint64_t> sigma_delta, uint64_t b1 = 2);
    // delta = 4^k, tau = delta/4, sigma_delta = delta/2
    static CTypeParams reference_cplus_one(int levels = 8);
    // key-value text: flavor, b_horizon (levels), delta[k], tau[k], sigma_delta[k]
    static CTypeParams parse_config(const std::string& text);
    std::string config_string() const;

    void validate() const;  // throws std::invalid_argument on any breach

    CTypeFlavor flavor() const { return flavor_; }
    size_t block_count() const { return b_.size() - 1; }
    uint64_t b(size_t n) const { return b_.at(n); }
    uint64_t block_of(uint64_t index) const;  // throws past the materialized horizon
    uint64_t phi(uint64_t n) const;
    double v(uint64_t n) const;  // n >= 1
    double w(uint64_t j) const;  // j >= 1
    int levels() const { return (int)delta_.size(); }
    uint64_t delta_level(int k) const { return delta_.at(k - 1); }
    uint64_t tau_level(int k) const { return tau_.at(k - 1); }
    uint64_t sigma_level(int k) const { return sigma_.at(k - 1); }
    int level_of_block(uint64_t n) const;  // 0 for block 0

    // Interior product prod_{b_n < j < b_{n+1}} w_j as a signed log value.
    double log_interior_product(uint64_t n) const;
    // Same product as an exact power-of-two exponent (C_{+,1} only).
    int64_t interior_pow2_exponent(uint64_t n) const;

private:
    CTypeFlavor flavor_ = CTypeFlavor::General;
    std::vector<uint64_t> b_;
    std::vector<uint64_t> phi_;  // general flavor
    std::vector<double> v_;      // general flavor
    std::vector<double> w_;      // general flavor, w_[j] = w_j (index 0 unused)
    std::vector<uint64_t> delta_, tau_, sigma_;  // cplus_one levels
    uint64_t b1_ = 2;
};

// Linear action of T_{v,w,phi,b}, `times` iterations.
SparseVec ctype_apply(const CTypeParams& params, const SparseVec& x, uint64_t times);
// lcm over supporting blocks n of 2(b_{n+1} - b_n).
uint64_t ctype_period(const CTypeParams& params, const SparseVec& x);
// The two-term closed form of T^m e_{b_{2^{k-1}+l+1}-m}.
SparseVec ctype_iterate_closed_form(const CTypeParams& params, int k, uint64_t l, uint64_t m);

struct CPlusCommonReport {
    bool hold;
    long long ratio_num, ratio_den;  // inf over members of the limsup proxy, exact
    double ratio() const { return (double)ratio_num / (double)ratio_den; }
    std::string reason;
    struct Witness {
        size_t member;
        double C;
        int k0;
        int k;  // -1 when not found below k_max
    };
    std::vector<Witness> witnesses;
    struct PairBound {
        size_t s, t;
        bool bounded;
        double K;
    };
    std::vector<PairBound> pair_bounds;
};
// Hypothesis checker for families of C_{+,1} operators sharing b: the
// (delta - tau)/Delta ratio condition with exact integer arithmetic, plus the
// product-lower-bound witnesses and the cross-member product-ratio table.
CPlusCommonReport cplus_common_verdict(const std::vector<CTypeParams>& family, double alpha_frac,
                                       int k_max);

}  // namespace freqdyn
