#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freqdyn/densities.hpp"
#include "freqdyn/shift_analysis.hpp"
#include "freqdyn/sparse_vec.hpp"
#include "freqdyn/weights.hpp"

namespace freqdyn {

// eps_p = 2^{-(p+2)}: sums to 1/2, p*eps_p -> 0, and J_p = p+2 gives
// sum_{i >= J_p} eps_i = 2^{-(p+3)} < eps_p with closed-form tails.
struct EpsilonBudget {
    double eps(int p) const;
    int J(int p) const { return p + 2; }
    double r1(int q) const;
    double r2(int q) const;
    double r(int q) const;  // eps_q + r1_q + 2 r2_q, the hit radius of target q
};

// The lambda-multiples instantiation: T_i = lambda_i B_w, S_i = F_w / lambda_i.
struct MultiplesFamily {
    WeightSeq w;
    std::vector<double> lambdas;
    double ell_p = 2.0;
};

struct Label {
    int p;  // target index
    int i;  // operator index
};

// Separation exponent c (with pivot d) satisfying
// sup(L)/inf(L) * (d/inf(L))^{c-1} <= 1.
struct SeparationExponent {
    double c, d;
};
SeparationExponent choose_separation_exponent(const std::vector<double>& lambdas, double a_bound);

struct TailTable {
    std::vector<std::vector<uint64_t>> N;  // N[p][i]
    // per-condition minima, diagnostics for the oracle tests
    std::vector<std::vector<uint64_t>> N_cond_ii, N_cond_vii, N_cond_cross;
    double c, d;
};
// Least N per label closing the absolute-tail surrogates of the criterion's
// conditions over F subset of [N, N + 4 cap]; throws with the offending
// condition's name if some tail has not closed by `cap`.
TailTable tail_threshold_table(const MultiplesFamily& family, const std::vector<SparseVec>& targets,
                               const EpsilonBudget& budget, double c, uint64_t cap);

struct SeparatedFamily {
    double eps, a, K;
    int M;  // label count == residue modulus == max gap of each A_p(i)
    std::vector<Label> labels;
    std::vector<uint64_t> N;         // per label
    std::vector<int> residue;        // A_p(i) = {u : u = residue mod M}
    std::vector<uint64_t> u_min;     // first admissible u (N <= eps a^u)
    std::vector<std::vector<uint64_t>> sets;  // E_p(i), ascending
    std::vector<bool> empty_warning;
    uint64_t horizon;

    size_t label_index(int p, int i) const;
    std::string csv() const;  // p,i,N,u_min,count
};
// The explicit integer construction: E_p(i) = union over admissible u in the
// label's residue class of [ceil((1-eps)a^u), floor((1+eps)a^u)] cap N_p(i)N.
SeparatedFamily build_index_sets(const std::vector<std::vector<uint64_t>>& N, double K,
                                 const std::vector<Label>& labels, uint64_t horizon,
                                 double eps = 0.1, double a_slack = 1.1);

struct AssembledVector {
    LogSparseVec x;
    double discarded_tail_bound;
};
// x = sum over labels and n in E_p(i) of lambda_i^{-n} F_w^n(y_p), truncated
// to support_cap with a certified bound on what was dropped.
AssembledVector assemble_common_vector(const SeparatedFamily& family, const MultiplesFamily& mult,
                                       const std::vector<SparseVec>& targets, uint64_t support_cap,
                                       const EpsilonBudget& budget);

struct HitRow {
    int q, j;
    uint64_t m;
    double norm, r_q;
    bool pass;
};
struct HitReport {
    std::vector<HitRow> rows;
    struct LabelStat {
        int q, j;
        uint64_t probes;
        double density;  // natural-density window proxy of E_q(j)
    };
    std::vector<LabelStat> labels;
    bool all_pass;
    std::string csv() const;  // q,j,m,norm,r_q,pass
};
HitReport verify_frequent_hits(const LogSparseVec& x, const SeparatedFamily& family,
                               const MultiplesFamily& mult, const std::vector<SparseVec>& targets,
                               const EpsilonBudget& budget, Window window);

// Return-time hit sets layered over a period lattice; the union over layers
// j <= depth of A_{m,j}, with max(A_{m,j}) <= alpha d_{j_m+j+1} guaranteed.
IndexSet build_layered_hit_sets(const std::vector<uint64_t>& n_seq, const std::vector<uint64_t>& d_seq,
                            uint64_t period, double alpha, size_t block_index, size_t depth);

}  // namespace freqdyn
