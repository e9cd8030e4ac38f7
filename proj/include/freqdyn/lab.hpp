#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freqdyn/construction.hpp"
#include "freqdyn/densities.hpp"
#include "freqdyn/shift_analysis.hpp"
#include "freqdyn/sparse_vec.hpp"
#include "freqdyn/weights.hpp"

namespace freqdyn {

// { m <= horizon : || (lambda B_w)^m x - center ||_p < radius }
IndexSet return_set(const LogSparseVec& x, const WeightSeq& w, double lambda,
                    const SparseVec& center, double radius, uint64_t horizon);

struct RatioRow {
    uint64_t k;
    int64_t n_k, m_k;  // -1 sentinels when a set is empty on the horizon
    double ratio;
};
// The two-multiplier return-time diagnostic: N_0 = {n : ||lambda_0^n B^n x|| < 1},
// N_k = {m : ||lambda_k^m B^m x - e_0|| < radius}; rows carry m_k, the largest
// n < m_k in N_0, and their quotient.
std::vector<RatioRow> ratio_witness(const LogSparseVec& x, const WeightSeq& w, double lambda0,
                                    const std::vector<double>& lambda_seq, double radius,
                                    uint64_t horizon);

struct DensityGap {
    double upper_est;  // alpha-upper density of union [p_k, (1+C) p_k]
    double lower_est;  // alpha-lower density of the complement construction
    double C, C_prime;
};
DensityGap density_gap_demo(const DensitySeq& alpha, double lambda, double mu, double normT,
                            const IndexSet& pk, Window window);

struct ExperimentConfig {
    std::string scenario;
    std::string weight = "const:1";
    std::vector<double> lambdas;
    bool lambda_unbounded = false;
    std::string alpha = "const:1";
    uint64_t horizon = 100000;
    Window window{100, 100000};
    std::string out_dir = "out";
    uint64_t seed = 1234;
    double ell_p = 2.0;

    static ExperimentConfig from_file(const std::string& path);
    void validate() const;
};

// The five default approximation targets of the construction scenarios.
std::vector<SparseVec> default_targets(double ell_p);

// Dispatches to the named scenario, writes CSV/SVG artifacts into out_dir.
// Exit status: 0 ok, 1 config error, 2 embedded assertion failed.
int run_scenario(const ExperimentConfig& config);

}  // namespace freqdyn
