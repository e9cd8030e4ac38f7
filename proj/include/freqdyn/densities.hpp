#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace freqdyn {

// ---------------------------------------------------------------------------
// IndexSet: a subset of N, either materialized, interval-backed or
// predicate-backed, enumerable up to a horizon.
// ---------------------------------------------------------------------------
class IndexSet {
public:
    static IndexSet from_sorted(std::vector<uint64_t> v, uint64_t horizon);
    static IndexSet from_predicate(std::function<bool(uint64_t)> member, uint64_t horizon);
    // Closed intervals [lo, hi]; overlaps allowed, normalized internally.
    static IndexSet from_intervals(std::vector<std::pair<uint64_t, uint64_t>> iv, uint64_t horizon);
    static IndexSet full(uint64_t horizon);
    static IndexSet empty_set(uint64_t horizon);

    uint64_t horizon() const { return horizon_; }
    bool contains(uint64_t k) const;
    IndexSet complement() const;  // predicate-backed, same horizon

    std::vector<uint64_t> materialize() const;         // ascending, <= horizon
    uint64_t count() const;                            // |E cap [0, horizon]|
    uint64_t first_element() const;                    // horizon+1 if empty

    // newline-delimited decimal integers
    void save(std::ostream& out) const;
    static IndexSet load(std::istream& in, uint64_t horizon);

    // Cheap ascending membership scanner for one left-to-right pass.
    class Cursor {
    public:
        explicit Cursor(const IndexSet& s) : set_(s) {}
        bool advance_to(uint64_t k);  // k must be non-decreasing across calls
    private:
        const IndexSet& set_;
        size_t pos_ = 0;
    };

private:
    enum class Backend { Sorted, Intervals, Predicate };
    Backend backend_ = Backend::Predicate;
    uint64_t horizon_ = 0;
    std::vector<uint64_t> sorted_;
    std::vector<std::pair<uint64_t, uint64_t>> intervals_;
    std::function<bool(uint64_t)> member_;
    friend class Cursor;
};

// ---------------------------------------------------------------------------
// DensitySeq: a non-decreasing positive sequence alpha in log scale,
// defining the generalized densities d_alpha.
// ---------------------------------------------------------------------------
enum class DensityKind { Constant, PowerP, ExpE, ExpD, LogL, Custom };

class DensitySeq {
public:
    static DensitySeq constant(double a);
    static DensitySeq power(double r);   // alpha_k = k^r
    static DensitySeq exp_e(double eps); // alpha_k = exp(k^eps)
    static DensitySeq exp_d(int s);      // alpha_k = exp(k / log_(s)(k)); s = -1 means log_(inf) = 1
    static DensitySeq exp_d_inf();       // alpha_k = exp(k)
    static DensitySeq log_l(int l);      // alpha_k = exp(log(k) log_(l)(k))
    static DensitySeq custom(std::function<double(uint64_t)> log_alpha, uint64_t k_min);
    // const:1 | pow:2 | expE:0.5 | expD:1 | expD:inf | logL:2
    static DensitySeq parse(const std::string& spec);

    DensityKind kind() const { return kind_; }
    uint64_t k_min() const { return k_min_; }
    double log_alpha(uint64_t k) const;  // k >= k_min
    std::string spec_string() const { return spec_; }

    struct Admissibility {
        bool non_decreasing;
        bool divergent;        // phi(H) > 1e3 * alpha_{k_min} at H
        bool vanishing_ratio;  // alpha_H / phi(H) <= 1e-3 at H
        bool vanishing_trend;  // the ratio shrinks by >= 10% per two decades
        // slow kinds (alpha_n/phi ~ 1/log n) vanish in the limit but cannot
        // meet the 1e-3 surrogate at any practical horizon; the trend decides
        bool ok() const {
            return non_decreasing && divergent && (vanishing_ratio || vanishing_trend);
        }
    };
    Admissibility check_admissible(uint64_t horizon = 1000000) const;

private:
    DensityKind kind_ = DensityKind::Constant;
    uint64_t k_min_ = 1;
    double param_ = 1.0;
    int iter_ = 0;  // s or l; -1 encodes infinity for ExpD
    std::function<double(uint64_t)> fn_;
    std::string spec_;
};

struct Window {
    uint64_t lo, hi;  // inclusive
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// ln sum_{k_min <= k <= n} alpha_k
double phi_log(const DensitySeq& alpha, uint64_t n);

// Finite-window liminf/limsup proxies of the alpha-density of E.
double emp_lower_density(const DensitySeq& alpha, const IndexSet& E, Window w);
double emp_upper_density(const DensitySeq& alpha, const IndexSet& E, Window w);

enum class Precedes { True, False, Inconclusive };
Precedes precedes(const DensitySeq& alpha, const DensitySeq& beta, uint64_t horizon);

struct Delta2Verdict {
    bool holds;
    double K;  // max of phi(2x)/phi(x) on the grid (meaningful when holds)
};
Delta2Verdict delta2_verdict(const DensitySeq& alpha, uint64_t horizon);

// The n_k(f) sequence: n_1 = 2, n_k = 2 sum_{i<k} f(delta_i) + f(delta_k).
uint64_t nk_f(uint64_t k);
uint64_t delta_index(uint64_t j);  // 1-based position of the first zero binary digit
int f_tower(uint64_t j);           // tower thresholds saturated to 64 bits

// B = union_j (shifts[j] + A cap I_j); predicates must cover [0, horizon(A)].
IndexSet shift_union(const IndexSet& A, const std::vector<uint64_t>& shifts,
                     const std::vector<std::function<bool(uint64_t)>>& partition);

}  // namespace freqdyn
