#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "freqdyn/util.hpp"

namespace freqdyn {

// Finitely supported vector over the unit basis (e_k), coefficients in double
// precision, ambient l^p norm. Entries below 1e-300 in magnitude are pruned.
class SparseVec {
public:
    explicit SparseVec(double p = 2.0);
    static SparseVec basis(uint64_t k, double p = 2.0, double coef = 1.0);

    double p() const { return p_; }
    size_t size() const { return entries_.size(); }
    bool zero() const { return entries_.empty(); }
    uint64_t max_index() const;  // 0 when empty

    double get(uint64_t k) const;
    void set(uint64_t k, double c);
    void add(uint64_t k, double c);
    void scale(double s);

    double norm() const;                        // l^p norm
    double dist(const SparseVec& other) const;  // ||this - other||_p

    const std::vector<std::pair<uint64_t, double>>& entries() const { return entries_; }

    void save(std::ostream& out) const;  // CSV index,coefficient
    static SparseVec load(std::istream& in, double p = 2.0);

private:
    std::vector<std::pair<uint64_t, double>> entries_;  // ascending index, no zeros
    double p_;
    void prune_at(size_t pos);
};

// Same shape with signed log-scale coefficients; holds magnitudes far below
// the double range (the assembled series of the construction module needs
// coefficients like 2^{-100000}).
class LogSparseVec {
public:
    explicit LogSparseVec(double p = 2.0);
    static LogSparseVec from(const SparseVec& v);

    double p() const { return p_; }
    size_t size() const { return entries_.size(); }
    bool zero() const { return entries_.empty(); }
    uint64_t max_index() const;

    LogCoef get(uint64_t k) const;
    void add(uint64_t k, LogCoef c);  // log-scale signed accumulation
    void set(uint64_t k, LogCoef c);

    double norm() const;      // l^p norm (linear scale)
    double log_norm() const;  // ln of the l^p norm
    // || this - y ||_p with y in double precision
    double dist(const SparseVec& y) const;

    const std::vector<std::pair<uint64_t, LogCoef>>& entries() const { return entries_; }
    SparseVec materialize() const;  // underflows clamp to zero

private:
    std::vector<std::pair<uint64_t, LogCoef>> entries_;  // ascending index, no zeros
    double p_;
};

}  // namespace freqdyn
