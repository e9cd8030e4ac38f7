#include "freqdyn/sparse_vec.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace freqdyn {

namespace {
constexpr double kPruneThreshold = 1e-300;

template <class Entries, class Key>
auto lower_bound_index(Entries& e, Key k) {
    return std::lower_bound(e.begin(), e.end(), k,
                            [](const auto& a, Key key) { return a.first < key; });
}
}  // namespace

// ---------------------------------------------------------------------------
// SparseVec
// ---------------------------------------------------------------------------

SparseVec::SparseVec(double p) : p_(p) {
    if (!(p >= 1.0)) throw std::invalid_argument("SparseVec: p must be >= 1");
}

SparseVec SparseVec::basis(uint64_t k, double p, double coef) {
    SparseVec v(p);
    v.set(k, coef);
    return v;
}

uint64_t SparseVec::max_index() const { return entries_.empty() ? 0 : entries_.back().first; }

double SparseVec::get(uint64_t k) const {
    auto it = lower_bound_index(entries_, k);
    return (it != entries_.end() && it->first == k) ? it->second : 0.0;
}

void SparseVec::prune_at(size_t pos) {
    if (pos < entries_.size() && std::fabs(entries_[pos].second) < kPruneThreshold)
        entries_.erase(entries_.begin() + (long)pos);
}

void SparseVec::set(uint64_t k, double c) {
    auto it = lower_bound_index(entries_, k);
    if (it != entries_.end() && it->first == k)
        it->second = c;
    else
        it = entries_.insert(it, {k, c});
    prune_at((size_t)(it - entries_.begin()));
}

void SparseVec::add(uint64_t k, double c) {
    auto it = lower_bound_index(entries_, k);
    if (it != entries_.end() && it->first == k) {
        it->second += c;
        prune_at((size_t)(it - entries_.begin()));
    } else if (std::fabs(c) >= kPruneThreshold) {
        entries_.insert(it, {k, c});
    }
}

void SparseVec::scale(double s) {
    if (s == 0.0) {
        entries_.clear();
        return;
    }
    for (auto& [k, c] : entries_) c *= s;
}

double SparseVec::norm() const {
    CompensatedSum s;
    for (const auto& [k, c] : entries_) s.add(std::pow(std::fabs(c), p_));
    return std::pow(s.value(), 1.0 / p_);
}

double SparseVec::dist(const SparseVec& other) const {
    CompensatedSum s;
    size_t i = 0, j = 0;
    while (i < entries_.size() || j < other.entries_.size()) {
        double d;
        if (j >= other.entries_.size() ||
            (i < entries_.size() && entries_[i].first < other.entries_[j].first)) {
            d = entries_[i++].second;
        } else if (i >= entries_.size() || other.entries_[j].first < entries_[i].first) {
            d = -other.entries_[j++].second;
        } else {
            d = entries_[i++].second - other.entries_[j++].second;
        }
        s.add(std::pow(std::fabs(d), p_));
    }
    return std::pow(s.value(), 1.0 / p_);
}

void SparseVec::save(std::ostream& out) const {
    for (const auto& [k, c] : entries_) out << k << "," << fmt12(c) << "\n";
}

SparseVec SparseVec::load(std::istream& in, double p) {
    SparseVec v(p);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("SparseVec csv: missing comma");
        v.set(std::stoull(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return v;
}

// ---------------------------------------------------------------------------
// LogSparseVec
// ---------------------------------------------------------------------------

LogSparseVec::LogSparseVec(double p) : p_(p) {
    if (!(p >= 1.0)) throw std::invalid_argument("LogSparseVec: p must be >= 1");
}

LogSparseVec LogSparseVec::from(const SparseVec& v) {
    LogSparseVec out(v.p());
    for (const auto& [k, c] : v.entries()) out.entries_.push_back({k, LogCoef::from_double(c)});
    return out;
}

uint64_t LogSparseVec::max_index() const { return entries_.empty() ? 0 : entries_.back().first; }

LogCoef LogSparseVec::get(uint64_t k) const {
    auto it = lower_bound_index(entries_, k);
    return (it != entries_.end() && it->first == k) ? it->second : LogCoef{};
}

void LogSparseVec::add(uint64_t k, LogCoef c) {
    if (c.sign == 0) return;
    auto it = lower_bound_index(entries_, k);
    if (it != entries_.end() && it->first == k) {
        it->second = log_add(it->second, c);
        if (it->second.sign == 0) entries_.erase(it);
    } else {
        entries_.insert(it, {k, c});
    }
}

void LogSparseVec::set(uint64_t k, LogCoef c) {
    auto it = lower_bound_index(entries_, k);
    if (it != entries_.end() && it->first == k) {
        if (c.sign == 0)
            entries_.erase(it);
        else
            it->second = c;
    } else if (c.sign != 0) {
        entries_.insert(it, {k, c});
    }
}

double LogSparseVec::norm() const { return std::exp(log_norm()); }

double LogSparseVec::log_norm() const {
    LogSumAcc acc;
    for (const auto& [k, c] : entries_) acc.add(p_ * c.logmag);
    const double lv = acc.log_value();
    return lv == kNegInf ? kNegInf : lv / p_;
}

double LogSparseVec::dist(const SparseVec& y) const {
    LogSumAcc acc;
    const auto& ye = y.entries();
    size_t i = 0, j = 0;
    while (i < entries_.size() || j < ye.size()) {
        LogCoef d;
        if (j >= ye.size() || (i < entries_.size() && entries_[i].first < ye[j].first)) {
            d = entries_[i++].second;
        } else if (i >= entries_.size() || ye[j].first < entries_[i].first) {
            d = log_scale(LogCoef::from_double(ye[j++].second), -1, 0.0);
        } else {
            d = log_add(entries_[i++].second,
                        log_scale(LogCoef::from_double(ye[j++].second), -1, 0.0));
        }
        if (d.sign != 0) acc.add(p_ * d.logmag);
    }
    const double lv = acc.log_value();
    return lv == kNegInf ? 0.0 : std::exp(lv / p_);
}

SparseVec LogSparseVec::materialize() const {
    SparseVec out(p_);
    for (const auto& [k, c] : entries_) out.set(k, c.to_double());
    return out;
}

}  // namespace freqdyn
