#include "freqdyn/densities.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "freqdyn/util.hpp"

namespace freqdyn {

// ---------------------------------------------------------------------------
// IndexSet
// ---------------------------------------------------------------------------

IndexSet IndexSet::from_sorted(std::vector<uint64_t> v, uint64_t horizon) {
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] <= v[i - 1]) throw std::invalid_argument("IndexSet: not strictly increasing");
    IndexSet s;
    s.backend_ = Backend::Sorted;
    s.horizon_ = horizon;
    s.sorted_ = std::move(v);
    while (!s.sorted_.empty() && s.sorted_.back() > horizon) s.sorted_.pop_back();
    return s;
}

IndexSet IndexSet::from_predicate(std::function<bool(uint64_t)> member, uint64_t horizon) {
    IndexSet s;
    s.backend_ = Backend::Predicate;
    s.horizon_ = horizon;
    s.member_ = std::move(member);
    return s;
}

IndexSet IndexSet::from_intervals(std::vector<std::pair<uint64_t, uint64_t>> iv, uint64_t horizon) {
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<uint64_t, uint64_t>> merged;
    for (auto [lo, hi] : iv) {
        if (hi < lo) throw std::invalid_argument("IndexSet: bad interval");
        if (lo > horizon) continue;
        hi = std::min(hi, horizon);
        if (!merged.empty() && lo <= merged.back().second + 1)
            merged.back().second = std::max(merged.back().second, hi);
        else
            merged.push_back({lo, hi});
    }
    IndexSet s;
    s.backend_ = Backend::Intervals;
    s.horizon_ = horizon;
    s.intervals_ = std::move(merged);
    return s;
}

IndexSet IndexSet::full(uint64_t horizon) {
    return from_intervals({{0, horizon}}, horizon);
}

IndexSet IndexSet::empty_set(uint64_t horizon) {
    return from_intervals({}, horizon);
}

bool IndexSet::contains(uint64_t k) const {
    if (k > horizon_) return false;
    switch (backend_) {
        case Backend::Sorted:
            return std::binary_search(sorted_.begin(), sorted_.end(), k);
        case Backend::Intervals: {
            auto it = std::upper_bound(intervals_.begin(), intervals_.end(),
                                       std::make_pair(k, UINT64_MAX));
            if (it == intervals_.begin()) return false;
            --it;
            return k >= it->first && k <= it->second;
        }
        case Backend::Predicate:
            return member_(k);
    }
    return false;
}

IndexSet IndexSet::complement() const {
    IndexSet self = *this;  // value capture keeps the backing data alive
    return from_predicate([self](uint64_t k) { return !self.contains(k); }, horizon_);
}

std::vector<uint64_t> IndexSet::materialize() const {
    switch (backend_) {
        case Backend::Sorted:
            return sorted_;
        case Backend::Intervals: {
            std::vector<uint64_t> out;
            for (auto [lo, hi] : intervals_)
                for (uint64_t k = lo; k <= hi; ++k) out.push_back(k);
            return out;
        }
        case Backend::Predicate: {
            std::vector<uint64_t> out;
            for (uint64_t k = 0; k <= horizon_; ++k)
                if (member_(k)) out.push_back(k);
            return out;
        }
    }
    return {};
}

uint64_t IndexSet::count() const {
    switch (backend_) {
        case Backend::Sorted:
            return sorted_.size();
        case Backend::Intervals: {
            uint64_t c = 0;
            for (auto [lo, hi] : intervals_) c += hi - lo + 1;
            return c;
        }
        case Backend::Predicate: {
            uint64_t c = 0;
            for (uint64_t k = 0; k <= horizon_; ++k)
                if (member_(k)) ++c;
            return c;
        }
    }
    return 0;
}

uint64_t IndexSet::first_element() const {
    switch (backend_) {
        case Backend::Sorted:
            return sorted_.empty() ? horizon_ + 1 : sorted_.front();
        case Backend::Intervals:
            return intervals_.empty() ? horizon_ + 1 : intervals_.front().first;
        case Backend::Predicate:
            for (uint64_t k = 0; k <= horizon_; ++k)
                if (member_(k)) return k;
            return horizon_ + 1;
    }
    return horizon_ + 1;
}

void IndexSet::save(std::ostream& out) const {
    switch (backend_) {
        case Backend::Sorted:
            for (uint64_t k : sorted_) out << k << "\n";
            return;
        default:
            for (uint64_t k : materialize()) out << k << "\n";
            return;
    }
}

IndexSet IndexSet::load(std::istream& in, uint64_t horizon) {
    std::vector<uint64_t> v;
    uint64_t k;
    while (in >> k) v.push_back(k);
    return from_sorted(std::move(v), horizon);
}

bool IndexSet::Cursor::advance_to(uint64_t k) {
    switch (set_.backend_) {
        case Backend::Sorted:
            while (pos_ < set_.sorted_.size() && set_.sorted_[pos_] < k) ++pos_;
            return pos_ < set_.sorted_.size() && set_.sorted_[pos_] == k;
        case Backend::Intervals:
            while (pos_ < set_.intervals_.size() && set_.intervals_[pos_].second < k) ++pos_;
            return pos_ < set_.intervals_.size() && set_.intervals_[pos_].first <= k;
        case Backend::Predicate:
            return k <= set_.horizon_ && set_.member_(k);
    }
    return false;
}

// ---------------------------------------------------------------------------
// DensitySeq
// ---------------------------------------------------------------------------

DensitySeq DensitySeq::constant(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("density: constant must be positive");
    DensitySeq d;
    d.kind_ = DensityKind::Constant;
    d.param_ = a;
    d.spec_ = "const:" + fmt12(a);
    return d;
}

DensitySeq DensitySeq::power(double r) {
    if (r < 0.0) throw std::invalid_argument("density: power exponent must be >= 0");
    DensitySeq d;
    d.kind_ = DensityKind::PowerP;
    d.param_ = r;
    d.spec_ = "pow:" + fmt12(r);
    return d;
}

DensitySeq DensitySeq::exp_e(double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("density: expE epsilon in [0,1]");
    DensitySeq d;
    d.kind_ = DensityKind::ExpE;
    d.param_ = eps;
    d.spec_ = "expE:" + fmt12(eps);
    return d;
}

DensitySeq DensitySeq::exp_d(int s) {
    DensitySeq d;
    d.kind_ = DensityKind::ExpD;
    d.iter_ = s;
    if (s == -1) {
        d.k_min_ = 1;
        d.spec_ = "expD:inf";
    } else {
        if (s < 0) throw std::invalid_argument("density: expD s must be >= 0 or inf");
        // need log_(s)(k) > 1
        d.k_min_ = s == 0 ? 2 : (uint64_t)std::ceil(iterated_exp(1.0, s)) + 1;
        d.spec_ = "expD:" + std::to_string(s);
    }
    return d;
}

DensitySeq DensitySeq::exp_d_inf() { return exp_d(-1); }

DensitySeq DensitySeq::log_l(int l) {
    if (l < 1) throw std::invalid_argument("density: logL l must be >= 1");
    DensitySeq d;
    d.kind_ = DensityKind::LogL;
    d.iter_ = l;
    // need log_(l)(k) > 0, i.e. k > exp_(l)(0)
    d.k_min_ = (uint64_t)std::ceil(iterated_exp(0.0, l)) + 1;
    d.spec_ = "logL:" + std::to_string(l);
    return d;
}

DensitySeq DensitySeq::custom(std::function<double(uint64_t)> log_alpha, uint64_t k_min) {
    if (k_min < 1) throw std::invalid_argument("density: k_min must be >= 1");
    DensitySeq d;
    d.kind_ = DensityKind::Custom;
    d.fn_ = std::move(log_alpha);
    d.k_min_ = k_min;
    d.spec_ = "custom";
    return d;
}

DensitySeq DensitySeq::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "const") return constant(std::stod(tail));
    if (head == "pow") return power(std::stod(tail));
    if (head == "expE") return exp_e(std::stod(tail));
    if (head == "expD") return tail == "inf" ? exp_d_inf() : exp_d(std::stoi(tail));
    if (head == "logL") return log_l(std::stoi(tail));
    throw std::invalid_argument("unknown density spec: " + spec);
}

double DensitySeq::log_alpha(uint64_t k) const {
    if (k < k_min_) throw std::domain_error("density: index below k_min");
    const double x = (double)k;
    switch (kind_) {
        case DensityKind::Constant: return std::log(param_);
        case DensityKind::PowerP: return param_ * std::log(x);
        case DensityKind::ExpE: return std::pow(x, param_);
        case DensityKind::ExpD: return iter_ == -1 ? x : x / iterated_log(x, iter_);
        case DensityKind::LogL: return std::log(x) * iterated_log(x, iter_);
        case DensityKind::Custom: return fn_(k);
    }
    throw std::logic_error("unreachable");
}

DensitySeq::Admissibility DensitySeq::check_admissible(uint64_t horizon) const {
    Admissibility rep{true, false, false, false};
    LogSumAcc phi;
    double prev = kNegInf;
    double ratio_mid = 0.0;
    const uint64_t mid = std::max(horizon / 100, k_min_ + 1);
    for (uint64_t k = k_min_; k <= horizon; ++k) {
        const double la = log_alpha(k);
        if (la < prev - 1e-12) rep.non_decreasing = false;
        prev = la;
        phi.add(la);
        if (k == mid) ratio_mid = la - phi.log_value();
    }
    const double lphi = phi.log_value();
    rep.divergent = lphi > std::log(1e3) + log_alpha(k_min_);
    const double ratio_end = log_alpha(horizon) - lphi;
    rep.vanishing_ratio = ratio_end <= std::log(1e-3);
    rep.vanishing_trend = ratio_end <= ratio_mid + std::log(0.9);
    return rep;
}

// ---------------------------------------------------------------------------
// phi and empirical densities
// ---------------------------------------------------------------------------

double phi_log(const DensitySeq& alpha, uint64_t n) {
    if (n < alpha.k_min()) throw std::domain_error("phi: n below k_min");
    LogSumAcc acc;
    for (uint64_t k = alpha.k_min(); k <= n; ++k) acc.add(alpha.log_alpha(k));
    return acc.log_value();
}

namespace {

// One pass over k in [k_min, w.hi], tracking the extremes of the ratio
// (sum over E of alpha) / (sum of alpha) on the window. The two accumulators
// share an anchor, so for constant alpha the ratio is a pure count quotient,
// independent of the constant.
struct RatioScan {
    double min_ratio = 2.0, max_ratio = -1.0;
};

RatioScan ratio_scan(const DensitySeq& alpha, const IndexSet& E, Window w) {
    if (w.lo >= w.hi) throw std::domain_error("density window: need lo < hi");
    if (w.lo < alpha.k_min()) throw std::domain_error("density window: lo below k_min");
    if (w.hi > E.horizon()) throw std::domain_error("density window: hi beyond set horizon");
    double anchor = kNegInf;
    double sum_full = 0.0, sum_set = 0.0;
    IndexSet::Cursor cur(E);
    RatioScan out;
    for (uint64_t k = alpha.k_min(); k <= w.hi; ++k) {
        const double la = alpha.log_alpha(k);
        if (la > anchor) {
            const double f = std::exp(anchor - la);
            sum_full *= f;
            sum_set *= f;
            anchor = la;
        }
        const double t = std::exp(la - anchor);
        sum_full += t;
        if (cur.advance_to(k)) sum_set += t;
        if (k >= w.lo) {
            const double r = sum_full > 0.0 ? sum_set / sum_full : 0.0;
            out.min_ratio = std::min(out.min_ratio, r);
            out.max_ratio = std::max(out.max_ratio, r);
        }
    }
    return out;
}

}  // namespace

double emp_lower_density(const DensitySeq& alpha, const IndexSet& E, Window w) {
    return ratio_scan(alpha, E, w).min_ratio;
}

double emp_upper_density(const DensitySeq& alpha, const IndexSet& E, Window w) {
    // defined through duality so that upper(E) = 1 - lower(complement) exactly
    return 1.0 - emp_lower_density(alpha, E.complement(), w);
}

// ---------------------------------------------------------------------------
// precedes
// ---------------------------------------------------------------------------

Precedes precedes(const DensitySeq& alpha, const DensitySeq& beta, uint64_t horizon) {
    const uint64_t k0 = std::max(alpha.k_min(), beta.k_min());
    if (horizon <= k0 + 1) throw std::domain_error("precedes: horizon too small");
    uint64_t last_violation = 0;
    double prev = alpha.log_alpha(k0) - beta.log_alpha(k0);
    for (uint64_t k = k0 + 1; k <= horizon; ++k) {
        const double d = alpha.log_alpha(k) - beta.log_alpha(k);
        if (d > prev + 1e-12) last_violation = k;
        prev = d;
    }
    if (last_violation <= horizon / 2) return Precedes::True;
    if (last_violation >= horizon - horizon / 10) return Precedes::False;
    return Precedes::Inconclusive;
}

// ---------------------------------------------------------------------------
// Delta_2 verdict
// ---------------------------------------------------------------------------

Delta2Verdict delta2_verdict(const DensitySeq& alpha, uint64_t horizon) {
    const uint64_t k_min = alpha.k_min();
    if (horizon < 2 * k_min) throw std::domain_error("delta2: horizon < 2*k_min");
    std::vector<uint64_t> grid;
    for (uint64_t x = k_min; x <= horizon / 2; x *= 2) grid.push_back(x);
    // phi at x and 2x for all grid points, one accumulation pass
    std::vector<double> log_ratio(grid.size());
    {
        LogSumAcc acc;
        size_t gi = 0, gj = 0;
        std::vector<double> phi_at(grid.size()), phi_at2(grid.size());
        for (uint64_t k = k_min; k <= horizon; ++k) {
            acc.add(alpha.log_alpha(k));
            while (gi < grid.size() && grid[gi] == k) phi_at[gi++] = acc.log_value();
            while (gj < grid.size() && 2 * grid[gj] == k) phi_at2[gj++] = acc.log_value();
        }
        for (size_t i = 0; i < grid.size(); ++i) log_ratio[i] = phi_at2[i] - phi_at[i];
    }
    const double max_log_r = *std::max_element(log_ratio.begin(), log_ratio.end());
    Delta2Verdict v;
    v.K = max_log_r > 700.0 ? std::exp(700.0) : std::exp(max_log_r);
    if (max_log_r > std::log(1e6)) {
        v.holds = false;
        return v;
    }
    // last decade of the grid: points with x > x_last / 10
    size_t first = grid.size();
    while (first > 0 && (double)grid[first - 1] > (double)grid.back() / 10.0) --first;
    const double growth = std::exp(log_ratio.back() - log_ratio[first]) - 1.0;
    v.holds = growth <= 0.01;
    return v;
}

// ---------------------------------------------------------------------------
// n_k(f)
// ---------------------------------------------------------------------------

uint64_t delta_index(uint64_t j) {
    if (j == 0) throw std::domain_error("delta_index: j must be >= 1");
    uint64_t pos = 1;
    while (j & 1ull) {
        j >>= 1;
        ++pos;
    }
    return pos;
}

int f_tower(uint64_t j) {
    // thresholds a_1 = 1, a_2 = 16, a_3 = 2^256 (saturates past 64 bits)
    if (j == 0) throw std::domain_error("f_tower: j must be >= 1");
    return j >= 16 ? 2 : 1;
}

namespace {
// #{i <= m : delta_i >= 16} = #{i <= m : i = 2^15 - 1 mod 2^15}
uint64_t count_deep_delta(uint64_t m) {
    constexpr uint64_t r = (1ull << 15) - 1;
    if (m < r) return 0;
    return (m - r) / (1ull << 15) + 1;
}
}  // namespace

uint64_t nk_f(uint64_t k) {
    if (k == 0) throw std::domain_error("nk_f: k must be >= 1");
    if (k >= (1ull << 62)) throw std::domain_error("nk_f: k too large");
    if (k == 1) return 2;
    // sum_{i<k} f(delta_i) = (k-1) + #{i<k : delta_i >= 16}
    const uint64_t s = (k - 1) + count_deep_delta(k - 1);
    return 2 * s + (uint64_t)f_tower(delta_index(k));
}

// ---------------------------------------------------------------------------
// shift_union
// ---------------------------------------------------------------------------

IndexSet shift_union(const IndexSet& A, const std::vector<uint64_t>& shifts,
                     const std::vector<std::function<bool(uint64_t)>>& partition) {
    if (shifts.size() != partition.size() || shifts.empty())
        throw std::invalid_argument("shift_union: shifts and partition sizes must match");
    const uint64_t H = A.horizon();
    for (uint64_t k = 0; k <= H; ++k) {
        bool covered = false;
        for (const auto& pred : partition)
            if (pred(k)) {
                covered = true;
                break;
            }
        if (!covered)
            throw std::invalid_argument("shift_union: partition does not cover index " + std::to_string(k));
    }
    std::vector<uint64_t> out;
    for (uint64_t a : A.materialize()) {
        for (size_t j = 0; j < shifts.size(); ++j) {
            if (!partition[j](a)) continue;
            const uint64_t b = a + shifts[j];
            if (b <= H) out.push_back(b);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return IndexSet::from_sorted(std::move(out), H);
}

}  // namespace freqdyn
