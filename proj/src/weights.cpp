#include "freqdyn/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "freqdyn/util.hpp"

namespace freqdyn {

namespace {

std::vector<WeightSeq::Run> build_four_block_runs(double a, double b, double c, double d, int k_max) {
    if (k_max < 2 || k_max > 30) throw std::invalid_argument("four_block: k_max must be in [2,30]");
    std::vector<WeightSeq::Run> runs;
    runs.push_back({1.0, 4.0, a, 4.0});
    for (int k = 2; k <= k_max; ++k) {
        const double p_prev = std::ldexp(1.0, (k - 1) * (k - 1));  // 2^{(k-1)^2}
        const double p = std::ldexp(1.0, k * k);                   // 2^{k^2}
        runs.push_back({(double)k * p_prev + 1.0, p - 1.0, a, p - (double)k * p_prev - 1.0});
        runs.push_back({p, p, d, 1.0});
        runs.push_back({p + 1.0, p + k + 1.0, c, (double)(k + 1)});
        runs.push_back({p + k + 2.0, (double)(k + 1) * p, b, (double)k * p - (double)(k + 1)});
    }
    return runs;
}

double parse_double(const std::string& s) {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("weight spec: bad number '" + s + "'");
    return v;
}

}  // namespace

WeightSeq WeightSeq::constant(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("constant weight must be positive");
    WeightSeq w;
    w.kind_ = WeightKind::Constant;
    w.c_ = c;
    w.spec_ = "const:" + fmt12(c);
    return w;
}

WeightSeq WeightSeq::rational2() {
    WeightSeq w;
    w.kind_ = WeightKind::Rational2;
    w.spec_ = "rational2";
    return w;
}

WeightSeq WeightSeq::costakis_sambarino(double lam) {
    if (!(lam > 0.0)) throw std::invalid_argument("cosam lambda must be positive");
    WeightSeq w;
    w.kind_ = WeightKind::CostakisSambarino;
    w.c_ = lam;
    w.spec_ = "cosam:" + fmt12(lam);
    return w;
}

WeightSeq WeightSeq::four_block(double a, double b, double c, double d, int k_max) {
    if (!(a > 0 && b > 0 && c > 0 && d > 0))
        throw std::invalid_argument("four_block values must be positive");
    WeightSeq w;
    w.kind_ = WeightKind::FourBlock;
    w.runs_ = build_four_block_runs(a, b, c, d, k_max);
    w.spec_ = "fourblock:" + fmt12(a) + "," + fmt12(b) + "," + fmt12(c) + "," + fmt12(d);
    return w;
}

WeightSeq WeightSeq::tabulated(std::vector<double> t) {
    if (t.empty()) throw std::invalid_argument("tabulated weight: empty table");
    WeightSeq w;
    w.kind_ = WeightKind::Tabulated;
    w.table_prefix_.resize(t.size() + 1, 0.0);
    for (size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0)) throw std::invalid_argument("tabulated weight: non-positive entry");
        w.table_prefix_[i + 1] = w.table_prefix_[i] + std::log(t[i]);
    }
    w.table_ = std::move(t);
    w.spec_ = "table:<inline>";
    return w;
}

WeightSeq WeightSeq::custom(std::function<double(uint64_t)> f, double sup_hint) {
    WeightSeq w;
    w.kind_ = WeightKind::Custom;
    w.fn_ = std::move(f);
    w.sup_hint_ = sup_hint;
    w.spec_ = "custom";
    return w;
}

WeightSeq WeightSeq::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "const") return constant(parse_double(tail));
    if (head == "rational2") return rational2();
    if (head == "cosam") return costakis_sambarino(parse_double(tail));
    if (head == "fourblock") {
        std::stringstream ss(tail);
        std::vector<double> v;
        std::string part;
        while (std::getline(ss, part, ',')) v.push_back(parse_double(part));
        if (v.size() != 4) throw std::invalid_argument("fourblock spec needs 4 values");
        return four_block(v[0], v[1], v[2], v[3]);
    }
    if (head == "table") {
        if (tail.empty() || tail[0] != '@') throw std::invalid_argument("table spec: expected table:@file.csv");
        std::ifstream in(tail.substr(1));
        if (!in) throw std::invalid_argument("table spec: cannot open " + tail.substr(1));
        // CSV rows index,weight with 1-based contiguous indices
        std::vector<double> vals;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw std::invalid_argument("table csv: missing comma");
            const uint64_t idx = std::stoull(line.substr(0, comma));
            const double v = parse_double(line.substr(comma + 1));
            if (idx != vals.size() + 1) throw std::invalid_argument("table csv: indices must be 1,2,3,...");
            vals.push_back(v);
        }
        return tabulated(std::move(vals));
    }
    throw std::invalid_argument("unknown weight spec: " + spec);
}

double WeightSeq::value(uint64_t n) const {
    if (n == 0) throw std::domain_error("weight index starts at 1");
    switch (kind_) {
        case WeightKind::Constant: return c_;
        case WeightKind::Rational2: {
            const double x = (double)n;
            return (x + 1.0) * (x + 1.0) / (x * x);
        }
        case WeightKind::CostakisSambarino: return 1.0 + c_ / (double)n;
        case WeightKind::FourBlock: {
            const double x = (double)n;
            auto it = std::upper_bound(runs_.begin(), runs_.end(), x,
                                       [](double v, const Run& r) { return v < r.lo; });
            if (it == runs_.begin()) throw std::domain_error("four_block: index below first run");
            --it;
            if (x > it->hi) throw std::domain_error("four_block: index beyond materialized runs");
            return it->value;
        }
        case WeightKind::Tabulated:
            if (n > table_.size()) throw std::domain_error("tabulated weight: index beyond table");
            return table_[n - 1];
        case WeightKind::Custom: return fn_(n);
    }
    throw std::logic_error("unreachable");
}

double WeightSeq::log_value(uint64_t n) const {
    if (kind_ == WeightKind::Constant) return std::log(c_);
    return std::log(value(n));
}

double WeightSeq::log_product(double i, double j) const {
    if (i < 1.0 || i > j) throw std::domain_error("log_product: need 1 <= i <= j");
    switch (kind_) {
        case WeightKind::Constant:
            return (j - i + 1.0) * std::log(c_);
        case WeightKind::Rational2:
            // prod ((n+1)/n)^2 over [i,j] telescopes to ((j+1)/i)^2
            return 2.0 * (std::log(j + 1.0) - std::log(i));
        case WeightKind::CostakisSambarino:
            // prod (n+lam)/n = Gamma(j+1+lam)Gamma(i) / (Gamma(i+lam)Gamma(j+1))
            return std::lgamma(j + 1.0 + c_) - std::lgamma(i + c_) - std::lgamma(j + 1.0) + std::lgamma(i);
        case WeightKind::FourBlock: {
            if (j > max_closed_index()) throw std::domain_error("four_block: range beyond materialized runs");
            double acc = 0.0;
            for (const Run& r : runs_) {
                const double lo = std::max(i, r.lo), hi = std::min(j, r.hi);
                if (lo > hi) continue;
                const double count = (i <= r.lo && r.hi <= j) ? r.len : hi - lo + 1.0;
                acc += count * std::log(r.value);
            }
            return acc;
        }
        case WeightKind::Tabulated: {
            const auto ui = (size_t)i, uj = (size_t)j;
            if (uj > table_.size()) throw std::domain_error("tabulated weight: range beyond table");
            return table_prefix_[uj] - table_prefix_[ui - 1];
        }
        case WeightKind::Custom: {
            CompensatedSum s;
            for (uint64_t n = (uint64_t)i; n <= (uint64_t)j; ++n) s.add(std::log(fn_(n)));
            return s.value();
        }
    }
    throw std::logic_error("unreachable");
}

double WeightSeq::sup_value(double horizon) const {
    switch (kind_) {
        case WeightKind::Constant: return c_;
        case WeightKind::Rational2: return 4.0;          // attained at n = 1
        case WeightKind::CostakisSambarino: return 1.0 + c_;
        case WeightKind::FourBlock: {
            double m = 0.0;
            for (const Run& r : runs_)
                if (r.lo <= horizon) m = std::max(m, r.value);
            return m;
        }
        case WeightKind::Tabulated: {
            double m = 0.0;
            const size_t n = std::min((double)table_.size(), horizon);
            for (size_t k = 0; k < n; ++k) m = std::max(m, table_[k]);
            return m;
        }
        case WeightKind::Custom: {
            double m = sup_hint_;
            const uint64_t n = (uint64_t)std::min(horizon, 1.0e6);
            for (uint64_t k = 1; k <= n; ++k) m = std::max(m, fn_(k));
            return m;
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<WeightSeq::Run> WeightSeq::runs(double horizon) const {
    std::vector<Run> out;
    if (kind_ == WeightKind::Constant) {
        out.push_back({1.0, horizon, c_, horizon});
        return out;
    }
    if (kind_ != WeightKind::FourBlock) return out;
    for (const Run& r : runs_) {
        if (r.lo > horizon) break;
        if (r.hi <= horizon)
            out.push_back(r);
        else
            out.push_back({r.lo, horizon, r.value, horizon - r.lo + 1.0});
    }
    return out;
}

double WeightSeq::max_closed_index() const {
    switch (kind_) {
        case WeightKind::FourBlock: return runs_.back().hi;
        case WeightKind::Tabulated: return (double)table_.size();
        case WeightKind::Custom: return 1.0e9;
        default: return 1.0e18;
    }
}

}  // namespace freqdyn
