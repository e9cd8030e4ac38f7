#include "freqdyn/shift_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "freqdyn/util.hpp"

namespace freqdyn {

namespace {

// The verdict pad stretches reported widths before threshold comparisons, so
// that exact-equality cases (inf(Lambda) equal to the true 1/lambda_w) stay
// on the decidable side of their own estimation bias.
constexpr double kVerdictWidthPad = 1.5;

std::vector<double> sample_grid(double lo, double hi, int points) {
    std::vector<double> g;
    if (lo < 1.0) lo = 1.0;
    if (hi <= lo) {
        g.push_back(hi);
        return g;
    }
    const double step = std::pow(hi / lo, 1.0 / (points - 1));
    double x = lo;
    for (int i = 0; i < points; ++i) {
        g.push_back(std::floor(x));
        x *= step;
    }
    g.push_back(hi);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

// Aitken delta-squared limit estimate from three samples, used only when the
// mean sequence is monotone along the geometric grid.
bool aitken_limit(double a1, double a2, double a3, double* out) {
    const double d1 = a2 - a1, d2 = a3 - a2;
    const double denom = d2 - d1;
    if (std::fabs(denom) < 1e-300) return false;
    *out = a3 - d2 * d2 / denom;
    return true;
}

struct MeanStats {
    double mu_max = -1e300, mu_min = 1e300;
    double spread_linear = 0.0;
    double extrap_gap = 0.0;
};

// max/min over the sampled means plus a trend term: when the prefix mean is
// strictly trending, its Aitken-extrapolated limit over samples at H/4, H/2,
// H measures how far the finite-horizon estimate may still drift.
MeanStats prefix_mean_stats(const std::vector<std::pair<double, double>>& means,
                            const std::vector<double>& geometric_mu, const double trend[3]) {
    MeanStats st;
    for (const auto& [n, mu] : means) {
        st.mu_max = std::max(st.mu_max, mu);
        st.mu_min = std::min(st.mu_min, mu);
    }
    st.spread_linear = std::exp(st.mu_max) - std::exp(st.mu_min);
    const bool trending = (trend[0] < trend[1] && trend[1] < trend[2]) ||
                          (trend[0] > trend[1] && trend[1] > trend[2]);
    if (trending && geometric_mu.size() >= 8) {
        double lim;
        if (aitken_limit(trend[0], trend[1], trend[2], &lim)) {
            const double s = std::max(st.mu_max - st.mu_min, std::fabs(trend[2] - trend[0]));
            lim = std::clamp(lim, st.mu_min - 2.0 * s - 1e-6, st.mu_max + 2.0 * s + 1e-6);
            st.extrap_gap = std::fabs(std::exp(trend[2]) - std::exp(lim));
        }
    }
    return st;
}

}  // namespace

double ShiftQuantities::width() const {
    return std::max(width_rw, std::max(width_lambda, width_rpw));
}

std::string ShiftQuantities::csv_row() const {
    return fmt12(norm_inv) + "," + fmt12(r_w) + "," + fmt12(lambda_w) + "," + fmt12(r_pw) + "," +
           fmt12(width()) + "," + fmt12(horizon_used);
}

ShiftQuantities shift_quantities(const WeightSeq& w, double horizon, double ell_p, uint64_t seed) {
    if (!(ell_p >= 1.0)) throw std::invalid_argument("shift_quantities: p must be >= 1");
    if (horizon < 1e3) throw std::invalid_argument("shift_quantities: horizon must be >= 1e3");
    double H = std::min(horizon, w.max_closed_index());

    ShiftQuantities q;
    q.horizon_used = H;
    q.norm_inv = 1.0 / w.sup_value(H);

    // n-grid: geometric on [H/2, H], plus run boundaries for run-structured kinds
    std::vector<double> geo = sample_grid(H / 2.0, H, 64);
    std::vector<double> grid = geo;
    if (w.piecewise()) {
        for (const auto& r : w.runs(H)) {
            if (r.hi >= 1.0) grid.push_back(r.hi);
            if (r.lo > 1.0) grid.push_back(r.lo - 1.0);
        }
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }

    std::vector<double> geo_mu;
    for (double n : geo) geo_mu.push_back(w.log_product(1.0, n) / n);

    for (double n : grid) {
        const double mu = w.log_product(1.0, n) / n;
        if (mu > 700.0) throw std::overflow_error("shift_quantities: unbounded product growth");
        q.prefix_means.push_back({n, mu});
    }

    double trend[3];
    for (int i = 0; i < 3; ++i) {
        const double n = std::floor(H / (double)(1 << (2 - i)));
        trend[i] = w.log_product(1.0, n) / n;
    }
    const MeanStats st = prefix_mean_stats(q.prefix_means, geo_mu, trend);
    q.lambda_w = std::exp(st.mu_max);
    q.r_pw = std::exp(st.mu_min);
    q.width_lambda = st.spread_linear + st.extrap_gap;
    q.width_rpw = q.width_lambda;

    // r_w: for run-structured kinds the limit is carried by run values whose
    // lengths keep growing; otherwise a Fekete window estimate with the inner
    // sup over k = 1 plus a seeded random sample.
    bool run_based = false;
    if (w.piecewise()) {
        auto runs = w.runs(H);
        std::vector<std::pair<double, std::vector<double>>> by_value;  // value -> lengths
        for (const auto& r : runs) {
            auto it = std::find_if(by_value.begin(), by_value.end(),
                                   [&](const auto& e) { return e.first == r.value; });
            if (it == by_value.end())
                by_value.push_back({r.value, {r.len}});
            else
                it->second.push_back(r.len);
        }
        double best = 0.0, best_len = 0.0;
        for (const auto& [value, lens] : by_value) {
            bool growing = false;
            if (lens.size() == 1 && lens[0] >= H) growing = true;  // constant weight
            if (lens.size() >= 3) {
                const size_t m = lens.size();
                growing = lens[m - 1] >= lens[m - 2] && lens[m - 2] >= lens[m - 3] &&
                          lens[m - 1] >= 2.0;
            }
            if (growing && value > best) {
                best = value;
                best_len = lens.back();
            }
        }
        if (best > 0.0) {
            run_based = true;
            q.r_w = best;
            // finite-run Fekete bias: one factor of ambiguity per run length
            q.width_rw = std::fabs(best * (std::pow(best, 1.0 / best_len) - 1.0)) + 1e-15;
        }
    }
    if (!run_based) {
        std::mt19937_64 rng(seed);
        std::vector<double> win_mu;
        double mu_max = -1e300, mu_min = 1e300;
        for (double n : geo) {
            if (n + 1.0 > H) continue;
            std::vector<double> ks = {1.0};
            const double k_hi = H - n;
            for (int i = 0; i < 64 && k_hi > 2.0; ++i) {
                const double u = (double)(rng() >> 11) * 0x1.0p-53;
                ks.push_back(std::floor(1.0 + u * (k_hi - 1.0)));
            }
            double best = -1e300;
            for (double k : ks) best = std::max(best, w.log_product(k, k + n) / n);
            win_mu.push_back(best);
            mu_max = std::max(mu_max, best);
            mu_min = std::min(mu_min, best);
        }
        q.r_w = std::exp(mu_max);
        double wtrend[3] = {win_mu.front(), win_mu[win_mu.size() / 2], win_mu.back()};
        const MeanStats tr = prefix_mean_stats({{1.0, mu_max}, {2.0, mu_min}}, win_mu, wtrend);
        q.width_rw = (std::exp(mu_max) - std::exp(mu_min)) + tr.extrap_gap;
    }
    return q;
}

// ---------------------------------------------------------------------------
// FHC verdict for one shift
// ---------------------------------------------------------------------------

FhcVerdict fhc_verdict(const WeightSeq& w, double ell_p, uint64_t horizon) {
    if (horizon < 1000) throw std::invalid_argument("fhc_verdict: horizon must be >= 1e3");
    const uint64_t H = (uint64_t)std::min((double)horizon, w.max_closed_index());
    LogSumAcc total, tail;
    double log_prod = 0.0;
    double term_at_H10 = 0.0, term_at_H = 0.0;
    for (uint64_t n = 1; n <= H; ++n) {
        log_prod += w.log_value(n);
        const double t = -ell_p * log_prod;  // log of the n-th term
        total.add(t);
        if (n > H / 2) tail.add(t);
        if (n == H / 10) term_at_H10 = t;
        if (n == H) term_at_H = t;
    }
    FhcVerdict v;
    v.tail_ratio = std::exp(tail.log_value() - total.log_value());
    const bool decade_decay = term_at_H <= term_at_H10 - std::log(2.0);
    if (v.tail_ratio < 1e-8 && decade_decay)
        v.status = FhcStatus::Satisfied;
    else if (v.tail_ratio >= 1e-3)
        v.status = FhcStatus::NotSatisfied;
    else
        v.status = FhcStatus::Inconclusive;
    return v;
}

// ---------------------------------------------------------------------------
// Common FHC verdict for multiples
// ---------------------------------------------------------------------------

void LambdaSet::validate() const {
    if (values.empty()) throw std::invalid_argument("LambdaSet: empty");
    for (double v : values)
        if (!(v > 0.0)) throw std::invalid_argument("LambdaSet: values must be positive");
}

double LambdaSet::inf() const { return *std::min_element(values.begin(), values.end()); }
double LambdaSet::sup() const { return *std::max_element(values.begin(), values.end()); }

CommonFhcVerdict common_fhc_verdict(const WeightSeq&, double, const LambdaSet& lambda,
                                    const ShiftQuantities& q) {
    lambda.validate();
    CommonFhcVerdict v;
    v.gap_lo = 1.0 / q.r_pw;
    v.gap_hi = 1.0 / q.lambda_w;
    if (!lambda.countable) {
        v.status = CommonFhcStatus::Empty;
        v.reason = "Lambda flagged uncountable";
        return v;
    }
    if (lambda.unbounded) {
        v.status = CommonFhcStatus::Empty;
        v.reason = "Lambda unbounded";
        return v;
    }
    const double inf = lambda.inf();
    if (lambda.effective_size() >= 2 &&
        inf <= 1.0 / q.lambda_w + kVerdictWidthPad * q.width_lambda) {
        v.status = CommonFhcStatus::Empty;
        v.reason = "inf(Lambda) <= 1/lambda_w within estimate width";
        return v;
    }
    if (inf > 1.0 / q.r_pw + kVerdictWidthPad * q.width_rpw) {
        v.status = CommonFhcStatus::NonEmpty;
        v.reason = "Lambda countable, bounded, inside (1/r_pw, +inf)";
        return v;
    }
    v.status = CommonFhcStatus::Unknown;
    v.reason = "inf(Lambda) falls in the undecided interval (1/r_pw, 1/lambda_w]";
    return v;
}

// ---------------------------------------------------------------------------
// Pairwise product-equivalence check
// ---------------------------------------------------------------------------

PairEquiv pair_equiv_check(const WeightSeq& w1, const WeightSeq& w2, uint64_t horizon) {
    const uint64_t H =
        (uint64_t)std::min({(double)horizon, w1.max_closed_index(), w2.max_closed_index()});
    if (H < 100) throw std::invalid_argument("pair_equiv_check: horizon too small");
    double d = 0.0, max_abs = 0.0;
    double dec_min = 1e300, dec_max = -1e300;
    for (uint64_t n = 1; n <= H; ++n) {
        d += w1.log_value(n) - w2.log_value(n);
        const double a = std::fabs(d);
        max_abs = std::max(max_abs, a);
        if (n > H - H / 10) {
            dec_min = std::min(dec_min, a);
            dec_max = std::max(dec_max, a);
        }
    }
    PairEquiv out;
    const double osc = dec_max - dec_min;
    out.comparable = max_abs <= 50.0 && osc <= 0.1 * std::max(max_abs, 1e-12);
    out.C = out.comparable ? std::exp(max_abs) : std::exp(std::min(max_abs, 700.0));
    return out;
}

}  // namespace freqdyn
