#include "freqdyn/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace freqdyn {

// ---------------------------------------------------------------------------
// Shift actions
// ---------------------------------------------------------------------------

SparseVec apply_backward(const WeightSeq& w, const SparseVec& x) {
    SparseVec out(x.p());
    for (const auto& [k, c] : x.entries()) {
        if (k == 0) continue;
        out.add(k - 1, c * w.value(k));
    }
    return out;
}

SparseVec apply_forward(const WeightSeq& w, const SparseVec& x) {
    SparseVec out(x.p());
    for (const auto& [k, c] : x.entries()) out.add(k + 1, c / w.value(k + 1));
    return out;
}

ShiftWord shift_word(const WeightSeq& w_num, const WeightSeq& w_den, uint64_t m, uint64_t l,
                     uint64_t k) {
    ShiftWord out{};
    if (m > k + l) {
        out.annihilated = true;
        return out;
    }
    out.annihilated = false;
    out.index = k + l - m;
    out.sign = 1;
    double log_c = 0.0;
    if (m >= 1) log_c += w_num.log_product((double)(k + l - m + 1), (double)(k + l));
    if (l >= 1) log_c -= w_den.log_product((double)(k + 1), (double)(k + l));
    out.log_coefficient = log_c;
    out.coefficient = std::exp(log_c);
    return out;
}

// ---------------------------------------------------------------------------
// CTypeParams
// ---------------------------------------------------------------------------

CTypeParams CTypeParams::general(std::vector<double> v, std::vector<double> w,
                                 std::vector<uint64_t> phi, std::vector<uint64_t> b) {
    CTypeParams p;
    p.flavor_ = CTypeFlavor::General;
    p.v_ = std::move(v);
    p.w_ = std::move(w);
    p.phi_ = std::move(phi);
    p.b_ = std::move(b);
    p.validate();
    return p;
}

CTypeParams CTypeParams::cplus_one(std::vector<uint64_t> delta, std::vector<uint64_t> tau,
                                   std::vector<uint64_t> sigma_delta, uint64_t b1) {
    if (delta.size() != tau.size() || delta.size() != sigma_delta.size() || delta.empty())
        throw std::invalid_argument("cplus_one: level tables must be non-empty, equal sizes");
    CTypeParams p;
    p.flavor_ = CTypeFlavor::CPlusOne;
    p.delta_ = std::move(delta);
    p.tau_ = std::move(tau);
    p.sigma_ = std::move(sigma_delta);
    p.b1_ = b1;
    const int K = (int)p.delta_.size();
    const uint64_t blocks = 1ull << K;  // blocks 0 .. 2^K - 1
    p.b_.resize(blocks + 1);
    p.b_[0] = 0;
    p.b_[1] = b1;
    for (uint64_t n = 1; n < blocks; ++n) {
        int k = 1;
        while ((1ull << k) <= n) ++k;  // n in [2^{k-1}, 2^k)
        p.b_[n + 1] = p.b_[n] + p.delta_[k - 1];
    }
    p.validate();
    return p;
}

CTypeParams CTypeParams::reference_cplus_one(int levels) {
    std::vector<uint64_t> delta(levels), tau(levels), sigma(levels);
    for (int k = 1; k <= levels; ++k) {
        delta[k - 1] = 1ull << (2 * k);  // 4^k
        tau[k - 1] = delta[k - 1] / 4;
        sigma[k - 1] = delta[k - 1] / 2;
    }
    return cplus_one(std::move(delta), std::move(tau), std::move(sigma), 2);
}

int CTypeParams::level_of_block(uint64_t n) const {
    if (n == 0) return 0;
    int k = 1;
    while ((1ull << k) <= n) ++k;
    return k;
}

uint64_t CTypeParams::block_of(uint64_t index) const {
    if (index >= b_.back())
        throw std::runtime_error("ctype: index " + std::to_string(index) +
                                 " beyond materialized block horizon");
    auto it = std::upper_bound(b_.begin(), b_.end(), index);
    return (uint64_t)(it - b_.begin()) - 1;
}

uint64_t CTypeParams::phi(uint64_t n) const {
    if (n == 0) return 0;
    if (flavor_ == CTypeFlavor::General) return phi_.at(n);
    const int k = level_of_block(n);
    return n - (1ull << (k - 1));
}

double CTypeParams::v(uint64_t n) const {
    if (n == 0) throw std::domain_error("ctype v: n >= 1");
    if (flavor_ == CTypeFlavor::General) return v_.at(n);
    const int k = level_of_block(n);
    const uint64_t t = tau_.at(k - 1);
    if (t > 1000) throw std::domain_error("ctype v: 2^{-tau} below double range at level " +
                                          std::to_string(k));
    return std::ldexp(1.0, -(int)t);
}

double CTypeParams::w(uint64_t j) const {
    if (j == 0) throw std::domain_error("ctype w: j >= 1");
    if (flavor_ == CTypeFlavor::General) return w_.at(j);
    const uint64_t n = block_of(j);
    const uint64_t i = j - b_[n];
    if (i == 0) return 1.0;  // block boundary, unused by the action
    const uint64_t sigma = n == 0 ? b1_ / 2 : sigma_.at(level_of_block(n) - 1);
    return i <= sigma ? 2.0 : 1.0;
}

double CTypeParams::log_interior_product(uint64_t n) const {
    if (flavor_ == CTypeFlavor::CPlusOne)
        return (double)interior_pow2_exponent(n) * std::log(2.0);
    const uint64_t lo = b_.at(n) + 1, hi = b_.at(n + 1) - 1;
    double s = 0.0;
    for (uint64_t j = lo; j <= hi; ++j) s += std::log(std::fabs(w_.at(j)));
    return s;
}

int64_t CTypeParams::interior_pow2_exponent(uint64_t n) const {
    if (flavor_ != CTypeFlavor::CPlusOne)
        throw std::domain_error("interior_pow2_exponent: C_{+,1} only");
    const uint64_t len = b_.at(n + 1) - b_.at(n) - 1;
    const uint64_t sigma = n == 0 ? b1_ / 2 : sigma_.at(level_of_block(n) - 1);
    return (int64_t)std::min(sigma, len);
}

void CTypeParams::validate() const {
    if (b_.size() < 2 || b_[0] != 0) throw std::invalid_argument("ctype: need b_0 = 0 and blocks");
    for (size_t n = 0; n + 1 < b_.size(); ++n) {
        if (b_[n + 1] <= b_[n]) throw std::invalid_argument("ctype: b must be increasing");
        if (b_[n + 1] - b_[n] < 2)
            throw std::invalid_argument("ctype: block " + std::to_string(n) +
                                        " has length < 2 (empty-product rule)");
    }
    const size_t B = b_.size() - 1;
    if (phi(0) != 0) throw std::invalid_argument("ctype: phi(0) must be 0");
    for (uint64_t n = 1; n < B; ++n) {
        const uint64_t f = phi(n);
        if (f >= n) throw std::invalid_argument("ctype: phi(n) < n violated at n = " + std::to_string(n));
        const uint64_t len = b_[n + 1] - b_[n];
        const uint64_t flen = b_[f + 1] - b_[f];
        if (len % (2 * flen) != 0)
            throw std::invalid_argument("ctype: b_{n+1}-b_n not a multiple of 2(b_{phi+1}-b_phi) at n = " +
                                        std::to_string(n));
    }
    if (flavor_ == CTypeFlavor::General) {
        if (v_.size() < B) throw std::invalid_argument("ctype: v table too short");
        double vsum = 0.0, vtail = 0.0;
        for (uint64_t n = 1; n < B; ++n) {
            if (v_[n] == 0.0) throw std::invalid_argument("ctype: v_n must be non-zero");
            vsum += std::fabs(v_[n]);
            if (n > B / 2) vtail += std::fabs(v_[n]);
        }
        if (B > 4 && vtail > 0.9 * vsum)
            throw std::invalid_argument("ctype: |v| tail does not decay");
        if (w_.size() < b_.back()) throw std::invalid_argument("ctype: w table too short");
        double winf = 1e300, wsup = 0.0;
        for (uint64_t j = 1; j < b_.back(); ++j) {
            const double a = std::fabs(w_[j]);
            winf = std::min(winf, a);
            wsup = std::max(wsup, a);
        }
        if (!(winf > 0.0) || !(wsup < 1e300))
            throw std::invalid_argument("ctype: w must satisfy 0 < inf|w| <= sup|w| < inf");
        double min_prod = 1e300;
        for (uint64_t n = 0; n < B; ++n)
            min_prod = std::min(min_prod, log_interior_product(n));
        if (!(min_prod > std::log(1e-12)))
            throw std::invalid_argument("ctype: inf over blocks of interior |w| products is not positive");
    } else {
        for (size_t i = 0; i < delta_.size(); ++i) {
            if (sigma_[i] >= delta_[i])
                throw std::invalid_argument("ctype: sigma_delta must be < delta per level");
            if (i > 0 && (tau_[i] <= tau_[i - 1] || sigma_[i] <= sigma_[i - 1]))
                throw std::invalid_argument("ctype: tau and sigma_delta must be strictly increasing");
        }
    }
}

// ---------------------------------------------------------------------------
// Action, period, closed iterate form
// ---------------------------------------------------------------------------

SparseVec ctype_apply(const CTypeParams& params, const SparseVec& x, uint64_t times) {
    const bool dyadic = params.flavor() == CTypeFlavor::CPlusOne;
    const auto inv_interior = [&](uint64_t n, double c) {
        if (dyadic) {
            const int64_t e = params.interior_pow2_exponent(n);
            if (e > 1000) throw std::domain_error("ctype_apply: interior product exponent too large");
            return std::ldexp(c, -(int)e);
        }
        return c * std::exp(-params.log_interior_product(n));
    };
    SparseVec cur = x;
    for (uint64_t t = 0; t < times; ++t) {
        SparseVec next(cur.p());
        for (const auto& [idx, c] : cur.entries()) {
            const uint64_t n = params.block_of(idx);
            const uint64_t top = params.b(n + 1) - 1;
            if (idx < top) {
                next.add(idx + 1, c * params.w(idx + 1));
            } else if (n == 0) {
                next.add(0, -inv_interior(0, c));
            } else {
                next.add(params.b(params.phi(n)), c * params.v(n));
                next.add(params.b(n), -inv_interior(n, c));
            }
        }
        cur = std::move(next);
    }
    return cur;
}

uint64_t ctype_period(const CTypeParams& params, const SparseVec& x) {
    if (x.zero()) return 1;
    uint64_t l = 1;
    for (const auto& [idx, c] : x.entries()) {
        const uint64_t n = params.block_of(idx);
        const uint64_t period = 2 * (params.b(n + 1) - params.b(n));
        l = std::lcm(l, period);
    }
    return l;
}

SparseVec ctype_iterate_closed_form(const CTypeParams& params, int k, uint64_t l, uint64_t m) {
    if (params.flavor() != CTypeFlavor::CPlusOne)
        throw std::domain_error("ctype_iterate_closed_form: needs a C_{+,1} parameter set");
    if (k < 1 || k > params.levels()) throw std::domain_error("ctype_iterate_closed_form: level out of range");
    if (l >= (1ull << (k - 1))) throw std::domain_error("ctype_iterate_closed_form: need l < 2^{k-1}");
    const uint64_t delta = params.delta_level(k);
    if (m < 1 || m > delta) throw std::domain_error("ctype_iterate_closed_form: need 1 <= m <= Delta^{(k)}");
    const int64_t sigma = (int64_t)params.sigma_level(k);
    const int64_t tau = (int64_t)params.tau_level(k);
    // #2s in w_i^{(k)} over i in [a, b]
    const auto count2 = [&](int64_t a, int64_t b) -> int64_t {
        if (a > b) return 0;
        return std::max<int64_t>(0, std::min(b, sigma) - a + 1);
    };
    const int64_t e1 = -tau + count2((int64_t)(delta - m + 1), (int64_t)delta - 1);
    const int64_t e2 = -count2(1, (int64_t)(delta - m));
    if (std::llabs(e1) > 1000 || std::llabs(e2) > 1000)
        throw std::domain_error("ctype_iterate_closed_form: coefficient exponent out of double range");
    SparseVec out(2.0);
    out.set(params.b(l), std::ldexp(1.0, (int)e1));
    out.set(params.b((1ull << (k - 1)) + l), -std::ldexp(1.0, (int)e2));
    return out;
}

// ---------------------------------------------------------------------------
// Family hypothesis checker
// ---------------------------------------------------------------------------

CPlusCommonReport cplus_common_verdict(const std::vector<CTypeParams>& family, double alpha_frac,
                                       int k_max) {
    if (family.empty()) throw std::invalid_argument("cplus_common_verdict: empty family");
    if (!(alpha_frac > 0.0 && alpha_frac < 1.0))
        throw std::invalid_argument("cplus_common_verdict: alpha_frac in (0,1)");
    for (const auto& p : family) {
        if (p.flavor() != CTypeFlavor::CPlusOne)
            throw std::invalid_argument("cplus_common_verdict: all members must be C_{+,1}");
        if (p.levels() < k_max)
            throw std::invalid_argument("cplus_common_verdict: k_max beyond a member's levels");
        for (int k = 1; k <= k_max; ++k)
            if (p.delta_level(k) != family[0].delta_level(k))
                throw std::invalid_argument("cplus_common_verdict: members do not share b");
    }

    CPlusCommonReport rep;
    // limsup proxy per member: max of (sigma - tau)/delta over the top half of levels
    const int k_lo = std::max(1, (k_max + 1) / 2);
    long long num = 1, den = 1;
    bool first = true;
    for (const auto& p : family) {
        long long bn = 0, bd = 1;
        for (int k = k_lo; k <= k_max; ++k) {
            const long long n = (long long)p.sigma_level(k) - (long long)p.tau_level(k);
            const long long d = (long long)p.delta_level(k);
            if ((__int128)n * bd > (__int128)bn * d) {
                bn = n;
                bd = d;
            }
        }
        if (first || (__int128)bn * den < (__int128)num * bd) {
            num = bn;
            den = bd;
            first = false;
        }
    }
    const long long g = std::gcd(std::max<long long>(num, 1), den);
    rep.ratio_num = num / g;
    rep.ratio_den = den / g;
    rep.hold = (long double)num / (long double)den >= 2.0L * (long double)alpha_frac;
    rep.reason = rep.hold ? "inf over members of limsup (sigma-tau)/Delta meets the 2*alpha margin"
                          : "ratio (sigma-tau)/Delta falls below 2*alpha";

    // product lower-bound witnesses: 2^{count2(n+1..Delta-1) - tau} > C for all
    // n <= floor(alpha_frac * Delta)
    const double Cs[] = {10.0, 1e3, 1e6};
    const int k0s[] = {1, 2, 4, 8};
    for (size_t s = 0; s < family.size(); ++s) {
        const auto& p = family[s];
        for (double C : Cs) {
            for (int k0 : k0s) {
                if (k0 > k_max) continue;
                int found = -1;
                for (int k = k0; k <= k_max; ++k) {
                    const int64_t delta = (int64_t)p.delta_level(k);
                    const int64_t sigma = (int64_t)p.sigma_level(k);
                    const int64_t tau = (int64_t)p.tau_level(k);
                    const int64_t n_worst = (int64_t)std::floor(alpha_frac * (double)delta);
                    const int64_t cnt = std::max<int64_t>(
                        0, std::min(delta - 1, sigma) - (n_worst + 1) + 1);
                    const int64_t e = cnt - tau;
                    const bool ok = e >= 64 || (e > 0 && std::ldexp(1.0, (int)e) > C);
                    if (ok) {
                        found = k;
                        break;
                    }
                }
                rep.witnesses.push_back({s, C, k0, found});
            }
        }
    }

    // cross-member product-ratio table: per level, windows gain a factor 2 for
    // each i in (sigma_s, sigma_t]; bounded iff those gains vanish eventually
    for (size_t s = 0; s < family.size(); ++s) {
        for (size_t t = 0; t < family.size(); ++t) {
            if (s == t) continue;
            long long cum = 0;
            bool late_gain = false;
            for (int k = 1; k <= k_max; ++k) {
                const long long c = std::max<long long>(
                    0, (long long)family[t].sigma_level(k) - (long long)family[s].sigma_level(k));
                const long long blocks = 1ll << (k - 1);
                cum += std::min<long long>(c * blocks, 4000);
                if (k >= k_lo && c > 0) late_gain = true;
            }
            CPlusCommonReport::PairBound pb;
            pb.s = s;
            pb.t = t;
            pb.bounded = !late_gain;
            pb.K = std::exp2(std::min<long long>(cum, 1023));
            rep.pair_bounds.push_back(pb);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

CTypeParams CTypeParams::parse_config(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string flavor;
    uint64_t b1 = 2, levels = 0;
    std::vector<uint64_t> delta, tau, sigma;
    auto ensure = [](std::vector<uint64_t>& v, size_t k) {
        if (v.size() < k) v.resize(k, 0);
    };
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "flavor") {
            flavor = val;
        } else if (key == "b_horizon") {
            levels = std::stoull(val);
        } else if (key == "b1") {
            b1 = std::stoull(val);
        } else {
            const auto br = key.find('[');
            if (br == std::string::npos || key.back() != ']')
                throw std::invalid_argument("ctype config: bad key " + key);
            const std::string base = key.substr(0, br);
            const size_t k = std::stoull(key.substr(br + 1, key.size() - br - 2));
            if (k < 1) throw std::invalid_argument("ctype config: level index starts at 1");
            const uint64_t v = std::stoull(val);
            if (base == "delta") {
                ensure(delta, k);
                delta[k - 1] = v;
            } else if (base == "tau") {
                ensure(tau, k);
                tau[k - 1] = v;
            } else if (base == "sigma_delta") {
                ensure(sigma, k);
                sigma[k - 1] = v;
            } else {
                throw std::invalid_argument("ctype config: unknown key " + base);
            }
        }
    }
    if (flavor != "cplus1") throw std::invalid_argument("ctype config: flavor must be cplus1");
    if (levels == 0) levels = delta.size();
    if (delta.size() != levels || tau.size() != levels || sigma.size() != levels)
        throw std::invalid_argument("ctype config: level tables incomplete");
    return cplus_one(std::move(delta), std::move(tau), std::move(sigma), b1);
}

std::string CTypeParams::config_string() const {
    if (flavor_ != CTypeFlavor::CPlusOne)
        throw std::domain_error("config_string: only C_{+,1} parameter sets are serialized");
    std::ostringstream out;
    out << "flavor = cplus1\n";
    out << "b_horizon = " << delta_.size() << "\n";
    out << "b1 = " << b1_ << "\n";
    for (size_t k = 1; k <= delta_.size(); ++k) {
        out << "delta[" << k << "] = " << delta_[k - 1] << "\n";
        out << "tau[" << k << "] = " << tau_[k - 1] << "\n";
        out << "sigma_delta[" << k << "] = " << sigma_[k - 1] << "\n";
    }
    return out.str();
}

}  // namespace freqdyn
