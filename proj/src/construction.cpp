#include "freqdyn/construction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "freqdyn/util.hpp"

namespace freqdyn {

// ---------------------------------------------------------------------------
// Budget
// ---------------------------------------------------------------------------

double EpsilonBudget::eps(int p) const { return std::ldexp(1.0, -(p + 2)); }

double EpsilonBudget::r1(int q) const {
    // 2 sum_{p<q} eps_q + 2 sum_{p>=q} eps_p
    return 2.0 * q * eps(q) + std::ldexp(1.0, -q);
}

double EpsilonBudget::r2(int q) const {
    // sum_{p>=q} eps_p + q eps_q + q eps_q J_q eps_{J_q}
    return std::ldexp(1.0, -(q + 1)) + q * eps(q) + q * eps(q) * J(q) * eps(J(q));
}

double EpsilonBudget::r(int q) const { return eps(q) + r1(q) + 2.0 * r2(q); }

// ---------------------------------------------------------------------------
// Separation exponent
// ---------------------------------------------------------------------------

SeparationExponent choose_separation_exponent(const std::vector<double>& lambdas, double a_bound) {
    if (lambdas.empty()) throw std::invalid_argument("choose_separation_exponent: empty lambdas");
    const double inf = *std::min_element(lambdas.begin(), lambdas.end());
    const double sup = *std::max_element(lambdas.begin(), lambdas.end());
    if (!(inf > a_bound))
        throw std::invalid_argument("choose_separation_exponent: inf(Lambda) must exceed the a_T bound");
    SeparationExponent se;
    se.d = 0.5 * (a_bound + inf);
    if (sup == inf) {
        se.c = 1.5;
        return se;
    }
    se.c = 1.02 * (1.0 + std::log(sup / inf) / std::log(inf / se.d));
    return se;
}

// ---------------------------------------------------------------------------
// Tail-threshold table
// ---------------------------------------------------------------------------

namespace {

// log || F_w^n y ||_p; n = 0 gives log ||y||.
double log_forward_norm(const WeightSeq& w, const SparseVec& y, uint64_t n, double p) {
    LogSumAcc acc;
    for (const auto& [j, c] : y.entries()) {
        double t = std::log(std::fabs(c));
        if (n >= 1) t -= w.log_product((double)(j + 1), (double)(j + n));
        acc.add(p * t);
    }
    return acc.log_value() / p;
}

}  // namespace

TailTable tail_threshold_table(const MultiplesFamily& family, const std::vector<SparseVec>& targets,
                               const EpsilonBudget& budget, double c, uint64_t cap) {
    if (targets.empty() || family.lambdas.empty())
        throw std::invalid_argument("tail_threshold_table: empty targets or lambdas");
    if (!(c > 1.0)) throw std::invalid_argument("tail_threshold_table: need c > 1");

    // admissibility of the multipliers: lambda > 1/r_pw + width
    double pivot_d;
    {
        const ShiftQuantities q = shift_quantities(family.w, 1e5, family.ell_p);
        for (double lam : family.lambdas)
            if (!(lam > 1.0 / q.r_pw + q.width_rpw))
                throw std::invalid_argument(
                    "tail_threshold_table: lambda " + fmt12(lam) +
                    " not above the admissible bound 1/r_pw = " + fmt12(1.0 / q.r_pw));
        const double inf = *std::min_element(family.lambdas.begin(), family.lambdas.end());
        const double sup = *std::max_element(family.lambdas.begin(), family.lambdas.end());
        pivot_d = 0.5 * (1.0 / q.r_pw + q.width_rpw + inf);
        if (family.lambdas.size() >= 2 &&
            sup / inf * std::pow(pivot_d / inf, c - 1.0) > 1.0 + 1e-12)
            throw std::invalid_argument("tail_threshold_table: c violates the separation constraint");
    }

    const size_t n_ops = family.lambdas.size();
    const size_t n_targets = targets.size();
    const uint64_t n_max = cap + 4 * cap;

    uint64_t h_max = 0;
    for (const auto& y : targets) h_max = std::max(h_max, y.max_index());

    // suffix log-sums of the series terms lambda^{-n} ||F^n y||, n in [1, n_max]
    std::vector<std::vector<std::vector<double>>> suffix(
        n_ops, std::vector<std::vector<double>>(n_targets));
    for (size_t k = 0; k < n_ops; ++k) {
        const double llam = std::log(family.lambdas[k]);
        for (size_t q = 0; q < n_targets; ++q) {
            std::vector<double>& s = suffix[k][q];
            s.assign(n_max + 2, kNegInf);
            LogSumAcc acc;
            for (uint64_t n = n_max; n >= 1; --n) {
                acc.add(-(double)n * llam + log_forward_norm(family.w, targets[q], n, family.ell_p));
                s[n] = acc.log_value();
                if (n == 1) break;
            }
        }
    }

    const auto cross_sup = [&](uint64_t N, size_t k, size_t l, size_t q) -> double {
        // sup over m of (lambda_k/lambda_l)^m * sum_{n >= max(N, (c-1)m)} terms
        const double lr = std::log(family.lambdas[k] / family.lambdas[l]);
        double best = kNegInf;
        for (uint64_t m = 0;; ++m) {
            const uint64_t n0 = std::max<uint64_t>(N, (uint64_t)std::ceil((c - 1.0) * (double)m));
            if (n0 > n_max) break;
            best = std::max(best, (double)m * lr + suffix[l][q][n0]);
        }
        return best;
    };

    TailTable table;
    table.c = c;
    table.d = pivot_d;
    table.N.assign(n_targets, std::vector<uint64_t>(n_ops, 0));
    table.N_cond_ii = table.N;
    table.N_cond_vii = table.N;
    table.N_cond_cross = table.N;

    for (size_t p = 0; p < n_targets; ++p) {
        for (size_t i = 0; i < n_ops; ++i) {
            const double lb_ii = std::log(budget.eps((int)p));
            const double lb_vii = std::log(budget.eps((int)p)) + std::log(budget.eps((int)i));
            const double lb_cross =
                std::min(lb_vii, std::log(budget.eps(budget.J((int)p))) + std::log(budget.eps((int)p)));

            const auto cond_ii = [&](uint64_t N) {
                for (size_t k = 0; k < n_ops; ++k)
                    for (size_t q = 0; q <= p; ++q)
                        if (!(suffix[k][q][N] < lb_ii)) return false;
                return true;
            };
            const auto cond_vii = [&](uint64_t N) {
                for (size_t k = 0; k < n_ops; ++k)
                    for (size_t q = 0; q <= p; ++q)
                        if (!(suffix[k][q][N] < lb_vii)) return false;
                return true;
            };
            const auto cond_cross = [&](uint64_t N) {
                for (size_t k = 0; k < n_ops; ++k)
                    for (size_t l = 0; l < n_ops; ++l) {
                        if (k == l) continue;
                        for (size_t q = 0; q <= p; ++q)
                            if (!(cross_sup(N, k, l, q) < lb_cross)) return false;
                    }
                return true;
            };
            const auto first_N = [&](auto&& cond, const char* name) -> uint64_t {
                for (uint64_t N = h_max + 1; N <= cap; ++N)
                    if (cond(N)) return N;
                throw std::runtime_error(std::string("tail_threshold_table: condition ") + name +
                                         " did not close below cap for label (p=" +
                                         std::to_string(p) + ", i=" + std::to_string(i) + ")");
            };

            table.N_cond_ii[p][i] = first_N(cond_ii, "(ii)");
            table.N_cond_vii[p][i] = first_N(cond_vii, "(vii)");
            table.N_cond_cross[p][i] =
                n_ops >= 2 ? first_N(cond_cross, "(iii)/(iv)") : table.N_cond_ii[p][i];
            uint64_t N = std::max({table.N_cond_ii[p][i], table.N_cond_vii[p][i],
                                   table.N_cond_cross[p][i], h_max + 1});
            if (p > 0) N = std::max(N, table.N[p - 1][i]);  // non-decreasing in p
            table.N[p][i] = N;
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Separated family: the explicit geometric-interval construction
// ---------------------------------------------------------------------------

size_t SeparatedFamily::label_index(int p, int i) const {
    for (size_t idx = 0; idx < labels.size(); ++idx)
        if (labels[idx].p == p && labels[idx].i == i) return idx;
    throw std::out_of_range("SeparatedFamily: unknown label");
}

std::string SeparatedFamily::csv() const {
    std::ostringstream out;
    out << "p,i,N,u_min,count\n";
    for (size_t idx = 0; idx < labels.size(); ++idx)
        out << labels[idx].p << "," << labels[idx].i << "," << N[idx] << "," << u_min[idx] << ","
            << sets[idx].size() << "\n";
    return out.str();
}

SeparatedFamily build_index_sets(const std::vector<std::vector<uint64_t>>& N_table, double K,
                                 const std::vector<Label>& labels, uint64_t horizon, double eps,
                                 double a_slack) {
    if (!(K > 1.0)) throw std::invalid_argument("build_index_sets: K must be > 1");
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("build_index_sets: eps in (0, 1/2)");
    if (!(a_slack > 1.0)) throw std::invalid_argument("build_index_sets: a_slack must exceed 1");
    if (labels.empty()) throw std::invalid_argument("build_index_sets: no labels");

    SeparatedFamily fam;
    fam.eps = eps;
    fam.K = K;
    fam.a = a_slack * K * (1.0 + 2.0 * eps) / (1.0 - 2.0 * eps);
    fam.M = (int)labels.size();
    fam.labels = labels;
    fam.horizon = horizon;

    for (size_t idx = 0; idx < labels.size(); ++idx) {
        const uint64_t N = N_table.at(labels[idx].p).at(labels[idx].i);
        if (N == 0) throw std::invalid_argument("build_index_sets: N must be positive");
        fam.N.push_back(N);
        uint64_t u = 0;
        double au = 1.0;
        while (eps * au < (double)N) {
            ++u;
            au *= fam.a;
        }
        fam.u_min.push_back(u);
    }
    // rotate the residue classes so that they start at the smallest admissible
    // block index; label order already puts the smallest N first
    const uint64_t u0 = *std::min_element(fam.u_min.begin(), fam.u_min.end());
    for (size_t idx = 0; idx < labels.size(); ++idx)
        fam.residue.push_back((int)((u0 + idx) % (uint64_t)fam.M));

    for (size_t idx = 0; idx < labels.size(); ++idx) {
        const uint64_t N = fam.N[idx];
        const uint64_t u = fam.u_min[idx];
        std::vector<uint64_t> set;
        // admissible u: in the residue class, >= u_min
        uint64_t first_u = fam.residue[idx] % fam.M;
        while (first_u < u) first_u += fam.M;
        for (double apw = std::pow(fam.a, (double)first_u); ; apw *= std::pow(fam.a, (double)fam.M)) {
            const double lo_r = (1.0 - eps) * apw, hi_r = (1.0 + eps) * apw;
            if (lo_r > (double)horizon) break;
            const uint64_t lo = (uint64_t)std::ceil(lo_r);
            const uint64_t hi = (uint64_t)std::min(std::floor(hi_r), (double)horizon);
            for (uint64_t n = (lo + N - 1) / N * N; n <= hi; n += N) set.push_back(n);
            if (apw > 2.0 * (double)horizon) break;
        }
        fam.empty_warning.push_back(set.empty());
        fam.sets.push_back(std::move(set));
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Assembled vector
// ---------------------------------------------------------------------------

AssembledVector assemble_common_vector(const SeparatedFamily& family, const MultiplesFamily& mult,
                                       const std::vector<SparseVec>& targets, uint64_t support_cap,
                                       const EpsilonBudget& budget) {
    AssembledVector out{LogSparseVec(mult.ell_p), 0.0};
    double tail_acc = 0.0;
    for (size_t idx = 0; idx < family.labels.size(); ++idx) {
        const Label lab = family.labels[idx];
        const SparseVec& y = targets.at(lab.p);
        const double lam = mult.lambdas.at(lab.i);
        const double llam = std::log(lam);
        double last_log_norm = kNegInf, prev_log_norm = kNegInf;
        for (uint64_t n : family.sets[idx]) {
            if (n + y.max_index() <= support_cap) {
                for (const auto& [j, c] : y.entries()) {
                    const double lmag = std::log(std::fabs(c)) - (double)n * llam -
                                        mult.w.log_product((double)(j + 1), (double)(j + n));
                    out.x.add(j + n, LogCoef{c > 0.0 ? 1 : -1, lmag});
                }
            } else {
                const double ln = -(double)n * llam +
                                  log_forward_norm(mult.w, y, n, mult.ell_p);
                tail_acc += std::exp(ln);
                prev_log_norm = last_log_norm;
                last_log_norm = ln;
            }
        }
        // geometric majorant for the part of the series beyond the horizon
        if (last_log_norm != kNegInf) {
            double rho = prev_log_norm == kNegInf ? 1.0 / lam : std::exp(last_log_norm - prev_log_norm);
            if (!(rho < 1.0))
                throw std::runtime_error("assemble_common_vector: discarded terms do not decay; "
                                         "support_cap too small");
            tail_acc += std::exp(last_log_norm) * rho / (1.0 - rho);
        }
    }
    out.discarded_tail_bound = tail_acc;

    double min_r = 1e300;
    for (int q = 0; q < (int)targets.size(); ++q) min_r = std::min(min_r, budget.r(q));
    if (tail_acc > min_r / 10.0)
        throw std::runtime_error("assemble_common_vector: discarded tail bound " + fmt12(tail_acc) +
                                 " exceeds min_q r_q / 10; support_cap too small");
    return out;
}

// ---------------------------------------------------------------------------
// Hit verification
// ---------------------------------------------------------------------------

namespace {

// (lambda B_w)^m x in log-sparse form
LogSparseVec shifted_orbit_point(const LogSparseVec& x, const WeightSeq& w, double lambda,
                                 uint64_t m) {
    LogSparseVec out(x.p());
    const double llam = std::log(lambda);
    for (const auto& [idx, c] : x.entries()) {
        if (idx < m) continue;
        double lmag = c.logmag + (double)m * llam;
        if (m >= 1) lmag += w.log_product((double)(idx - m + 1), (double)idx);
        out.add(idx - m, LogCoef{c.sign, lmag});
    }
    return out;
}

}  // namespace

std::string HitReport::csv() const {
    std::ostringstream out;
    out << "q,j,m,norm,r_q,pass\n";
    for (const auto& r : rows)
        out << r.q << "," << r.j << "," << r.m << "," << fmt12(r.norm) << "," << fmt12(r.r_q) << ","
            << (r.pass ? 1 : 0) << "\n";
    return out.str();
}

HitReport verify_frequent_hits(const LogSparseVec& x, const SeparatedFamily& family,
                               const MultiplesFamily& mult, const std::vector<SparseVec>& targets,
                               const EpsilonBudget& budget, Window window) {
    HitReport rep;
    rep.all_pass = true;
    const DensitySeq nat = DensitySeq::constant(1.0);
    for (size_t idx = 0; idx < family.labels.size(); ++idx) {
        const Label lab = family.labels[idx];
        const double r_q = budget.r(lab.p);
        const double lam = mult.lambdas.at(lab.i);
        uint64_t probes = 0;
        for (uint64_t m : family.sets[idx]) {
            if (m < window.lo || m > window.hi) continue;
            const LogSparseVec orbit = shifted_orbit_point(x, mult.w, lam, m);
            const double norm = orbit.dist(targets.at(lab.p));
            const bool pass = norm < r_q;
            rep.rows.push_back({lab.p, lab.i, m, norm, r_q, pass});
            rep.all_pass = rep.all_pass && pass;
            ++probes;
        }
        // density window anchored at the set's first element (empty sets read 0)
        double density = 0.0;
        if (!family.sets[idx].empty() && family.sets[idx][0] < window.hi) {
            const IndexSet e = IndexSet::from_sorted(family.sets[idx], family.horizon);
            const Window dw{std::max<uint64_t>({1, window.lo, family.sets[idx][0]}),
                            std::min(window.hi, family.horizon)};
            if (dw.lo < dw.hi) density = emp_lower_density(nat, e, dw);
        }
        rep.labels.push_back({lab.p, lab.i, probes, density});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Layered hit sets over a period lattice
// ---------------------------------------------------------------------------

IndexSet build_layered_hit_sets(const std::vector<uint64_t>& n_seq, const std::vector<uint64_t>& d_seq,
                            uint64_t period, double alpha, size_t block_index, size_t depth) {
    if (period < 1) throw std::invalid_argument("build_layered_hit_sets: period must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("build_layered_hit_sets: alpha in (0,1)");
    if (block_index >= n_seq.size())
        throw std::invalid_argument("build_layered_hit_sets: block_index out of range");
    if (block_index + depth + 1 >= d_seq.size())
        throw std::invalid_argument("build_layered_hit_sets: d_seq must cover block_index+depth+1");
    for (size_t j = block_index + 1; j <= block_index + depth + 1; ++j) {
        if (d_seq[j] <= d_seq[j - 1])
            throw std::invalid_argument("build_layered_hit_sets: d_seq must be increasing");
        if (!(alpha * (double)d_seq[j] > 4.0 * (double)d_seq[j - 1]))
            throw std::invalid_argument("build_layered_hit_sets: growth condition alpha d_j > 4 d_{j-1} fails");
    }

    const uint64_t n0 = n_seq[block_index];
    const uint64_t d0 = d_seq[block_index];
    std::vector<uint64_t> layer;
    {
        const uint64_t kp_max = (uint64_t)std::floor(alpha * (double)d0 / (double)period);
        const double k_top = std::floor(alpha * (double)d_seq[block_index + 1] / (double)d0) - 2.0;
        if (k_top < 0) throw std::invalid_argument("build_layered_hit_sets: empty base layer");
        for (uint64_t k = 0; k <= (uint64_t)k_top; ++k)
            for (uint64_t kp = 0; kp <= kp_max; ++kp) layer.push_back(n0 + k * d0 + kp * period);
        std::sort(layer.begin(), layer.end());
        layer.erase(std::unique(layer.begin(), layer.end()), layer.end());
    }
    std::vector<uint64_t> all = layer;
    for (size_t j = 1; j <= depth; ++j) {
        const uint64_t d = d_seq[block_index + j];
        const uint64_t k_top =
            (uint64_t)(std::floor(alpha * (double)d_seq[block_index + j + 1] / (double)d) - 1.0);
        std::vector<uint64_t> next;
        for (uint64_t k = 1; k <= k_top; ++k)
            for (uint64_t v : layer) next.push_back(v + k * d);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        if (!next.empty() &&
            (double)next.back() > alpha * (double)d_seq[block_index + j + 1] + 1e-9)
            throw std::logic_error("build_layered_hit_sets: layer bound exceeded");
        all.insert(all.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    const uint64_t horizon = all.empty() ? 0 : all.back();
    return IndexSet::from_sorted(std::move(all), horizon);
}

}  // namespace freqdyn
