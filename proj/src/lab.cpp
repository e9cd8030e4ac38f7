#include "freqdyn/lab.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "freqdyn/operators.hpp"
#include "freqdyn/svg.hpp"
#include "freqdyn/util.hpp"

namespace freqdyn {

namespace {

LogSparseVec orbit_point(const LogSparseVec& x, const WeightSeq& w, double lambda, uint64_t m) {
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

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << content;
}

}  // namespace

// ---------------------------------------------------------------------------
// Return sets and the ratio diagnostic
// ---------------------------------------------------------------------------

IndexSet return_set(const LogSparseVec& x, const WeightSeq& w, double lambda,
                    const SparseVec& center, double radius, uint64_t horizon) {
    if (!(radius > 0.0)) throw std::invalid_argument("return_set: radius must be positive");
    std::vector<uint64_t> hits;
    const uint64_t m_dead = x.zero() ? 0 : x.max_index() + 1;
    const double center_norm = center.norm();
    for (uint64_t m = 0; m <= horizon; ++m) {
        double d;
        if (m >= m_dead)
            d = center_norm;  // orbit left the support: distance to the center is fixed
        else
            d = orbit_point(x, w, lambda, m).dist(center);
        if (d < radius) hits.push_back(m);
    }
    return IndexSet::from_sorted(std::move(hits), horizon);
}

std::vector<RatioRow> ratio_witness(const LogSparseVec& x, const WeightSeq& w, double lambda0,
                                    const std::vector<double>& lambda_seq, double radius,
                                    uint64_t horizon) {
    for (size_t i = 1; i < lambda_seq.size(); ++i)
        if (!(lambda_seq[i] < lambda_seq[i - 1]))
            throw std::invalid_argument("ratio_witness: lambda_seq must be strictly decreasing");
    if (!lambda_seq.empty() && !(lambda_seq.front() < lambda0))
        throw std::invalid_argument("ratio_witness: lambda_seq must stay below lambda0");

    // N_0 = {n : ||lambda_0^n B^n x|| < 1}
    std::vector<uint64_t> n0;
    const SparseVec zero(x.p());
    const SparseVec e0 = SparseVec::basis(0, x.p());
    for (uint64_t n = 0; n <= horizon; ++n) {
        const double v = n > x.max_index() ? 0.0 : orbit_point(x, w, lambda0, n).dist(zero);
        if (v < 1.0) n0.push_back(n);
    }
    std::vector<RatioRow> rows;
    int64_t prev_m = -1;
    for (size_t k = 0; k < lambda_seq.size(); ++k) {
        int64_t m_k = -1;
        for (uint64_t m = (uint64_t)(prev_m + 1); m <= horizon; ++m) {
            const double v = m > x.max_index() ? e0.norm() : orbit_point(x, w, lambda_seq[k], m).dist(e0);
            if (v < radius) {
                m_k = (int64_t)m;
                break;
            }
        }
        int64_t n_k = -1;
        if (m_k >= 0) {
            auto it = std::lower_bound(n0.begin(), n0.end(), (uint64_t)m_k);
            if (it != n0.begin()) n_k = (int64_t)*std::prev(it);
            prev_m = m_k;
        }
        rows.push_back({(uint64_t)k + 1, n_k, m_k,
                        (m_k > 0 && n_k >= 0) ? (double)n_k / (double)m_k : -1.0});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Density-gap demonstration
// ---------------------------------------------------------------------------

DensityGap density_gap_demo(const DensitySeq& alpha, double lambda, double mu, double normT,
                            const IndexSet& pk, Window window) {
    if (!(mu > lambda && lambda > 0.0))
        throw std::invalid_argument("density_gap_demo: need 0 < lambda < mu");
    if (!(lambda * normT > 1.0))
        throw std::invalid_argument("density_gap_demo: lambda*||T|| = " + fmt12(lambda * normT) +
                                    " <= 1, the orbit cannot stay small forward");
    DensityGap out;
    out.C = std::log(mu / lambda) / std::log(lambda * normT);
    out.C_prime = std::log(mu / lambda) / std::log(mu * normT);

    std::vector<std::pair<uint64_t, uint64_t>> up, down;
    for (uint64_t p : pk.materialize()) {
        if (p == 0) continue;
        up.push_back({p, (uint64_t)std::floor((1.0 + out.C) * (double)p)});
        const uint64_t lo = (uint64_t)std::floor(out.C_prime * (double)p) + 1;
        if (lo <= p) down.push_back({lo, p});
    }
    const IndexSet u_set = IndexSet::from_intervals(std::move(up), window.hi);
    const IndexSet d_set = IndexSet::from_intervals(std::move(down), window.hi);
    out.upper_est = emp_upper_density(alpha, u_set, window);
    out.lower_est = emp_lower_density(alpha, d_set.complement(), window);
    return out;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (horizon < window.hi)
        throw std::invalid_argument("config: horizon must be >= window end");
    if (window.lo >= window.hi) throw std::invalid_argument("config: window lo < hi required");
    if (!(ell_p >= 1.0)) throw std::invalid_argument("config: p must be >= 1");
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    ExperimentConfig cfg;
    std::string line;
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
        if (key == "scenario") cfg.scenario = val;
        else if (key == "weight") cfg.weight = val;
        else if (key == "alpha") cfg.alpha = val;
        else if (key == "horizon") cfg.horizon = std::stoull(val);
        else if (key == "out") cfg.out_dir = val;
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "p") cfg.ell_p = std::stod(val);
        else if (key == "lambda_unbounded") cfg.lambda_unbounded = val == "1" || val == "true";
        else if (key == "window") {
            const auto comma = val.find(',');
            if (comma == std::string::npos) throw std::invalid_argument("config: window needs n0,H");
            cfg.window = {std::stoull(val.substr(0, comma)), std::stoull(val.substr(comma + 1))};
        } else if (key == "lambdas") {
            cfg.lambdas.clear();
            std::stringstream ss(val);
            std::string part;
            while (std::getline(ss, part, ',')) cfg.lambdas.push_back(std::stod(part));
        } else {
            throw std::invalid_argument("config: unknown key " + key);
        }
    }
    return cfg;
}

std::vector<SparseVec> default_targets(double ell_p) {
    std::vector<SparseVec> t;
    t.push_back(SparseVec::basis(0, ell_p));  // e0
    SparseVec a(ell_p);
    a.set(0, 1.0);
    a.set(1, 1.0);
    t.push_back(a);  // e0 + e1
    t.push_back(SparseVec::basis(1, ell_p, 2.0));  // 2 e1
    SparseVec b(ell_p);
    b.set(0, -1.0);
    b.set(2, 1.0);
    t.push_back(b);  // e2 - e0
    SparseVec c(ell_p);
    c.set(0, 0.5);
    c.set(1, 0.5);
    c.set(2, 0.5);
    t.push_back(c);  // (e0+e1+e2)/2
    return t;
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

namespace {

int scenario_quantities(const ExperimentConfig& cfg) {
    const WeightSeq w = WeightSeq::parse(cfg.weight);
    const ShiftQuantities q = shift_quantities(w, (double)cfg.horizon, cfg.ell_p, cfg.seed);
    std::ostringstream csv;
    csv << "norm_inv,r_w,lambda_w,r_pw,width,horizon\n" << q.csv_row() << "\n";
    write_file(cfg.out_dir + "/quantities.csv", csv.str());
    std::ostringstream means;
    means << "n,mean\n";
    SvgSeries s{"log_product(1,n)/n", {}};
    for (auto [n, mu] : q.prefix_means) {
        means << fmt12(n) << "," << fmt12(mu) << "\n";
        s.points.push_back({n, mu});
    }
    write_file(cfg.out_dir + "/means.csv", means.str());
    write_svg_plot(cfg.out_dir + "/quantities.svg", "prefix product means: " + cfg.weight, {s}, true);
    const double tol = 1e-12;
    const bool chain = q.norm_inv <= 1.0 / q.r_w + q.width_rw + tol &&
                       1.0 / q.r_w <= 1.0 / q.lambda_w + q.width_rw + q.width_lambda + tol &&
                       1.0 / q.lambda_w <= 1.0 / q.r_pw + q.width_lambda + q.width_rpw + tol;
    if (!chain) {
        std::cerr << "quantities: chain ordering violated: " << q.csv_row() << "\n";
        return 2;
    }
    std::cout << "quantities: " << q.csv_row() << "\n";
    return 0;
}

int scenario_construct_verify(const ExperimentConfig& cfg) {
    MultiplesFamily mult{WeightSeq::parse(cfg.weight), cfg.lambdas, cfg.ell_p};
    if (mult.lambdas.empty()) mult.lambdas = {2.0, 4.0};
    const std::vector<SparseVec> targets = default_targets(cfg.ell_p);
    const EpsilonBudget budget;

    const ShiftQuantities q = shift_quantities(mult.w, 1e5, cfg.ell_p, cfg.seed);
    const SeparationExponent se =
        choose_separation_exponent(mult.lambdas, 1.0 / q.r_pw + q.width_rpw);
    const TailTable table = tail_threshold_table(mult, targets, budget, se.c, 10000);

    std::vector<Label> labels;
    for (int p = 0; p < (int)targets.size(); ++p)
        for (int i = 0; i < (int)mult.lambdas.size(); ++i) labels.push_back({p, i});
    const SeparatedFamily fam = build_index_sets(table.N, se.c, labels, cfg.horizon);
    write_file(cfg.out_dir + "/family.csv", fam.csv());
    for (size_t idx = 0; idx < fam.labels.size(); ++idx) {
        std::ostringstream name;
        name << cfg.out_dir << "/set_" << fam.labels[idx].p << "_" << fam.labels[idx].i << ".txt";
        std::ostringstream body;
        for (uint64_t n : fam.sets[idx]) body << n << "\n";
        write_file(name.str(), body.str());
    }

    const AssembledVector av = assemble_common_vector(fam, mult, targets, cfg.horizon, budget);
    const HitReport rep =
        verify_frequent_hits(av.x, fam, mult, targets, budget, {0, cfg.horizon});
    write_file(cfg.out_dir + "/hits.csv", rep.csv());
    SvgSeries s{"probe norm", {}};
    for (const auto& r : rep.rows) s.points.push_back({(double)r.m, r.norm});
    std::sort(s.points.begin(), s.points.end());
    write_svg_plot(cfg.out_dir + "/hits.svg", "hit norms vs m", {s}, true);

    uint64_t probes = 0;
    for (const auto& l : rep.labels) probes += l.probes;
    std::cout << "construct_verify: ||x|| = " << fmt12(av.x.norm())
              << ", tail bound = " << fmt12(av.discarded_tail_bound) << ", probes = " << probes
              << ", all_pass = " << (rep.all_pass ? "yes" : "no") << "\n";
    for (const auto& l : rep.labels)
        std::cout << "  label (q=" << l.q << ", j=" << l.j << "): probes = " << l.probes
                  << ", window density = " << fmt12(l.density) << "\n";
    if (!rep.all_pass) {
        for (const auto& r : rep.rows)
            if (!r.pass)
                std::cerr << "  MISS q=" << r.q << " j=" << r.j << " m=" << r.m
                          << " norm=" << fmt12(r.norm) << " r_q=" << fmt12(r.r_q) << "\n";
        return 2;
    }
    return 0;
}

int scenario_no_common(const ExperimentConfig& cfg) {
    const WeightSeq w = WeightSeq::parse(cfg.weight);
    LambdaSet lambda;
    lambda.values = cfg.lambdas.empty() ? std::vector<double>{1.0, 1.7} : cfg.lambdas;
    lambda.unbounded = cfg.lambda_unbounded;
    const ShiftQuantities q = shift_quantities(w, (double)cfg.horizon, cfg.ell_p, cfg.seed);
    const CommonFhcVerdict v = common_fhc_verdict(w, cfg.ell_p, lambda, q);
    const char* name = v.status == CommonFhcStatus::Empty
                           ? "empty"
                           : (v.status == CommonFhcStatus::NonEmpty ? "nonempty" : "unknown");
    std::cout << "verdict: " << name << " (" << v.reason << ")\n";
    write_file(cfg.out_dir + "/verdict.txt",
               std::string(name) + "\n" + v.reason + "\ngap: (" + fmt12(v.gap_lo) + ", " +
                   fmt12(v.gap_hi) + "]\n");

    // ratio diagnostic against the probe vector x = e_0
    const LogSparseVec x = LogSparseVec::from(SparseVec::basis(0, cfg.ell_p));
    const double lam0 = lambda.sup() + 0.5;
    std::vector<double> seq;
    for (double l : lambda.values) seq.push_back(l);
    std::sort(seq.rbegin(), seq.rend());
    seq.erase(std::unique(seq.begin(), seq.end()), seq.end());
    const auto rows =
        ratio_witness(x, w, lam0, seq, 1.5, std::min<uint64_t>(cfg.horizon, 10000));
    std::ostringstream csv;
    csv << "k,n_k,m_k,ratio\n";
    SvgSeries s{"n_k/m_k", {}};
    for (const auto& r : rows) {
        csv << r.k << "," << r.n_k << "," << r.m_k << "," << fmt12(r.ratio) << "\n";
        if (r.ratio >= 0.0) s.points.push_back({(double)r.k, r.ratio});
    }
    write_file(cfg.out_dir + "/ratio.csv", csv.str());
    write_svg_plot(cfg.out_dir + "/ratio.svg", "return-time ratios", {s});
    return 0;
}

int scenario_density_gap(const ExperimentConfig& cfg) {
    const DensitySeq alpha = DensitySeq::parse(cfg.alpha);
    // geometric p_k = 2^j, the canonical hypercyclicity return times
    std::vector<uint64_t> pk;
    for (uint64_t p = 1; p <= cfg.window.hi; p *= 2) pk.push_back(p);
    const IndexSet pk_set = IndexSet::from_sorted(std::move(pk), cfg.window.hi);
    const double lambda = 1.0, mu = 2.0, normT = 2.0;
    const DensityGap gap = density_gap_demo(alpha, lambda, mu, normT, pk_set, cfg.window);
    const Delta2Verdict d2 = delta2_verdict(alpha, cfg.window.hi);

    std::ostringstream csv;
    csv << "n,partial_ratio\n";
    // ratio curve of the union set under alpha, sampled geometrically
    std::vector<std::pair<uint64_t, uint64_t>> iv;
    for (uint64_t p : pk_set.materialize())
        if (p > 0) iv.push_back({p, (uint64_t)std::floor((1.0 + gap.C) * (double)p)});
    const IndexSet u_set = IndexSet::from_intervals(std::move(iv), cfg.window.hi);
    SvgSeries s{"partial ratio", {}};
    for (uint64_t n = std::max(cfg.window.lo, alpha.k_min() + 1); n + 1 <= cfg.window.hi;
         n = std::max(n + 1, n + n / 8)) {
        const double r = 1.0 - emp_lower_density(alpha, u_set.complement(), {n, n + 1});
        csv << n << "," << fmt12(r) << "\n";
        s.points.push_back({(double)n, r});
    }
    write_file(cfg.out_dir + "/density.csv", csv.str());
    write_svg_plot(cfg.out_dir + "/density.svg", "alpha-ratio of the covered set: " + cfg.alpha,
                   {s}, true);

    std::cout << "density_gap: alpha = " << cfg.alpha << ", C = " << fmt12(gap.C)
              << ", upper_est = " << fmt12(gap.upper_est)
              << ", lower_est(complement) = " << fmt12(gap.lower_est)
              << ", delta2 = " << (d2.holds ? "holds" : "fails") << " (K = " << fmt12(d2.K)
              << ")\n";
    if (!d2.holds && gap.upper_est < 0.95) {
        std::cerr << "density_gap: expected upper_est >= 0.95 for a Delta2-failing alpha\n";
        return 2;
    }
    return 0;
}

int scenario_ctype_demo(const ExperimentConfig& cfg) {
    const CTypeParams ref = CTypeParams::reference_cplus_one(8);
    std::ostringstream csv;
    csv << "k,delta,tau,sigma_delta,ratio\n";
    SvgSeries s{"(sigma-tau)/delta", {}};
    for (int k = 1; k <= ref.levels(); ++k) {
        const double ratio =
            (double)(ref.sigma_level(k) - ref.tau_level(k)) / (double)ref.delta_level(k);
        csv << k << "," << ref.delta_level(k) << "," << ref.tau_level(k) << ","
            << ref.sigma_level(k) << "," << fmt12(ratio) << "\n";
        s.points.push_back({(double)k, ratio});
    }
    write_file(cfg.out_dir + "/ctype.csv", csv.str());
    write_svg_plot(cfg.out_dir + "/ctype.svg", "reference C_{+,1} ratio per level", {s});
    write_file(cfg.out_dir + "/ctype_config.txt", ref.config_string());

    const CPlusCommonReport rep = cplus_common_verdict({ref}, 0.125, 8);
    std::cout << "ctype_demo: verdict = " << (rep.hold ? "hold" : "fail") << ", ratio = "
              << rep.ratio_num << "/" << rep.ratio_den << "\n";

    // periodicity spot checks over the first 8 blocks
    for (uint64_t n = 0; n < 8; ++n) {
        const SparseVec e = SparseVec::basis(ref.b(n), cfg.ell_p);
        const uint64_t period = ctype_period(ref, e);
        const double err = ctype_apply(ref, e, period).dist(e);
        std::cout << "  block " << n << ": period " << period << ", |T^period e - e| = "
                  << fmt12(err) << "\n";
        if (!(err < 1e-9)) return 2;
    }
    return rep.hold ? 0 : 2;
}

int scenario_densities_report(const ExperimentConfig& cfg) {
    const DensitySeq alpha = DensitySeq::parse(cfg.alpha);
    std::ostringstream csv;
    csv << "n,log_phi\n";
    SvgSeries s{"log phi_alpha", {}};
    LogSumAcc acc;
    uint64_t next_mark = std::max<uint64_t>(alpha.k_min(), 1);
    for (uint64_t k = alpha.k_min(); k <= cfg.horizon; ++k) {
        acc.add(alpha.log_alpha(k));
        if (k == next_mark) {
            csv << k << "," << fmt12(acc.log_value()) << "\n";
            s.points.push_back({(double)k, acc.log_value()});
            next_mark = std::max(next_mark + 1, next_mark + next_mark / 4);
        }
    }
    write_file(cfg.out_dir + "/phi.csv", csv.str());
    write_svg_plot(cfg.out_dir + "/phi.svg", "log phi for " + cfg.alpha, {s}, true);
    const Delta2Verdict d2 = delta2_verdict(alpha, cfg.horizon);
    const auto adm = alpha.check_admissible(std::min<uint64_t>(cfg.horizon, 1000000));
    std::ostringstream rep;
    rep << "alpha = " << cfg.alpha << "\n"
        << "delta2 = " << (d2.holds ? "holds" : "fails") << "\nK = " << fmt12(d2.K) << "\n"
        << "admissible = " << (adm.ok() ? "yes" : "no") << "\n";
    write_file(cfg.out_dir + "/report.txt", rep.str());
    std::cout << rep.str();
    return 0;
}

}  // namespace

int run_scenario(const ExperimentConfig& config) {
    try {
        config.validate();
        std::filesystem::create_directories(config.out_dir);
        if (config.scenario == "quantities") return scenario_quantities(config);
        if (config.scenario == "construct_verify") return scenario_construct_verify(config);
        if (config.scenario == "no_common") return scenario_no_common(config);
        if (config.scenario == "density_gap") return scenario_density_gap(config);
        if (config.scenario == "ctype_demo") return scenario_ctype_demo(config);
        if (config.scenario == "densities_report") return scenario_densities_report(config);
        std::cerr << "unknown scenario: " << config.scenario << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "scenario failed: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace freqdyn
