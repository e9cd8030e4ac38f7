#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "freqdyn/construction.hpp"
#include "freqdyn/lab.hpp"

using namespace freqdyn;

namespace {

// exhaustive check of the three separation properties over every element pair;
// violations are counted so the pair loops stay cheap
void check_separations(const SeparatedFamily& fam) {
    uint64_t violations = 0;
    for (size_t a = 0; a < fam.labels.size(); ++a) {
        const auto& A = fam.sets[a];
        for (size_t i = 0; i + 1 < A.size(); ++i)
            if (A[i + 1] - A[i] < fam.N[a]) ++violations;
        if (!A.empty() && A.front() < fam.N[a]) ++violations;
        for (size_t b = a + 1; b < fam.labels.size(); ++b) {
            for (uint64_t n : A) {
                for (uint64_t m : fam.sets[b]) {
                    if (n == m) {
                        ++violations;
                        continue;
                    }
                    const uint64_t lo = std::min(n, m), hi = std::max(n, m);
                    if (hi - lo < std::max(fam.N[a], fam.N[b])) ++violations;
                    if ((double)hi < fam.K * (double)lo) ++violations;
                }
            }
        }
    }
    CHECK(violations == 0);
}

}  // namespace

TEST_CASE("epsilon budget closed forms") {
    const EpsilonBudget b;
    // sum eps_p = 1/2, and the J_p tails nest below eps_p
    double s = 0.0;
    for (int p = 0; p < 60; ++p) s += b.eps(p);
    CHECK(s == doctest::Approx(0.5).epsilon(1e-12));
    for (int p = 0; p < 30; ++p) {
        double tail = 0.0;
        for (int i = b.J(p); i < b.J(p) + 80; ++i) tail += b.eps(i);
        CHECK(tail < b.eps(p));
        CHECK(tail == doctest::Approx(std::ldexp(1.0, -(p + 3))).epsilon(1e-9));
    }
    // p eps_p -> 0
    for (int p = 20; p < 40; ++p) CHECK(p * b.eps(p) < 1e-3);
    // hit radii decrease to 0
    double prev = 1e300;
    for (int q = 0; q <= 30; ++q) {
        const double r = b.r(q);
        CHECK(r < prev);
        prev = r;
    }
    CHECK(b.r(30) < 1e-6);
}

TEST_CASE("tail thresholds: geometric closed form for the single-multiple case") {
    MultiplesFamily mult{WeightSeq::constant(1.0), {2.0}, 2.0};
    const std::vector<SparseVec> targets = {SparseVec::basis(0)};
    const TailTable t = tail_threshold_table(mult, targets, EpsilonBudget{}, 1.5, 1000);
    // series tail sum_{n>=N} 2^{-n} = 2^{1-N} < eps_p = 2^{-(p+2)}  <=>  N = p+4;
    // with one target the table has a single p row
    CHECK(t.N_cond_ii[0][0] == 4);
    // the S-sum bound eps_p eps_i tightens the combined threshold to p+6
    CHECK(t.N_cond_vii[0][0] == 6);
    CHECK(t.N[0][0] == 6);
}

TEST_CASE("tail thresholds: degenerate budget reduces to a constant table") {
    // a single operator and a single target never mix labels, so all rows of
    // the per-condition tables coincide once p is pinned
    MultiplesFamily mult{WeightSeq::constant(1.0), {2.0}, 2.0};
    std::vector<SparseVec> targets;
    targets.push_back(SparseVec::basis(0));
    targets.push_back(SparseVec::basis(0));
    const TailTable t = tail_threshold_table(mult, targets, EpsilonBudget{}, 1.5, 1000);
    CHECK(t.N[0][0] + 1 <= t.N[1][0] + 2);  // non-decreasing in p
    CHECK(t.N_cond_ii[0][0] == 4);
    CHECK(t.N_cond_ii[1][0] == 5);
}

TEST_CASE("tail thresholds: cross-term scan for two multiples") {
    MultiplesFamily mult{WeightSeq::constant(1.0), {2.0, 4.0}, 2.0};
    const auto targets = default_targets(2.0);
    const SeparationExponent se = choose_separation_exponent(mult.lambdas, 1.0);
    CHECK(se.c > 2.0);  // forced by sup/inf = 2 with any pivot below inf
    const TailTable t = tail_threshold_table(mult, targets, EpsilonBudget{}, se.c, 10000);
    for (size_t p = 0; p < targets.size(); ++p) {
        for (size_t i = 0; i < 2; ++i) {
            CHECK(t.N[p][i] >= t.N_cond_cross[p][i]);
            if (p > 0) CHECK(t.N[p][i] >= t.N[p - 1][i]);
        }
    }
    // diverging-tail error carries the condition name
    CHECK_THROWS_WITH_AS(tail_threshold_table(mult, targets, EpsilonBudget{}, se.c, 8),
                         doctest::Contains("did not close"), std::runtime_error);
    // inadmissible multiplier
    MultiplesFamily bad{WeightSeq::constant(1.0), {0.9, 2.0}, 2.0};
    CHECK_THROWS_AS(tail_threshold_table(bad, targets, EpsilonBudget{}, se.c, 1000),
                    std::invalid_argument);
}

TEST_CASE("separated family: single label") {
    const std::vector<std::vector<uint64_t>> N{{5}};
    const SeparatedFamily fam = build_index_sets(N, 2.0, {{0, 0}}, 1000000);
    CHECK(fam.a == doctest::Approx(3.3).epsilon(1e-12));
    CHECK(fam.M == 1);
    REQUIRE(fam.sets.size() == 1);
    CHECK_FALSE(fam.sets[0].empty());
    check_separations(fam);
    // every element is a multiple of 5 inside an admissible interval
    for (uint64_t n : fam.sets[0]) {
        CHECK(n % 5 == 0);
        bool inside = false;
        for (uint64_t u = fam.u_min[0]; u < 40; ++u) {
            const double au = std::pow(fam.a, (double)u);
            if ((double)n >= std::ceil(0.9 * au) && (double)n <= std::floor(1.1 * au)) inside = true;
        }
        CHECK(inside);
    }
}

TEST_CASE("separated family: two labels with ratio separation") {
    const std::vector<std::vector<uint64_t>> N{{5, 5}};
    const SeparatedFamily fam = build_index_sets(N, 2.0, {{0, 0}, {0, 1}}, 1000000);
    check_separations(fam);
    CHECK_FALSE(fam.sets[0].empty());
    CHECK_FALSE(fam.sets[1].empty());
}

TEST_CASE("separated family: K barely above 1 keeps intervals disjoint") {
    const std::vector<std::vector<uint64_t>> N{{5, 5}};
    const SeparatedFamily fam =
        build_index_sets(N, 1.0 + 1e-9, {{0, 0}, {0, 1}}, 1000000);
    CHECK(fam.a == doctest::Approx(1.65).epsilon(1e-6));
    check_separations(fam);
}

TEST_CASE("separated family: lower-density floor where a third block exists") {
    // two labels, horizon 1e7 so each residue class materializes >= 3 blocks
    const std::vector<std::vector<uint64_t>> N{{5, 10}};
    const SeparatedFamily fam = build_index_sets(N, 2.0, {{0, 0}, {0, 1}}, 10000000);
    const DensitySeq nat = DensitySeq::constant(1.0);
    for (size_t idx = 0; idx < 2; ++idx) {
        // third admissible block of this label's residue class
        uint64_t u = fam.u_min[idx];
        while (u % (uint64_t)fam.M != (uint64_t)fam.residue[idx]) ++u;
        const uint64_t u_star = u + 2 * (uint64_t)fam.M;
        const double a_star = std::pow(fam.a, (double)u_star);
        REQUIRE(a_star < 1e7);  // the third block is materialized
        const double floor_bound =
            0.5 * fam.eps / ((double)fam.N[idx] * std::pow(fam.a, (double)fam.M) + 1.0);
        const double dens =
            emp_lower_density(nat, IndexSet::from_sorted(fam.sets[idx], fam.horizon),
                              {(uint64_t)a_star, fam.horizon});
        CHECK(dens >= floor_bound);
    }
}

TEST_CASE("separated family: argument validation") {
    const std::vector<std::vector<uint64_t>> N{{5}};
    CHECK_THROWS_AS(build_index_sets(N, 1.0, {{0, 0}}, 1000), std::invalid_argument);
    CHECK_THROWS_AS(build_index_sets(N, 2.0, {}, 1000), std::invalid_argument);
    // horizon too small for any element: a warning flag, not an error
    const SeparatedFamily tiny = build_index_sets(N, 2.0, {{0, 0}}, 10);
    CHECK(tiny.empty_warning[0]);
}

TEST_CASE("assembled vector: degenerate cases") {
    const EpsilonBudget budget;
    MultiplesFamily mult{WeightSeq::constant(1.0), {2.0}, 2.0};
    const std::vector<SparseVec> targets = {SparseVec::basis(0)};

    SUBCASE("empty family gives the zero vector") {
        SeparatedFamily fam = build_index_sets({{5}}, 2.0, {{0, 0}}, 10);
        REQUIRE(fam.sets[0].empty());
        const AssembledVector av = assemble_common_vector(fam, mult, targets, 1000, budget);
        CHECK(av.x.zero());
        CHECK(av.discarded_tail_bound == 0.0);
    }
    SUBCASE("a single term is lambda^{-n} e_n") {
        SeparatedFamily fam = build_index_sets({{5}}, 2.0, {{0, 0}}, 200);
        REQUIRE(fam.sets[0].size() >= 1);
        fam.sets[0].resize(1);
        const uint64_t n1 = fam.sets[0][0];
        const AssembledVector av = assemble_common_vector(fam, mult, targets, 1000, budget);
        REQUIRE(av.x.size() == 1);
        CHECK(av.x.entries()[0].first == n1);
        CHECK(av.x.entries()[0].second.sign == 1);
        CHECK(av.x.entries()[0].second.logmag ==
              doctest::Approx(-(double)n1 * std::log(2.0)).epsilon(1e-12));

        // the hit at m = n1 recovers e_0 exactly
        const HitReport rep =
            verify_frequent_hits(av.x, fam, mult, targets, budget, {0, 1000});
        REQUIRE(rep.rows.size() == 1);
        CHECK(rep.rows[0].m == n1);
        CHECK(rep.rows[0].norm == 0.0);
        CHECK(rep.all_pass);
    }
}

TEST_CASE("flagship assembly and hit verification") {
    const EpsilonBudget budget;
    MultiplesFamily mult{WeightSeq::constant(1.0), {2.0, 4.0}, 2.0};
    const auto targets = default_targets(2.0);
    const ShiftQuantities q = shift_quantities(mult.w, 1e5, 2.0);
    const SeparationExponent se =
        choose_separation_exponent(mult.lambdas, 1.0 / q.r_pw + q.width_rpw);
    const TailTable table = tail_threshold_table(mult, targets, budget, se.c, 10000);
    std::vector<Label> labels;
    for (int p = 0; p < 5; ++p)
        for (int i = 0; i < 2; ++i) labels.push_back({p, i});
    const SeparatedFamily fam = build_index_sets(table.N, se.c, labels, 100000);
    check_separations(fam);

    const AssembledVector av = assemble_common_vector(fam, mult, targets, 100000, budget);
    CHECK(av.x.norm() < 1.0);
    CHECK(av.discarded_tail_bound <= 0.0394);  // min_q r_q / 10 at q = 4

    const HitReport rep = verify_frequent_hits(av.x, fam, mult, targets, budget, {0, 100000});
    CHECK(rep.all_pass);
    uint64_t probes = 0;
    for (const auto& l : rep.labels) probes += l.probes;
    CHECK(probes >= 250);
    // the passing probes per label are exactly E cap window
    for (size_t idx = 0; idx < fam.labels.size(); ++idx) {
        uint64_t in_window = 0;
        for (uint64_t m : fam.sets[idx])
            if (m <= 100000) ++in_window;
        CHECK(rep.labels[idx].probes == in_window);
        if (in_window > 0) CHECK(rep.labels[idx].density > 0.0);
    }

}

TEST_CASE("corrupting one coefficient produces a failing row") {
    // needs a probed label whose radius sits below its target norm; label
    // (2, 0) qualifies (r_2 ~ 1.08 < ||2 e_1|| = 2) and first populates
    // around 2e5, so the horizon goes to 1e6
    const EpsilonBudget budget;
    MultiplesFamily mult{WeightSeq::constant(1.0), {2.0, 4.0}, 2.0};
    const auto targets = default_targets(2.0);
    const SeparationExponent se = choose_separation_exponent(mult.lambdas, 1.0);
    const TailTable table = tail_threshold_table(mult, targets, budget, se.c, 10000);
    std::vector<Label> labels;
    for (int p = 0; p < 5; ++p)
        for (int i = 0; i < 2; ++i) labels.push_back({p, i});
    const SeparatedFamily fam = build_index_sets(table.N, se.c, labels, 1000000);
    const size_t idx20 = fam.label_index(2, 0);
    REQUIRE_FALSE(fam.sets[idx20].empty());
    const AssembledVector av = assemble_common_vector(fam, mult, targets, 1000000, budget);

    const HitReport good = verify_frequent_hits(av.x, fam, mult, targets, budget, {0, 1000000});
    REQUIRE(good.all_pass);

    LogSparseVec bad = av.x;
    // the term of label (2,0) at its first return: y_2 = 2 e_1 sits at n + 1
    bad.set(fam.sets[idx20][0] + 1, LogCoef{});
    const HitReport bad_rep = verify_frequent_hits(bad, fam, mult, targets, budget, {0, 1000000});
    CHECK_FALSE(bad_rep.all_pass);
    uint64_t failing = 0;
    for (const auto& r : bad_rep.rows)
        if (!r.pass) ++failing;
    CHECK(failing >= 1);
}

TEST_CASE("layered hit sets") {
    SUBCASE("base layer enumerates the displayed lattice") {
        const IndexSet A = build_layered_hit_sets({10}, {8, 400}, 2, 0.5, 0, 0);
        // {10 + 8k + 2k' : 0<=k'<=2, 0<=k<=23}, max 198
        std::vector<uint64_t> expect;
        for (uint64_t k = 0; k <= 23; ++k)
            for (uint64_t kp = 0; kp <= 2; ++kp) expect.push_back(10 + 8 * k + 2 * kp);
        std::sort(expect.begin(), expect.end());
        expect.erase(std::unique(expect.begin(), expect.end()), expect.end());
        CHECK(A.materialize() == expect);
        CHECK(A.materialize().back() == 198);
    }
    SUBCASE("period equal to the base step degenerates k'") {
        const IndexSet A = build_layered_hit_sets({10}, {8, 400}, 8, 0.5, 0, 0);
        for (uint64_t v : A.materialize()) CHECK((v - 10) % 8 == 0);
    }
    SUBCASE("geometric d with positive window density") {
        std::vector<uint64_t> d;
        for (int j = 0; j < 6; ++j) d.push_back(10 * (uint64_t)std::pow(9.0, j));
        const IndexSet A = build_layered_hit_sets({10}, d, 2, 0.5, 0, 3);
        const double dens = emp_lower_density(DensitySeq::constant(1.0), A,
                                              {100, A.horizon()});
        CHECK(dens > 0.0);
        // every layer respects max(A_{m,j}) <= alpha d_{j+1}
        CHECK((double)A.materialize().back() <= 0.5 * (double)d[4]);
    }
    SUBCASE("growth precondition is enforced") {
        CHECK_THROWS_AS(build_layered_hit_sets({10}, {8, 30}, 2, 0.5, 0, 0), std::invalid_argument);
    }
}
