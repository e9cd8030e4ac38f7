#include <doctest.h>

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <random>

#include "freqdyn/shift_analysis.hpp"
#include "freqdyn/weights.hpp"

using namespace freqdyn;

namespace {

// brute-force oracle for closed-form products
double loop_log_product(const WeightSeq& w, uint64_t i, uint64_t j) {
    double s = 0.0;
    for (uint64_t n = i; n <= j; ++n) s += std::log(w.value(n));
    return s;
}

WeightSeq random_tabulated(std::mt19937_64& rng, size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = 0.25 + 3.75 * (double)(rng() % 10000) / 10000.0;
    return WeightSeq::tabulated(std::move(v));
}

}  // namespace

TEST_CASE("log_product closed forms match the loop oracle") {
    CHECK(WeightSeq::constant(2.0).log_product(1, 10) ==
          doctest::Approx(10.0 * std::log(2.0)).epsilon(1e-14));

    const WeightSeq r2 = WeightSeq::rational2();
    for (uint64_t n : {10ull, 100ull, 10000ull}) {
        CHECK(std::fabs(r2.log_product(1, (double)n) - 2.0 * std::log((double)n + 1.0)) < 1e-9);
        CHECK(std::fabs(r2.log_product(1, (double)n) - loop_log_product(r2, 1, n)) < 1e-9);
    }

    const WeightSeq fb = WeightSeq::four_block(1, 2, 3, 4);
    CHECK(std::fabs(fb.log_product(1, 512) - loop_log_product(fb, 1, 512)) < 1e-9);
    CHECK(std::fabs(fb.log_product(17, 300) - loop_log_product(fb, 17, 300)) < 1e-9);

    const WeightSeq cs = WeightSeq::costakis_sambarino(0.7);
    CHECK(std::fabs(cs.log_product(1, 5000) - loop_log_product(cs, 1, 5000)) < 1e-9);
    CHECK(std::fabs(cs.log_product(33, 4096) - loop_log_product(cs, 33, 4096)) < 1e-9);

    CHECK_THROWS_AS(fb.log_product(10, 5), std::domain_error);
    CHECK_THROWS_AS(fb.log_product(0, 5), std::domain_error);
}

TEST_CASE("four-block closed form crosses block boundaries exactly") {
    // per-index evaluation is the independent oracle; ranges straddle the
    // block-6 boundaries (d at 2^36)
    const WeightSeq fb = WeightSeq::four_block(1, 2, 3, 4);
    const uint64_t p6 = 1ull << 36;
    for (auto [lo, hi] : {std::pair<uint64_t, uint64_t>{p6 - 500, p6 + 500},
                          {p6 + 1, p6 + 7},
                          {6 * (1ull << 25) - 3, 6 * (1ull << 25) + 40}}) {
        CHECK(std::fabs(fb.log_product((double)lo, (double)hi) - loop_log_product(fb, lo, hi)) <
              1e-9);
    }
    // weight values at the block-6 landmarks
    CHECK(fb.value(p6) == 4.0);
    CHECK(fb.value(p6 + 1) == 3.0);
    CHECK(fb.value(p6 + 7) == 3.0);
    CHECK(fb.value(p6 + 8) == 2.0);
    CHECK(fb.value(7 * p6) == 2.0);
    CHECK(fb.value(p6 - 1) == 1.0);
}

TEST_CASE("weight parsing") {
    CHECK(WeightSeq::parse("const:2").value(17) == 2.0);
    CHECK(WeightSeq::parse("rational2").value(1) == 4.0);
    CHECK(WeightSeq::parse("cosam:1.0").value(2) == doctest::Approx(1.5));
    CHECK(WeightSeq::parse("fourblock:1,2,3,4").value(16) == 4.0);
    CHECK_THROWS_AS(WeightSeq::parse("fourblock:1,2"), std::invalid_argument);
    CHECK_THROWS_AS(WeightSeq::parse("bogus"), std::invalid_argument);
    CHECK_THROWS_AS(WeightSeq::constant(0.0), std::invalid_argument);

    {
        std::ofstream out("weights_tmp.csv");
        out << "1,2.5\n2,0.5\n3,1.25\n";
    }
    const WeightSeq t = WeightSeq::parse("table:@weights_tmp.csv");
    CHECK(t.value(2) == 0.5);
    CHECK(t.log_product(1, 3) == doctest::Approx(std::log(2.5 * 0.5 * 1.25)).epsilon(1e-14));
    CHECK_THROWS_AS(t.value(4), std::domain_error);
    CHECK_THROWS_AS(WeightSeq::parse("table:@missing_file.csv"), std::invalid_argument);
}

TEST_CASE("shift quantities: constant weight") {
    const ShiftQuantities q = shift_quantities(WeightSeq::constant(2.0), 1e5, 2.0);
    CHECK(q.norm_inv == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(q.r_w == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(q.lambda_w == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(q.r_pw == doctest::Approx(2.0).epsilon(1e-6));
    // a monotone weight collapses the three limit quantities
    CHECK(std::fabs(q.r_w - q.lambda_w) <= 2.0 * q.width() + 1e-9);
    CHECK(std::fabs(q.lambda_w - q.r_pw) <= 2.0 * q.width() + 1e-9);
}

TEST_CASE("shift quantities: decreasing rational weight collapses to 1") {
    const ShiftQuantities q = shift_quantities(WeightSeq::rational2(), 1e5, 2.0);
    CHECK(std::fabs(q.r_w - 1.0) < 0.02);
    CHECK(std::fabs(q.lambda_w - 1.0) < 0.02);
    CHECK(std::fabs(q.r_pw - 1.0) < 0.02);
    // monotone weights collapse within the reported widths
    CHECK(std::fabs(q.r_w - q.lambda_w) <= 2.0 * q.width());
    CHECK(std::fabs(q.lambda_w - q.r_pw) <= 2.0 * q.width());
}

TEST_CASE("shift quantities: four-block example separates all four") {
    const WeightSeq fb = WeightSeq::four_block(1, 2, 3, 4);
    const ShiftQuantities q = shift_quantities(fb, fb.max_closed_index(), 2.0);
    CHECK(q.norm_inv == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(std::fabs(q.r_w - 3.0) / 3.0 <= 0.05);
    CHECK(std::fabs(q.lambda_w - 2.0) / 2.0 <= 0.05);
    CHECK(std::fabs(q.r_pw - 1.0) / 1.0 <= 0.05);
    // chain ordering of the inverses
    CHECK(q.norm_inv <= 1.0 / q.r_w + q.width_rw + 1e-12);
    CHECK(1.0 / q.r_w <= 1.0 / q.lambda_w + q.width_rw + q.width_lambda + 1e-12);
    CHECK(1.0 / q.lambda_w <= 1.0 / q.r_pw + q.width_lambda + q.width_rpw + 1e-12);
}

TEST_CASE("quantity chain holds for random bounded tabulated weights") {
    std::mt19937_64 rng(777);
    for (int t = 0; t < 100; ++t) {
        const WeightSeq w = random_tabulated(rng, 10000);
        const ShiftQuantities q = shift_quantities(w, 10000, 2.0, rng());
        const double tol = 1e-9;
        CHECK(q.norm_inv <= 1.0 / q.r_w + q.width_rw + tol);
        CHECK(1.0 / q.r_w <= 1.0 / q.lambda_w + q.width_rw + q.width_lambda + tol);
        CHECK(1.0 / q.lambda_w <= 1.0 / q.r_pw + q.width_lambda + q.width_rpw + tol);
    }
}

TEST_CASE("shift quantities guards") {
    CHECK_THROWS_AS(shift_quantities(WeightSeq::constant(2.0), 100, 2.0), std::invalid_argument);
}

TEST_CASE("fhc verdict: series of inverse products") {
    CHECK(fhc_verdict(WeightSeq::constant(2.0), 2.0, 100000).status == FhcStatus::Satisfied);
    CHECK(fhc_verdict(WeightSeq::rational2(), 2.0, 100000).status == FhcStatus::Satisfied);
    // lambda = 1/p: the partial sums keep growing at horizon 1e6
    CHECK(fhc_verdict(WeightSeq::costakis_sambarino(0.5), 2.0, 1000000).status ==
          FhcStatus::NotSatisfied);
    // satisfied iff c > 1, with the boundary on the divergent side
    CHECK(fhc_verdict(WeightSeq::constant(0.5), 2.0, 100000).status == FhcStatus::NotSatisfied);
    CHECK(fhc_verdict(WeightSeq::constant(1.0), 2.0, 100000).status == FhcStatus::NotSatisfied);
    CHECK(fhc_verdict(WeightSeq::constant(2.0), 1.0, 100000).status == FhcStatus::Satisfied);
}

TEST_CASE("common fhc verdict on multiples") {
    const WeightSeq one = WeightSeq::constant(1.0);
    const ShiftQuantities q1 = shift_quantities(one, 1e5, 2.0);

    SUBCASE("unweighted shift, multipliers inside (1, inf)") {
        const CommonFhcVerdict v = common_fhc_verdict(one, 2.0, {{1.5, 2.5}, true, false}, q1);
        CHECK(v.status == CommonFhcStatus::NonEmpty);
    }
    SUBCASE("boundary multiplier 1 empties the intersection") {
        const CommonFhcVerdict v = common_fhc_verdict(one, 2.0, {{1.0, 2.0}, true, false}, q1);
        CHECK(v.status == CommonFhcStatus::Empty);
    }
    SUBCASE("unbounded family is empty") {
        const CommonFhcVerdict v = common_fhc_verdict(one, 2.0, {{2.0, 3.0}, true, true}, q1);
        CHECK(v.status == CommonFhcStatus::Empty);
    }
    SUBCASE("uncountable flag is decisive") {
        const CommonFhcVerdict v = common_fhc_verdict(one, 2.0, {{1.5, 2.5}, false, false}, q1);
        CHECK(v.status == CommonFhcStatus::Empty);
    }
    SUBCASE("decreasing-to-1 weight: {1, 1.7} shares nothing") {
        const WeightSeq r2 = WeightSeq::rational2();
        const ShiftQuantities q2 = shift_quantities(r2, 1e5, 2.0);
        const CommonFhcVerdict v = common_fhc_verdict(r2, 2.0, {{1.0, 1.7}, true, false}, q2);
        CHECK(v.status == CommonFhcStatus::Empty);
    }
    SUBCASE("positive values required") {
        CHECK_THROWS_AS(common_fhc_verdict(one, 2.0, {{-1.0, 2.0}, true, false}, q1),
                        std::invalid_argument);
    }
}

TEST_CASE("common fhc verdict is antitone under enlargement") {
    const WeightSeq one = WeightSeq::constant(1.0);
    const ShiftQuantities q = shift_quantities(one, 1e5, 2.0);
    std::mt19937_64 rng(99);
    for (int t = 0; t < 200; ++t) {
        LambdaSet small;
        const size_t n = 1 + rng() % 4;
        for (size_t i = 0; i < n; ++i)
            small.values.push_back(0.5 + 3.5 * (double)(rng() % 1000) / 1000.0);
        LambdaSet big = small;
        big.values.push_back(0.5 + 3.5 * (double)(rng() % 1000) / 1000.0);
        if (rng() % 4 == 0) big.unbounded = true;
        const auto vs = common_fhc_verdict(one, 2.0, small, q).status;
        const auto vb = common_fhc_verdict(one, 2.0, big, q).status;
        if (vs == CommonFhcStatus::Empty) CHECK(vb == CommonFhcStatus::Empty);
    }
}

TEST_CASE("pair equivalence of weight products") {
    const WeightSeq r2 = WeightSeq::rational2();
    SUBCASE("identical weights") {
        const PairEquiv pe = pair_equiv_check(r2, r2, 100000);
        CHECK(pe.comparable);
        CHECK(pe.C == doctest::Approx(1.0));
    }
    SUBCASE("absolutely summable perturbation stays comparable") {
        // (1 + (-1)^n / (n^2+1)) keeps weights positive and the log-ratio
        // partial sums inside sum log(1 + 1/(n^2+1)) < pi^2/6
        const WeightSeq pert = WeightSeq::custom(
            [](uint64_t n) {
                const double base = ((double)n + 1.0) * ((double)n + 1.0) / ((double)n * (double)n);
                const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
                return base * (1.0 + sgn / ((double)n * (double)n + 1.0));
            },
            4.0);
        const PairEquiv pe = pair_equiv_check(r2, pert, 100000);
        CHECK(pe.comparable);
        CHECK(pe.C <= std::exp(M_PI * M_PI / 6.0));
    }
    SUBCASE("different constants diverge linearly") {
        const PairEquiv pe =
            pair_equiv_check(WeightSeq::constant(2.0), WeightSeq::constant(3.0), 100000);
        CHECK_FALSE(pe.comparable);
    }
}
