#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <numeric>

#include "rsing/vector_classes.hpp"
#include "support.hpp"

using namespace rsing;

namespace {

DecompositionParams sym3_params(std::size_t n, double p) {
    return derive_params(n, p, test::law("sym3"), Calibration{});
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an rsing::Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("derive_params at n=5000, p=0.01") {
    const auto prm = sym3_params(5000, 0.01);
    CHECK(prm.gamma == 10.0);
    CHECK(prm.d == doctest::Approx(50.0));
    CHECK(prm.l0 == 2);
    CHECK(prm.s0 == 1);
    REQUIRE(prm.n_grid.size() == 5);
    CHECK(prm.n_grid[0] == 2);
    CHECK(prm.n_grid[1] == 3);
    CHECK(prm.n_grid[2] == 3);
    CHECK(prm.n_grid[3] == 707);
    CHECK(prm.n_grid[4] == 1250);
    CHECK(prm.kappa == doctest::Approx(std::log(500.0) / std::log(2.0)));
    CHECK(prm.kappa == doctest::Approx(8.966).epsilon(1e-3));
}

TEST_CASE("derive_params regime checks") {
    CHECK(code_of([] { sym3_params(100, 0.5); }) == ErrorCode::OutOfRegime);
    const auto big = sym3_params(1000000, 0.001);
    CHECK(big.d == doctest::Approx(1000.0));
    CHECK(big.l0 == 36);
    // l0^(s0-1) <= 1/(64p) < l0^s0
    const double inv = 1.0 / (64 * 0.001);
    CHECK(std::pow(36.0, big.s0 - 1) <= inv);
    CHECK(inv < std::pow(36.0, big.s0));
    CHECK(code_of([] { sym3_params(50, 0.01); }) == ErrorCode::OutOfRegime);

    bool in_regime = true;
    const auto relaxed = derive_params_relaxed(64, 0.3, support_constants(test::law("sym3")), Calibration{}, in_regime);
    CHECK_FALSE(in_regime);
    CHECK(relaxed.l0 >= 2);
    for (std::size_t j = 1; j < relaxed.n_grid.size(); ++j) CHECK(relaxed.n_grid[j - 1] <= relaxed.n_grid[j]);
}

TEST_CASE("rearrange") {
    const auto r = rearrange({0.5, -2.0, 1.0});
    CHECK(r.sorted_abs == std::vector<double>{2.0, 1.0, 0.5});
    CHECK(r.perm == std::vector<std::size_t>{1, 2, 0});
    const auto flat = rearrange({3.0, -3.0, 3.0, 3.0});
    CHECK(flat.perm == std::vector<std::size_t>{0, 1, 2, 3});
    const auto again = rearrange(r.sorted_abs);
    CHECK(again.perm == std::vector<std::size_t>{0, 1, 2});

    RngStream rng(4);
    std::vector<double> x(40);
    for (auto& v : x) v = rng.uniform() - 0.5;
    auto y = x;
    shuffle(y, rng);
    CHECK(rearrange(x).sorted_abs == rearrange(y).sorted_abs);
}

TEST_CASE("growth function") {
    CHECK(growth_g(2.0, 50.0) == doctest::Approx(8.0));
    const double t = 64.0 * 50.0;
    CHECK(growth_g(t, 50.0) == doctest::Approx(std::exp(std::log(2 * t) * std::log(2 * t))));
    for (double d : {50.0, 100.0, 1000.0}) {
        double prev = 0.0;
        for (double s = 1.0; s < 200.0 * d; s *= 1.01) {
            const double g = growth_g(s, d);
            CHECK(g >= prev);
            prev = g;
        }
        for (double a = 2.0; a <= 1e4; a *= 1.7)
            for (double s = 1.0; s <= 1e5; s *= 1.9) CHECK(growth_g(a * s, d) >= growth_g(s, d) + a);
    }
}

TEST_CASE("normalize and zero scale entry") {
    const auto prm = sym3_params(5000, 0.01);
    std::vector<double> x(5000, 0.0);
    x[0] = 60;
    x[1] = 1;
    CHECK(code_of([&] { classify(x, prm); }) == ErrorCode::ZeroScaleEntry);
    std::vector<double> ones(5000, 2.0);
    const auto y = normalize_upsilon(ones, prm);
    CHECK(y[17] == 1.0);
}

TEST_CASE("steep class T0 on an explicit vector") {
    // n = 100 with C1 = 0.5: x*_1 = 60 >= 0.5 * 100 * x*_2.
    bool in_regime = false;
    const auto prm = derive_params_relaxed(100, 0.2, support_constants(test::law("sym3")), Calibration{}, in_regime);
    CHECK(prm.C1 == 0.5);
    std::vector<double> x(100, 0.0);
    x[0] = 60;
    x[1] = 1;
    CHECK(classify_structured(x, prm).cls == VectorClass::T0);
    x[0] = 49;
    CHECK(classify_structured(x, prm).cls != VectorClass::T0);
}

TEST_CASE("constant vector is not Vn; two-level vector is Vn") {
    const auto prm = sym3_params(5000, 0.01);
    const std::vector<double> ones(5000, 1.0);
    const auto lc = classify(ones, prm);
    CHECK(lc.cls != VectorClass::Vn);
    CHECK_FALSE(lc.steep());
    CHECK_FALSE(check_vn(ones, prm).nonconstant);

    std::vector<double> two(5000);
    for (std::size_t i = 0; i < two.size(); ++i) two[i] = i < 2500 ? 1.0 + prm.rho : 1.0 - prm.rho;
    RngStream rng(2);
    shuffle(two, rng);
    const auto label = classify(two, prm);
    CHECK(label.cls == VectorClass::Vn);
    const auto q = static_cast<std::size_t>(std::ceil(prm.delta * 5000));
    CHECK(label.q1.size() == q);
    CHECK(label.q2.size() == q);
    const auto y = normalize_upsilon(two, prm);
    for (auto i : label.q1)
        for (auto j : label.q2) CHECK(y[j] <= y[i] - prm.rho + 1e-12);
}

TEST_CASE("classification is scale invariant and steep classes are exclusive") {
    const auto prm = sym3_params(5000, 0.01);
    RngStream root(77);
    for (Generator g : {Generator::HeavyTailed, Generator::Lattice, Generator::NearConstant, Generator::Steep,
                        Generator::Gradual}) {
        for (std::uint64_t t = 0; t < 15; ++t) {
            RngStream rng = root.substream(static_cast<std::uint64_t>(g)).substream(t);
            const auto x = generate_vector(g, prm, rng);
            VectorLabel a;
            try {
                a = classify(x, prm);
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::ZeroScaleEntry);
                continue;
            }
            for (double c : {-3.0, 0.125, 1e6}) {
                auto y = x;
                for (auto& v : y) v *= c;
                CHECK(classify(y, prm).name() == a.name());
            }
            CHECK(static_cast<int>(a.steep()) + static_cast<int>(a.spread()) + static_cast<int>(a.cls == VectorClass::Vn) <= 1);
        }
    }
}

TEST_CASE("steep generator lands in T; gradual generator lands in Vn") {
    const auto prm = sym3_params(5000, 0.01);
    RngStream root(5);
    for (std::uint64_t t = 0; t < 50; ++t) {
        RngStream a = root.substream(0).substream(t), b = root.substream(1).substream(t);
        CHECK(classify(generate_vector(Generator::Steep, prm, a), prm).steep());
        const auto x = normalize_upsilon(generate_vector(Generator::Gradual, prm, b), prm);
        CHECK(check_vn(x, prm).member());
    }
}

TEST_CASE("coverage check bookkeeping") {
    const auto prm = sym3_params(5000, 0.01);
    const auto rep = coverage_check(prm, 60, RngStream(9), ClassifyOptions{}, 10);
    std::uint64_t covered = 0;
    for (const auto& g : rep.per_generator) covered += g.covered;
    CHECK(covered == rep.covered);
    CHECK(rep.covered <= rep.remainder);
    CHECK(rep.remainder <= 60);
    CHECK(rep.counterexamples.size() <= 10);
    CHECK(rep.covered_fraction() >= 0.0);
    CHECK(rep.covered_fraction() <= 1.0);
}

TEST_CASE("steep norm ratio check") {
    const auto prm = sym3_params(5000, 0.01);
    std::vector<double> e1(5000, 0.0);
    e1[0] = 1.0;
    VectorLabel t0;
    t0.cls = VectorClass::T0;
    const auto c = steep_norm_ratio_check(e1, t0, prm, Calibration{});
    CHECK(c.ratio == doctest::Approx(1.0));
    CHECK(c.holds);

    RngStream rng(1);
    std::vector<double> x(5000);
    for (auto& v : x) v = rng.uniform() + 0.1;
    VectorLabel other;
    const auto a = steep_norm_ratio_check(x, other, prm, Calibration{});
    for (auto& v : x) v *= 2.0;
    const auto b = steep_norm_ratio_check(x, other, prm, Calibration{});
    CHECK(a.ratio == doctest::Approx(b.ratio).epsilon(1e-14));
    CHECK(a.anchor == prm.n_grid.back());
}

TEST_CASE("lambda sampler") {
    LambdaSpec one;
    one.n = 1;
    one.k = 4;
    one.d = 1.0;
    one.sigma = {0};
    // Envelope g(1) = 2^1.5, so the grid is j/4 for |j| <= 11.
    RngStream rng(3);
    std::map<long, std::uint64_t> freq;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto x = sample_lambda(one, rng);
        REQUIRE(lambda_member(one, x));
        ++freq[std::lround(x[0] * 4)];
    }
    CHECK(freq.size() == 23);
    CHECK(freq.begin()->first == -11);
    CHECK(freq.rbegin()->first == 11);
    const double pr = 1.0 / 23.0, sd = std::sqrt(draws * pr * (1 - pr));
    for (const auto& [j, c] : freq) CHECK(std::abs(static_cast<double>(c) - draws * pr) < 4 * sd);

    LambdaSpec spec;
    spec.n = 16;
    spec.k = 4;
    spec.d = 1.0;
    spec.rho = 0.1;
    spec.h = 0.0;
    spec.q1 = {0, 1};
    spec.q2 = {2, 3};
    spec.sigma.resize(16);
    std::iota(spec.sigma.begin(), spec.sigma.end(), 0);
    CHECK(lambda_admissible(spec));
    for (int i = 0; i < 2000; ++i) {
        const auto x = sample_lambda(spec, rng);
        CHECK(lambda_member(spec, x));
        CHECK(x[0] >= 0.0);
        CHECK(x[3] <= -0.1 + 1e-12);
    }
    spec.h = 1e9;
    CHECK_FALSE(lambda_admissible(spec));
    CHECK(code_of([&] { sample_lambda(spec, rng); }) == ErrorCode::EmptyLambda);
}

TEST_CASE("vector batch parsing") {
    std::istringstream in("1 2 3\n# skip\n\n-0.5 4e-3\n");
    const auto v = read_vector_batch(in);
    REQUIRE(v.size() == 2);
    CHECK(v[1][1] == doctest::Approx(0.004));
    std::istringstream bad("1 x 3\n");
    CHECK(code_of([&] { read_vector_batch(bad); }) == ErrorCode::InvalidArgument);
}
