#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsing/linalg.hpp"
#include "rsing/sampling.hpp"
#include "support.hpp"

using namespace rsing;

namespace {

// Rank over Q by plain Gaussian elimination on rationals.
std::size_t rational_rank(const IntMatrix& m) {
    std::vector<std::vector<mpq_class>> a(m.rows, std::vector<mpq_class>(m.cols));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) a[i][j] = m(i, j);
    std::size_t rank = 0;
    for (std::size_t c = 0; c < m.cols && rank < m.rows; ++c) {
        std::size_t piv = rank;
        while (piv < m.rows && a[piv][c] == 0) ++piv;
        if (piv == m.rows) continue;
        std::swap(a[piv], a[rank]);
        for (std::size_t i = rank + 1; i < m.rows; ++i) {
            const mpq_class f = a[i][c] / a[rank][c];
            for (std::size_t j = c; j < m.cols; ++j) a[i][j] -= f * a[rank][j];
        }
        ++rank;
    }
    return rank;
}

// Largest singular value by power iteration on M^T M.
double power_norm(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m.cols());
    double lambda = 0.0;
    for (int it = 0; it < 5000; ++it) {
        Eigen::VectorXd w = m.transpose() * (m * v);
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = w / nw;
        if (std::abs(nw - lambda) <= 1e-15 * nw) break;
        lambda = nw;
    }
    return std::sqrt((m * v).squaredNorm());
}

IntMatrix random_int_matrix(std::size_t r, std::size_t c, RngStream& rng, int range) {
    IntMatrix m(r, c);
    for (auto& v : m.data) v = static_cast<std::int64_t>(rng.below(2 * range + 1)) - range;
    return m;
}

}  // namespace

TEST_CASE("exact rank small cases") {
    CHECK(exact_rank(IntMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})).rank == 3);
    const auto r = exact_rank(IntMatrix::from_rows({{1, 2}, {3, 4}}));
    CHECK(r.rank == 2);
    CHECK_FALSE(r.is_singular);
    CHECK(exact_rank(IntMatrix::from_rows({{1, 2, 1}, {3, 4, 3}, {5, 6, 5}})).is_singular);
    CHECK(exact_rank(IntMatrix(3, 3)).rank == 0);
    CHECK(exact_rank(IntMatrix::from_rows({{2, 4, 6}, {1, 2, 3}})).rank == 1);
}

TEST_CASE("exact rank agrees with rational elimination and is permutation invariant") {
    RngStream rng(2024);
    for (int t = 0; t < 300; ++t) {
        const std::size_t r = 1 + rng.below(6), c = 1 + rng.below(6);
        auto m = random_int_matrix(r, c, rng, t % 2 ? 1 : 3);
        if (t % 5 == 0 && c > 1)
            for (std::size_t i = 0; i < r; ++i) m(i, c - 1) = 2 * m(i, 0) - m(i, c > 2 ? 1 : 0);
        const auto res = exact_rank(m);
        CHECK(res.rank == rational_rank(m));
        CHECK(exact_rank(m.transpose()).rank == res.rank);
        CHECK(res.pivot_log.size() == res.rank);
        std::vector<std::size_t> pr(r), pc(c);
        std::iota(pr.begin(), pr.end(), 0);
        std::iota(pc.begin(), pc.end(), 0);
        shuffle(pr, rng);
        shuffle(pc, rng);
        IntMatrix p(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) p(i, j) = m(pr[i], pc[j]);
        CHECK(exact_rank(p).rank == res.rank);
    }
}

TEST_CASE("exact rank promotes to big integers on overflow") {
    const std::int64_t big = 3037000499LL;  // floor(sqrt(2^63 - 1))
    auto m = IntMatrix::from_rows({{big, big - 1, 7, 1}, {big - 2, big, 3, 2}, {5, 11, big, big - 5}, {1, 2, 3, big}});
    const auto r = exact_rank(m);
    CHECK(r.overflow_promotions == 1);
    CHECK(r.rank == rational_rank(m));
    // Duplicate a column: still detected after promotion.
    for (std::size_t i = 0; i < 4; ++i) m(i, 3) = m(i, 0);
    const auto s = exact_rank(m);
    CHECK(s.is_singular);
    CHECK(s.rank == 3);
}

TEST_CASE("smallest singular value") {
    CHECK(smallest_singular_value(Eigen::MatrixXd::Identity(5, 5)).value == doctest::Approx(1.0));
    Eigen::MatrixXd d(2, 2);
    d << 3, 0, 0, 0.001;
    CHECK(smallest_singular_value(d).value == doctest::Approx(0.001).epsilon(1e-12));

    // [[1,1],[1,1+e]]: s_min = |det| / s_max with s_max from the closed-form 2x2 formula.
    const double e = 1e-6;
    Eigen::MatrixXd m(2, 2);
    m << 1, 1, 1, 1 + e;
    const double a = 1, b = 1, c = 1, dd = 1 + e;
    const double s1 = a * a + b * b + c * c + dd * dd;
    const double s2 = std::sqrt((a * a + b * b - c * c - dd * dd) * (a * a + b * b - c * c - dd * dd) +
                                4 * (a * c + b * dd) * (a * c + b * dd));
    const double smax = std::sqrt((s1 + s2) / 2);
    const double oracle = std::abs(a * dd - b * c) / smax;
    const auto sv = smallest_singular_value(m);
    CHECK(sv.value == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(sv.certified_positive);

    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(smallest_singular_value(bad), Error);
}

TEST_CASE("certified positive implies full exact rank; singular implies tiny s_min") {
    const auto law = test::law("sym3");
    for (std::size_t n : {3u, 5u, 8u, 12u}) {
        for (std::uint64_t i = 0; i < 250; ++i) {
            RngStream rng = RngStream(17).substream(n).substream(i);
            const auto m = sample_matrix(law, n, rng);
            const auto md = m.to_double();
            const auto sv = smallest_singular_value(md);
            const auto rank = exact_rank(m);
            if (sv.certified_positive) CHECK(rank.rank == n);
            if (rank.is_singular) CHECK(sv.value < 1e-6 * std::max(spectral_norm(md), 1e-300));
        }
    }
}

TEST_CASE("spectral norm deviation") {
    const auto law = test::law("sym3");  // E[eta] = 0
    MatrixSample zero;
    zero.n = 3;
    zero.entries = IntMatrix(3, 3);
    zero.delta_mask.assign(9, 0);
    CHECK(spectral_norm_deviation(zero, law) == doctest::Approx(0.0));

    MatrixSample diag = zero;
    diag.entries(0, 0) = 2;
    diag.entries(1, 1) = 1;
    // sym3 levels are {0, 1, -1}; entry 2 is off-law but exercises the formula.
    CHECK(spectral_norm_deviation(diag, law) == doctest::Approx(2.0));

    const auto biased = test::law("biased");
    RngStream rng(3);
    const auto m = sample_matrix(biased, 8, rng);
    Eigen::MatrixXd centered = m.to_double();
    centered.array() -= biased.eta_mean();
    CHECK(spectral_norm_deviation(m, biased) == doctest::Approx(power_norm(centered)).epsilon(1e-6));
}

TEST_CASE("column distance") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(column_distance(id, i) == doctest::Approx(1.0));
    Eigen::MatrixXd dup(3, 3);
    dup << 1, 1, 2, 3, 3, 5, 4, 4, 7;
    CHECK(column_distance(dup, 0) < 1e-12);
    CHECK(column_distance(dup, 1) < 1e-12);

    const auto law = test::law("sym3");
    for (std::uint64_t t = 0; t < 200; ++t) {
        RngStream rng = RngStream(8).substream(t);
        const auto m = sample_matrix(law, 6, rng);
        const auto md = m.to_double();
        const double smin = smallest_singular_value(md).value;
        double min_dist = 1e300;
        for (std::size_t i = 0; i < 6; ++i) {
            const double di = column_distance(md, i);
            CHECK(di >= smin - 1e-9);
            min_dist = std::min(min_dist, di);
        }
        if (exact_rank(m).is_singular) CHECK(min_dist < 1e-8 * std::max(spectral_norm(md), 1.0));
    }
}

TEST_CASE("e-norm") {
    CHECK(e_norm({1, -1, 0, 0}, 0.3) == doctest::Approx(std::sqrt(2.0)));
    CHECK(e_norm({1, 1, 1, 1}, 0.25) == doctest::Approx(2.0));
    CHECK(e_norm({0, 0, 0}, 0.5) == 0.0);
    const std::vector<double> x{0.3, -1.2, 2.5, 0.7, 0.1};
    const double l2 = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    CHECK(e_norm(x, 1.0 / x.size()) == doctest::Approx(l2));
}

TEST_CASE("float screen and audited decision") {
    const auto law = test::law("sym3");
    MatrixSample m;
    m.n = 2;
    m.entries = IntMatrix::from_rows({{1, 1}, {1, 1}});
    m.delta_mask.assign(4, 1);
    RngStream audit(0);
    const auto d = decide_singularity(m, ScreenOptions{}, audit);
    CHECK(d.screen_positive);
    CHECK(d.singular);
    CHECK(d.exact_checked);

    m.entries = IntMatrix::from_rows({{1, 0}, {0, 1}});
    const auto ok = decide_singularity(m, ScreenOptions{.threshold = 1e-8, .audit_fraction = 1.0}, audit);
    CHECK_FALSE(ok.singular);
    CHECK(ok.audited);

    // A threshold of 0 screens every exactly singular matrix with a nonzero float pivot as negative;
    // with a full audit the disagreement must surface as AuditFailure.
    m.entries = IntMatrix::from_rows({{3, 1, 2}, {1, 3, 2}, {1, 1, 1}});  // rows: r3 = (r1 + r2) / 4
    const auto lu_zero = float_screen(m.to_double(), 0.0);
    if (!lu_zero.positive) {
        m.n = 3;
        m.delta_mask.assign(9, 1);
        CHECK_THROWS_AS(decide_singularity(m, ScreenOptions{.threshold = 0.0, .audit_fraction = 1.0}, audit), Error);
    }
    CHECK(exact_rank(m.entries).is_singular);
}

TEST_CASE("exact kernels") {
    const auto id = IntMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const auto k = normal_to_trailing_columns(id);
    CHECK(k.dimension == 1);
    REQUIRE(k.vector.size() == 3);
    CHECK(k.vector[0] == 1);
    CHECK(k.vector[1] == 0);
    CHECK(k.vector[2] == 0);

    const auto m = IntMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    const auto ker = exact_kernel(m);
    CHECK(ker.dimension == 1);
    REQUIRE(ker.vector.size() == 3);
    for (std::size_t i = 0; i < 2; ++i) {
        mpz_class s = 0;
        for (std::size_t j = 0; j < 3; ++j) s += m(i, j) * ker.vector[j];
        CHECK(s == 0);
    }
    CHECK(ker.vector[0] > 0);

    // Columns 2..n duplicated: kernel of their transpose has dimension 2.
    const auto dup = IntMatrix::from_rows({{5, 1, 1}, {7, 2, 2}, {1, 3, 3}});
    CHECK(normal_to_trailing_columns(dup).dimension == 2);

    const auto u = to_double_unit_max({mpz_class(-4), mpz_class(2), mpz_class(1)});
    CHECK(u[0] == -1.0);
    CHECK(u[1] == 0.5);
}
