#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "rsing/events.hpp"
#include "rsing/linalg.hpp"
#include "support.hpp"

using namespace rsing;

namespace {

MatrixSample sample_of(const IntMatrix& m, std::int64_t b_level = 0) {
    MatrixSample s;
    s.n = m.rows;
    s.entries = m;
    s.b_level = b_level;
    s.delta_mask.resize(m.rows * m.cols);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) s.delta_mask[i * m.cols + j] = m(i, j) != b_level;
    return s;
}

IntMatrix binary_matrix(std::size_t n, std::uint64_t bits) {
    IntMatrix m(n, n);
    for (std::size_t k = 0; k < n * n; ++k) m.data[k] = (bits >> k) & 1u;
    return m;
}

// Set of row blocks, one block per distinct value in column j.
std::set<std::set<std::size_t>> row_partition(const IntMatrix& m, std::size_t j) {
    std::map<std::int64_t, std::set<std::size_t>> by_value;
    for (std::size_t i = 0; i < m.rows; ++i) by_value[m(i, j)].insert(i);
    std::set<std::set<std::size_t>> out;
    for (auto& [v, rows] : by_value) out.insert(rows);
    return out;
}

bool column_has(const IntMatrix& m, std::size_t j, std::int64_t v) {
    for (std::size_t i = 0; i < m.rows; ++i)
        if (m(i, j) == v) return true;
    return false;
}

// Equal partitions; if j1 misses b, j2 must either miss b too or leave some non-b level unused.
bool brute_pair(const IntMatrix& m, std::size_t j1, std::size_t j2, std::int64_t b,
                const std::vector<std::int64_t>& levels) {
    if (row_partition(m, j1) != row_partition(m, j2)) return false;
    if (column_has(m, j1, b) || !column_has(m, j2, b)) return true;
    for (auto v : levels)
        if (v != b && !column_has(m, j2, v)) return true;
    return false;
}

double enumerate_zero_lines(std::size_t n, double q0, bool columns_only) {
    double total = 0.0;
    for (std::uint64_t bits = 0; bits < (1ull << (n * n)); ++bits) {
        const auto m = binary_matrix(n, bits);
        const auto z = detect_zero_lines(m);
        const bool hit = !z.columns.empty() || (!columns_only && !z.rows.empty());
        if (!hit) continue;
        const auto ones = static_cast<double>(std::popcount(bits));
        total += std::pow(1 - q0, ones) * std::pow(q0, static_cast<double>(n * n) - ones);
    }
    return total;
}

}  // namespace

TEST_CASE("zero lines") {
    const auto m = IntMatrix::from_rows({{0, 1, 0}, {0, 0, 0}, {0, 2, 0}});
    const auto z = detect_zero_lines(m);
    CHECK(z.columns == std::vector<std::size_t>{0, 2});
    CHECK(z.rows == std::vector<std::size_t>{1});
    const auto full = detect_zero_lines(IntMatrix::from_rows({{1, 2}, {3, 4}}));
    CHECK(full.columns.empty());
    CHECK(full.rows.empty());
}

TEST_CASE("level set pairs on explicit matrices") {
    const std::vector<std::int64_t> levels{0, 1, -1};
    // Columns 0 and 1 relabel 0 <-> 1 and 1 <-> 0.
    const auto swap = IntMatrix::from_rows({{0, 1, 1}, {1, 0, 1}, {1, 0, 0}});
    LevelSetPair pair;
    REQUIRE(level_set_match(swap, 0, 1, 0, levels, &pair));
    CHECK(pair.kind == 'A');
    CHECK(pair.sigma == std::vector<std::pair<std::int64_t, std::int64_t>>{{0, 1}, {1, 0}});
    CHECK_FALSE(level_set_match(swap, 0, 2, 0, levels));

    // Equal b-rows, other rows split the same way: type B.
    const auto same_b = IntMatrix::from_rows({{0, 0}, {1, -1}, {-1, 1}});
    REQUIRE(level_set_match(same_b, 0, 1, 0, levels, &pair));
    CHECK(pair.kind == 'B');

    // j1 never takes b, j2 uses every non-b level and also b.
    const auto blocked = IntMatrix::from_rows({{1, 0}, {-1, 1}, {-1, 1}, {1, 0}});
    const auto full = IntMatrix::from_rows({{1, 1}, {-1, -1}});
    CHECK(level_set_match(full, 0, 1, 0, levels));
    CHECK(level_set_match(blocked, 0, 1, 0, levels));
    CHECK_FALSE(level_set_match(blocked, 0, 1, 0, {0, 1}));

    const auto pairs = detect_level_set_pairs(swap, 0, levels);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].j1 == 0);
    CHECK(pairs[0].j2 == 1);
}

TEST_CASE("level set predicate matches brute-force partitions for all binary matrices with n <= 4") {
    for (const auto& levels : {std::vector<std::int64_t>{0, 1}, std::vector<std::int64_t>{1, 0}}) {
        const std::int64_t b = levels[0];
        for (std::size_t n = 2; n <= 4; ++n) {
            std::uint64_t mismatches = 0;
            for (std::uint64_t bits = 0; bits < (1ull << (n * n)); ++bits) {
                const auto m = binary_matrix(n, bits);
                for (std::size_t j1 = 0; j1 < n; ++j1)
                    for (std::size_t j2 = 0; j2 < n; ++j2)
                        if (j1 != j2 && level_set_match(m, j1, j2, b, levels) != brute_pair(m, j1, j2, b, levels))
                            ++mismatches;
            }
            CAPTURE(n);
            CHECK(mismatches == 0);
        }
    }
}

TEST_CASE("attribution: every singular 3x3 binary matrix is explained, not so at n = 4") {
    const auto law = test::law("bern03");
    std::uint64_t singular = 0;
    for (std::uint64_t bits = 0; bits < (1ull << 9); ++bits) {
        const auto s = sample_of(binary_matrix(3, bits));
        const bool sing = exact_rank(s.entries).rank < 3;
        const auto f = attribute(s, law, sing);
        if (!sing) {
            CHECK(f.cause == Cause::None);
            continue;
        }
        ++singular;
        CHECK(f.explained);
        for (const auto& p : f.column_pairs) CHECK(columns_dependent(s.entries, p.j1, p.j2));
    }
    // 174 of the 512 binary 3x3 matrices are nonsingular.
    CHECK(singular == 512 - 174);

    const auto cycle = IntMatrix::from_rows({{1, 1, 0, 0}, {0, 0, 1, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}});
    REQUIRE(exact_rank(cycle).rank == 3);
    const auto f = attribute(sample_of(cycle), law, true);
    CHECK(f.cause == Cause::Unexplained);
    CHECK_FALSE(f.explained);
    CHECK(std::string(to_string(f.cause)) == "unexplained");
}

TEST_CASE("attribution order and soundness on samples") {
    const auto law = test::law("sym3");
    const auto zc = sample_of(IntMatrix::from_rows({{0, 1}, {0, 1}}));
    CHECK(attribute(zc, law, true).cause == Cause::ZeroColumn);
    const auto zr = sample_of(IntMatrix::from_rows({{1, -1}, {0, 0}}));
    CHECK(attribute(zr, law, true).cause == Cause::ZeroRow);
    const auto rp = sample_of(IntMatrix::from_rows({{1, -1}, {-1, 1}}));
    CHECK(attribute(rp, law, true).cause == Cause::ColumnPair);

    RngStream root(12);
    for (std::uint64_t t = 0; t < 3000; ++t) {
        RngStream rng = root.substream(t);
        const auto s = sample_matrix(law, 4, rng);
        const bool sing = exact_rank(s.entries).rank < 4;
        const auto f = attribute(s, law, sing);
        if (!f.zero.columns.empty() || !f.zero.rows.empty()) CHECK(sing);
        for (const auto& p : f.row_pairs) CHECK(columns_dependent(s.entries.transpose(), p.j1, p.j2));
        CHECK((f.cause == Cause::None) == !sing);
    }
}

TEST_CASE("theory terms against enumeration") {
    for (std::size_t n : {2u, 3u, 4u}) {
        for (double q0 : {0.7, 0.9, 0.35}) {
            const auto t = theory_leading_order(q0, 0.5, n);
            CAPTURE(n);
            CAPTURE(q0);
            CHECK(t.p_zero_line == doctest::Approx(enumerate_zero_lines(n, q0, false)).epsilon(1e-12));
            CHECK(t.p_zero_column == doctest::Approx(enumerate_zero_lines(n, q0, true)).epsilon(1e-12));
            CHECK(t.bonferroni_lower <= t.p_zero_line + 1e-15);
            CHECK(t.p_zero_line <= t.bonferroni_upper + 1e-15);
        }
    }
    CHECK(theory_leading_order(0.7, 0.58, 2).p_zero_column == doctest::Approx(0.7399).epsilon(1e-12));
    const auto zero = theory_leading_order(0.0, 0.5, 10);
    CHECK(zero.p_zero_line == 0.0);
    CHECK(zero.p_s == doctest::Approx(100.0 * std::pow(0.5, 10)));
}

TEST_CASE("theory terms for sym3 at n = 30") {
    const auto t = theory_leading_order(test::law("sym3"), 30);
    const double q = std::pow(0.7, 30);
    CHECK(t.zero_term == doctest::Approx(60.0 * q).epsilon(1e-13));
    CHECK(t.zero_term == doctest::Approx(1.3524e-3).epsilon(1e-4));
    CHECK(t.collision_term == doctest::Approx(900.0 * std::pow(0.535, 30)).epsilon(1e-12));
    CHECK(t.collision_term == doctest::Approx(6.38e-6).epsilon(2e-3));
    // S2: two columns, two rows, or one row and one column.
    const double s2 = 2.0 * (30.0 * 29.0 / 2.0) * q * q + 900.0 * q * q / 0.7;
    CHECK(t.bonferroni_lower == doctest::Approx(60.0 * q - s2).epsilon(1e-13));
}

TEST_CASE("binomial bounds") {
    const auto b = binomial_bounds(100, 0.1, 3.0);
    CHECK_FALSE(b.in_regime);
    CHECK(b.upper_bound == doctest::Approx(std::exp(-30.0 * std::log(3.0 / std::exp(1.0)))));
    CHECK(b.upper_bound == doctest::Approx(0.0519).epsilon(1e-3));

    for (auto [n, p] : {std::pair{100u, 0.1}, std::pair{1000u, 0.06}, std::pair{5000u, 0.01}}) {
        // Independent pmf by the ratio recurrence.
        std::vector<long double> pmf(n + 1);
        pmf[0] = std::pow(1.0L - p, static_cast<long double>(n));
        for (std::size_t k = 0; k < n; ++k) pmf[k + 1] = pmf[k] * (n - k) / (k + 1) * p / (1.0L - p);
        const auto lib = binomial_pmf(n, p);
        long double total = 0.0L;
        for (std::size_t k = 0; k <= n; ++k) {
            if (pmf[k] > 1e-300L) CHECK(lib[k] == doctest::Approx(static_cast<double>(pmf[k])).epsilon(1e-9));
            total += lib[k];
        }
        CHECK(static_cast<double>(total) == doctest::Approx(1.0).epsilon(1e-12));
        for (double tau : {3.0, 4.0, 6.0}) {
            const double cut = (tau + 1.0) * p * n;
            long double tail = 0.0L;
            for (std::size_t k = 0; k <= n; ++k)
                if (static_cast<double>(k) > cut) tail += pmf[k];
            const auto bb = binomial_bounds(n, p, tau);
            CHECK(bb.exact_tail == doctest::Approx(static_cast<double>(tail)).epsilon(1e-9));
            CHECK(bb.exact_tail <= bb.upper_bound);
        }
    }
    CHECK(binomial_bounds(5000, 0.05, 3.0).in_regime);
    CHECK_FALSE(binomial_bounds(5000, 0.05, 2.5).in_regime);
}

TEST_CASE("e_sum against all pairs") {
    const auto law = test::law_from("0 : 0.95\n1 : 0.025\n-1 : 0.025\n");
    RngStream rng(31);
    std::uint64_t fails = 0;
    for (int t = 0; t < 400; ++t) {
        const std::size_t n = 10;
        IntMatrix m(n, n);
        const double density = rng.uniform();
        for (auto& v : m.data) v = rng.uniform() < density ? (rng.uniform() < 0.5 ? -1 : 1) : 0;
        const auto s = sample_of(m);
        // C_sum p n with C_sum = 10, p = 0.05.
        const double limit = 10.0 * 0.05 * n;
        bool expect = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double d = 0.0;
                for (std::size_t r = 0; r < n; ++r) d += std::abs(m(r, i) - m(r, j));
                expect = expect && d <= limit;
            }
        fails += !expect;
        CHECK(e_sum_holds(s, law) == expect);
    }
    CHECK(fails > 0);
    CHECK(fails < 400);
}

TEST_CASE("support counts, e_col and incidence set") {
    const auto s = sample_of(IntMatrix::from_rows({{0, 1, 0, 0}, {0, 1, 1, 0}, {0, 0, 1, 0}, {1, 0, 0, 0}}));
    CHECK(support_counts(s) == std::vector<std::size_t>{1, 2, 2, 0});
    CHECK(incidence_set(s, {1, 2}) == std::vector<std::size_t>{0});
    CHECK(incidence_set(s, {0}).empty());
    // Row 2 is clean on {1} and {3}; row 0 has one hit in {1}.
    CHECK(e_col_holds(s, {1}, {3}));
    CHECK_FALSE(e_col_holds(s, {1, 2}, {0}));
    CHECK_FALSE(e_col_holds(s, {0, 1, 2}, {}));

    const auto biased = sample_of(IntMatrix::from_rows({{2, 4}, {2, 2}}), 2);
    CHECK(support_counts(biased) == std::vector<std::size_t>{0, 1});
}
