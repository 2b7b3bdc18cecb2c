#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rsing/sampling.hpp"
#include "support.hpp"

using namespace rsing;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string dump(const MatrixSample& m) {
    std::ostringstream out;
    write_matrix_dump(out, m);
    return out.str();
}

}  // namespace

TEST_CASE("golden matrix dumps stay byte-identical") {
    {
        const auto law = test::law("sym3");
        RngStream rng = RngStream(20240601).substream(0);
        CHECK(dump(sample_matrix(law, 2, rng)) == slurp(test::source_dir() / "tests/golden/sym3_n2_seed20240601.txt"));
    }
    {
        const auto law = test::law("biased");
        RngStream rng = RngStream(7).substream(3);
        CHECK(dump(sample_matrix(law, 6, rng)) == slurp(test::source_dir() / "tests/golden/biased_n6_seed7_index3.txt"));
    }
}

TEST_CASE("dump round trip") {
    const auto law = test::law("biased");
    RngStream rng(11);
    const auto m = sample_matrix(law, 5, rng);
    std::istringstream in(dump(m));
    const auto back = read_matrix_dump(in);
    CHECK(back.n == 5);
    CHECK(back.seed == 11);
    CHECK(back.law_id == "biased");
    CHECK(back.entries == m.entries);
}

TEST_CASE("entries respect the delta mask") {
    const auto law = test::law("biased");
    RngStream rng(5);
    const auto m = sample_matrix(law, 20, rng);
    CHECK(m.denominator == law.denominator());
    const auto& levels = law.scaled_levels();
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 20; ++j) {
            if (!m.delta(i, j)) {
                CHECK(m.entries(i, j) == m.b_level);
            } else {
                CHECK(std::find(levels.begin() + 1, levels.end(), m.entries(i, j)) != levels.end());
            }
        }
    const auto d = m.to_double();
    CHECK(d(0, 0) == doctest::Approx(static_cast<double>(m.entries(0, 0)) / law.denominator()));
}

TEST_CASE("entry frequencies match the law within 4 sigma") {
    const auto law = test::law("biased");
    const auto& w = law.level_masses();
    std::vector<std::uint64_t> counts(w.size(), 0);
    std::uint64_t deltas = 0, total = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        RngStream rng = RngStream(99).substream(t);
        const auto m = sample_matrix(law, 100, rng);
        for (std::size_t k = 0; k < m.entries.data.size(); ++k) {
            const auto it = std::find(law.scaled_levels().begin(), law.scaled_levels().end(), m.entries.data[k]);
            ++counts[static_cast<std::size_t>(it - law.scaled_levels().begin())];
            deltas += m.delta_mask[k];
            ++total;
        }
    }
    REQUIRE(total == 1000000);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double sd = std::sqrt(total * w[i] * (1 - w[i]));
        CHECK(std::abs(static_cast<double>(counts[i]) - total * w[i]) < 4 * sd);
    }
    const double p = law.p();
    CHECK(std::abs(static_cast<double>(deltas) - total * p) < 4 * std::sqrt(total * p * (1 - p)));
}

TEST_CASE("sample_level never returns out of range") {
    const auto law = test::law("sym3");
    RngStream rng(1);
    for (int i = 0; i < 10000; ++i) CHECK(sample_level(law, rng) < law.scaled_levels().size());
}

TEST_CASE("IntMatrix helpers") {
    const auto m = IntMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    const auto t = m.transpose();
    CHECK(t.rows == 3);
    CHECK(t(2, 1) == 6);
    CHECK(t.transpose() == m);
    CHECK_THROWS_AS(IntMatrix::from_rows({{1, 2}, {3}}), Error);
}
