#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rsing/distribution.hpp"
#include "rsing/sampling.hpp"

namespace rsing {

struct ZeroLines {
    std::vector<std::size_t> columns;
    std::vector<std::size_t> rows;
};

ZeroLines detect_zero_lines(const IntMatrix& m);

struct LevelSetPair {
    std::size_t j1 = 0, j2 = 0;
    // 'A': relabeling moves the b-level set of j1 onto a non-b level of j2.
    // 'B': equal b-rows, and the partitions of the remaining rows coincide.
    char kind = 'A';
    // Value map sigma on the levels present in column j1 (integer-scaled values).
    std::vector<std::pair<std::int64_t, std::int64_t>> sigma;
};

// Column pairs whose row partitions by value coincide under a value bijection.
// b_level is the integer-scaled mode; levels is the full list of integer-scaled atoms of eta.
std::vector<LevelSetPair> detect_level_set_pairs(const IntMatrix& m, std::int64_t b_level,
                                                 const std::vector<std::int64_t>& levels);

// Same predicate for a single pair.
bool level_set_match(const IntMatrix& m, std::size_t j1, std::size_t j2, std::int64_t b_level,
                     const std::vector<std::int64_t>& levels, LevelSetPair* out = nullptr);

// Exact rank of the n x 2 submatrix of columns j1, j2 is at most 1.
bool columns_dependent(const IntMatrix& m, std::size_t j1, std::size_t j2);

enum class Cause { None, ZeroColumn, ZeroRow, ColumnPair, RowPair, Unexplained };
const char* to_string(Cause c) noexcept;

struct StructuredFindings {
    ZeroLines zero;
    std::vector<LevelSetPair> column_pairs;  // pairs that are also rank-deficient
    std::vector<LevelSetPair> row_pairs;
    Cause cause = Cause::None;
    bool explained = false;
};

// First matching cause: zero column, zero row, column pair, row pair. Pairs only count when
// the two lines are linearly dependent. Cause is Unexplained if singular and nothing matched,
// None if not singular.
StructuredFindings attribute(const MatrixSample& m, const DiscreteLaw& law, bool singular);

struct TheoryTerms {
    double q0 = 0.0;
    double qc = 0.0;
    double zero_term = 0.0;       // 2 n q0^n
    double collision_term = 0.0;  // n^2 qc^n
    double p_s = 0.0;
    double p_zero_column = 0.0;   // 1 - (1 - q0^n)^n
    double p_zero_row = 0.0;
    double bonferroni_upper = 0.0;  // S1
    double bonferroni_lower = 0.0;  // S1 - S2
    double p_zero_line = 0.0;       // exact P(some zero row or column)
};

TheoryTerms theory_leading_order(const DiscreteLaw& law, std::size_t n);
TheoryTerms theory_leading_order(double q0, double qc, std::size_t n);

struct BinomialBounds {
    double exact_tail = 0.0;    // P(Bin(n,p) > (tau+1) p n)
    double upper_bound = 0.0;   // exp(-tau log(tau/e) p n)
    double exact_window = 0.0;  // P(pn/8 <= Bin(n,p) <= 8 p n)
    double window_bound = 0.0;  // 1 - (1-p)^(n/2)
    bool in_regime = false;     // 50/n < p < 0.1 and tau > e
};

BinomialBounds binomial_bounds(std::size_t n, double p, double tau);

// Binomial(n, p) pmf by log-space evaluation.
std::vector<double> binomial_pmf(std::size_t n, double p);

// Every pair of columns has l1 distance of the delta*xi parts at most C_sum p n (normalized view).
bool e_sum_holds(const MatrixSample& m, const DiscreteLaw& law);

// Per column, the number of entries different from b.
std::vector<std::size_t> support_counts(const MatrixSample& m);

// Some row is all b on J1 and J2, and another row has exactly one non-b entry in J1 and is all b on J2.
bool e_col_holds(const MatrixSample& m, const std::vector<std::size_t>& J1, const std::vector<std::size_t>& J2);

// Rows among the first floor(n/2) whose delta support meets J in exactly one index.
std::vector<std::size_t> incidence_set(const MatrixSample& m, const std::vector<std::size_t>& J);

}  // namespace rsing
