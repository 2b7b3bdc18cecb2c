#include "rsing/events.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "rsing/errors.hpp"
#include "rsing/linalg.hpp"

namespace rsing {

ZeroLines detect_zero_lines(const IntMatrix& m) {
    ZeroLines z;
    for (std::size_t j = 0; j < m.cols; ++j) {
        bool zero = true;
        for (std::size_t i = 0; i < m.rows && zero; ++i) zero = m(i, j) == 0;
        if (zero) z.columns.push_back(j);
    }
    for (std::size_t i = 0; i < m.rows; ++i) {
        bool zero = true;
        for (std::size_t j = 0; j < m.cols && zero; ++j) zero = m(i, j) == 0;
        if (zero) z.rows.push_back(i);
    }
    return z;
}

bool level_set_match(const IntMatrix& m, std::size_t j1, std::size_t j2, std::int64_t b_level,
                     const std::vector<std::int64_t>& levels, LevelSetPair* out) {
    std::map<std::int64_t, std::int64_t> fwd, back;
    bool b_in_1 = false, b_rows_equal = true;
    for (std::size_t i = 0; i < m.rows; ++i) {
        const auto v1 = m(i, j1), v2 = m(i, j2);
        if (auto it = fwd.find(v1); it != fwd.end()) {
            if (it->second != v2) return false;
        } else {
            if (back.count(v2)) return false;
            fwd.emplace(v1, v2);
            back.emplace(v2, v1);
        }
        b_in_1 = b_in_1 || v1 == b_level;
        b_rows_equal = b_rows_equal && ((v1 == b_level) == (v2 == b_level));
    }
    char kind;
    if (b_in_1) {
        kind = fwd.at(b_level) != b_level ? 'A' : 'B';
    } else {
        // The empty b-level of j1 must go to an empty non-b level of j2.
        bool free_target = false;
        for (auto v : levels)
            if (v != b_level && !back.count(v)) free_target = true;
        if (free_target) kind = 'A';
        else if (b_rows_equal) kind = 'B';
        else return false;
    }
    if (out) {
        out->j1 = j1;
        out->j2 = j2;
        out->kind = kind;
        out->sigma.assign(fwd.begin(), fwd.end());
    }
    return true;
}

std::vector<LevelSetPair> detect_level_set_pairs(const IntMatrix& m, std::int64_t b_level,
                                                 const std::vector<std::int64_t>& levels) {
    std::vector<LevelSetPair> out;
    LevelSetPair pair;
    for (std::size_t j1 = 0; j1 < m.cols; ++j1)
        for (std::size_t j2 = j1 + 1; j2 < m.cols; ++j2)
            if (level_set_match(m, j1, j2, b_level, levels, &pair)) out.push_back(pair);
    return out;
}

bool columns_dependent(const IntMatrix& m, std::size_t j1, std::size_t j2) {
    IntMatrix sub(m.rows, 2);
    for (std::size_t i = 0; i < m.rows; ++i) {
        sub(i, 0) = m(i, j1);
        sub(i, 1) = m(i, j2);
    }
    return exact_rank(sub).rank <= 1;
}

const char* to_string(Cause c) noexcept {
    switch (c) {
    case Cause::None: return "none";
    case Cause::ZeroColumn: return "zero_column";
    case Cause::ZeroRow: return "zero_row";
    case Cause::ColumnPair: return "column_pair";
    case Cause::RowPair: return "row_pair";
    case Cause::Unexplained: return "unexplained";
    }
    return "?";
}

StructuredFindings attribute(const MatrixSample& m, const DiscreteLaw& law, bool singular) {
    StructuredFindings f;
    f.zero = detect_zero_lines(m.entries);
    if (!singular) return f;
    const auto& levels = law.scaled_levels();
    auto dependent_pairs = [&](const IntMatrix& mat) {
        std::vector<LevelSetPair> out;
        for (auto& p : detect_level_set_pairs(mat, m.b_level, levels))
            if (columns_dependent(mat, p.j1, p.j2)) out.push_back(std::move(p));
        return out;
    };
    if (!f.zero.columns.empty()) f.cause = Cause::ZeroColumn;
    else if (!f.zero.rows.empty()) f.cause = Cause::ZeroRow;
    else if (f.column_pairs = dependent_pairs(m.entries); !f.column_pairs.empty()) f.cause = Cause::ColumnPair;
    else if (f.row_pairs = dependent_pairs(m.entries.transpose()); !f.row_pairs.empty()) f.cause = Cause::RowPair;
    else f.cause = Cause::Unexplained;
    f.explained = f.cause != Cause::Unexplained;
    return f;
}

namespace {

// Exact P(some zero row or zero column) by inclusion-exclusion over a zero columns and b zero rows.
double exact_zero_line_union(double q0, std::size_t n) {
    if (q0 == 0.0) return 0.0;
    const mpq_class q(q0);
    mpq_class total = 0;
    std::vector<mpz_class> binom(n + 1);
    for (std::size_t a = 0; a <= n; ++a) mpz_bin_uiui(binom[a].get_mpz_t(), n, a);
    for (std::size_t a = 0; a <= n; ++a) {
        for (std::size_t b = 0; b <= n; ++b) {
            if (a == 0 && b == 0) continue;
            const unsigned long cells = n * (a + b) - a * b;
            mpq_class term;
            mpz_pow_ui(term.get_num_mpz_t(), q.get_num_mpz_t(), cells);
            mpz_pow_ui(term.get_den_mpz_t(), q.get_den_mpz_t(), cells);
            term.canonicalize();
            term *= binom[a] * binom[b];
            if ((a + b) % 2 == 1) total += term;
            else total -= term;
        }
    }
    return total.get_d();
}

}  // namespace

TheoryTerms theory_leading_order(double q0, double qc, std::size_t n) {
    TheoryTerms t;
    const double nd = static_cast<double>(n);
    t.q0 = q0;
    t.qc = qc;
    const double q0n = std::pow(q0, nd);
    t.zero_term = 2.0 * nd * q0n;
    t.collision_term = nd * nd * std::pow(qc, nd);
    t.p_s = t.zero_term + t.collision_term;
    t.p_zero_column = -std::expm1(nd * std::log1p(-q0n));
    t.p_zero_row = t.p_zero_column;
    t.bonferroni_upper = t.zero_term;
    const double s2 = nd * (nd - 1.0) * std::pow(q0, 2.0 * nd) + nd * nd * std::pow(q0, 2.0 * nd - 1.0);
    t.bonferroni_lower = t.zero_term - s2;
    t.p_zero_line = exact_zero_line_union(q0, n);
    return t;
}

TheoryTerms theory_leading_order(const DiscreteLaw& law, std::size_t n) {
    return theory_leading_order(zero_mass(law), collision_probability(law), n);
}

std::vector<double> binomial_pmf(std::size_t n, double p) {
    std::vector<double> pmf(n + 1, 0.0);
    if (p <= 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (p >= 1.0) {
        pmf[n] = 1.0;
        return pmf;
    }
    const long double lp = std::log(static_cast<long double>(p));
    const long double lq = std::log1p(-static_cast<long double>(p));
    const long double ln = std::lgamma(static_cast<long double>(n) + 1.0L);
    for (std::size_t k = 0; k <= n; ++k) {
        const long double kk = static_cast<long double>(k);
        const long double l = ln - std::lgamma(kk + 1.0L) - std::lgamma(static_cast<long double>(n - k) + 1.0L) +
                              kk * lp + static_cast<long double>(n - k) * lq;
        pmf[k] = static_cast<double>(std::exp(l));
    }
    return pmf;
}

BinomialBounds binomial_bounds(std::size_t n, double p, double tau) {
    BinomialBounds out;
    const double nd = static_cast<double>(n);
    const double d = p * nd;
    out.in_regime = 50.0 / nd < p && p < 0.1 && tau > std::numbers::e;
    const auto pmf = binomial_pmf(n, p);
    long double tail = 0.0L, window = 0.0L;
    const double cut = (tau + 1.0) * d;
    for (std::size_t k = n + 1; k-- > 0;) {
        const double kd = static_cast<double>(k);
        if (kd > cut) tail += pmf[k];
        if (kd >= d / 8.0 && kd <= 8.0 * d) window += pmf[k];
    }
    out.exact_tail = static_cast<double>(tail);
    out.exact_window = static_cast<double>(std::min(window, 1.0L));
    out.upper_bound = std::exp(-tau * std::log(tau / std::numbers::e) * d);
    out.window_bound = 1.0 - std::pow(1.0 - p, nd / 2.0);
    return out;
}

bool e_sum_holds(const MatrixSample& m, const DiscreteLaw& law) {
    const std::size_t n = m.n;
    double amax = 0.0;
    for (double a : law.support_double()) amax = std::max(amax, std::abs(a));
    // Threshold in integer units: C_sum p n * scale * denominator.
    const double limit = 10.0 * amax * law.p() * static_cast<double>(n) * law.scale_double() *
                         static_cast<double>(m.denominator);
    std::vector<std::int64_t> l1(n, 0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) l1[j] += std::abs(m.entries(i, j) - m.b_level);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return l1[a] > l1[b]; });
    for (std::size_t a = 0; a < n; ++a) {
        // |C_i - C_j|_1 <= |C_i|_1 + |C_j|_1; sorted, so later pairs cannot exceed the limit either.
        if (a + 1 < n && static_cast<double>(l1[order[a]] + l1[order[a + 1]]) <= limit) break;
        for (std::size_t c = a + 1; c < n; ++c) {
            const std::size_t i = order[a], j = order[c];
            if (static_cast<double>(l1[i] + l1[j]) <= limit) break;
            std::int64_t diff = 0;
            for (std::size_t r = 0; r < n; ++r) diff += std::abs(m.entries(r, i) - m.entries(r, j));
            if (static_cast<double>(diff) > limit) return false;
        }
    }
    return true;
}

std::vector<std::size_t> support_counts(const MatrixSample& m) {
    std::vector<std::size_t> counts(m.n, 0);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j)
            if (m.entries(i, j) != m.b_level) ++counts[j];
    return counts;
}

bool e_col_holds(const MatrixSample& m, const std::vector<std::size_t>& J1, const std::vector<std::size_t>& J2) {
    bool have_clean = false, have_single = false;
    for (std::size_t i = 0; i < m.n; ++i) {
        std::size_t in1 = 0, in2 = 0;
        for (auto j : J1) in1 += m.entries(i, j) != m.b_level;
        for (auto j : J2) in2 += m.entries(i, j) != m.b_level;
        if (in2 != 0) continue;
        if (in1 == 0) have_clean = true;
        else if (in1 == 1) have_single = true;
        if (have_clean && have_single) return true;
    }
    return false;
}

std::vector<std::size_t> incidence_set(const MatrixSample& m, const std::vector<std::size_t>& J) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.n / 2; ++i) {
        std::size_t hits = 0;
        for (auto j : J) hits += m.delta(i, j);
        if (hits == 1) out.push_back(i);
    }
    return out;
}

}  // namespace rsing
