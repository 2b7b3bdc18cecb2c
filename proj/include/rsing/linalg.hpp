#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <gmpxx.h>

#include "rsing/distribution.hpp"
#include "rsing/rng.hpp"
#include "rsing/sampling.hpp"

namespace rsing {

struct RankResult {
    std::size_t rank = 0;
    bool is_singular = false;
    // (original row, original column) of each pivot, in elimination order.
    std::vector<std::pair<std::size_t, std::size_t>> pivot_log;
    int overflow_promotions = 0;
};

// Rank over Q by fraction-free elimination with full pivoting on magnitude.
// Runs on 64-bit integers and restarts on GMP integers if an intermediate overflows.
// is_singular means rank < min(rows, cols).
RankResult exact_rank(const IntMatrix& m);
RankResult exact_rank(const MatrixSample& m);

struct SvEstimate {
    double value = 0.0;
    double relative_error_bound = 0.0;
    // Value clears 1e-12 * ||M||, so the matrix is nonsingular without an exact check.
    bool certified_positive = false;
};

SvEstimate smallest_singular_value(const Eigen::MatrixXd& m);

// Largest singular value of M - EM, EM = E[eta] * ones.
double spectral_norm_deviation(const MatrixSample& m, const DiscreteLaw& law);
double spectral_norm(const Eigen::MatrixXd& m);

// Distance from column i to the span of the other columns.
double column_distance(const Eigen::MatrixXd& m, std::size_t i);

// sqrt(|x_orth|^2 + p n |x_par|^2), x_par the component along (1,...,1)/sqrt(n).
double e_norm(const std::vector<double>& x, double p);

// log10 of the Hadamard bound prod_j |C_j|; -inf if a column is zero.
double log10_hadamard_bound(const Eigen::MatrixXd& m);

struct ScreenOptions {
    double threshold = 1e-8;
    double audit_fraction = 0.01;
};

struct FloatScreen {
    // |det| / Hadamard bound from a partial-pivot LU; 0 for a zero column.
    double ratio = 0.0;
    bool positive = false;
};

FloatScreen float_screen(const Eigen::MatrixXd& m, double threshold);

struct SingularityDecision {
    bool singular = false;
    bool screen_positive = false;
    bool exact_checked = false;
    bool audited = false;
    int overflow_promotions = 0;
};

// Float screen, exact confirmation of positives, exact audit of a random fraction of negatives.
// The audit coin is drawn from audit_rng. Throws AuditFailure if an audited negative is singular.
SingularityDecision decide_singularity(const MatrixSample& m, const ScreenOptions& options, RngStream& audit_rng);

struct ExactKernel {
    // Integer kernel vector with gcd 1 and positive first nonzero entry.
    std::vector<mpz_class> vector;
    std::size_t dimension = 0;
};

// Lexicographically first basis vector of the right kernel of m (rows x cols).
ExactKernel exact_kernel(const IntMatrix& m);

// Kernel of the transpose of columns 1..n-1 (0-based): the normal to the span of C_2, ..., C_n.
ExactKernel normal_to_trailing_columns(const IntMatrix& m);

std::vector<double> to_double_unit_max(const std::vector<mpz_class>& v);

}  // namespace rsing
