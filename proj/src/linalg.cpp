#include "rsing/linalg.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <Eigen/SVD>

#include "rsing/errors.hpp"

namespace rsing {

namespace {

struct Overflow {};

std::int64_t abs64(std::int64_t v) { return v < 0 ? -v : v; }

// Bareiss with full pivoting. Number is std::int64_t (throws Overflow) or mpz_class.
template <class Number>
RankResult bareiss(const IntMatrix& in) {
    const std::size_t rows = in.rows, cols = in.cols;
    std::vector<Number> a(in.data.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = Number(static_cast<long>(in.data[k]));
    std::vector<std::size_t> rperm(rows), cperm(cols);
    std::iota(rperm.begin(), rperm.end(), 0);
    std::iota(cperm.begin(), cperm.end(), 0);
    auto at = [&](std::size_t i, std::size_t j) -> Number& { return a[i * cols + j]; };

    RankResult res;
    Number prev = Number(1);
    const std::size_t steps = std::min(rows, cols);
    for (std::size_t k = 0; k < steps; ++k) {
        std::size_t pi = k, pj = k;
        Number best = Number(0);
        for (std::size_t i = k; i < rows; ++i) {
            for (std::size_t j = k; j < cols; ++j) {
                Number mag;
                if constexpr (std::is_same_v<Number, std::int64_t>) mag = abs64(at(i, j));
                else mag = abs(at(i, j));
                if (mag > best) {
                    best = mag;
                    pi = i;
                    pj = j;
                }
            }
        }
        if (best == 0) break;
        if (pi != k) {
            for (std::size_t j = 0; j < cols; ++j) std::swap(at(k, j), at(pi, j));
            std::swap(rperm[k], rperm[pi]);
        }
        if (pj != k) {
            for (std::size_t i = 0; i < rows; ++i) std::swap(at(i, k), at(i, pj));
            std::swap(cperm[k], cperm[pj]);
        }
        res.pivot_log.emplace_back(rperm[k], cperm[k]);
        ++res.rank;
        const Number piv = at(k, k);
        for (std::size_t i = k + 1; i < rows; ++i) {
            const Number lead = at(i, k);
            for (std::size_t j = k + 1; j < cols; ++j) {
                if constexpr (std::is_same_v<Number, std::int64_t>) {
                    const __int128 num = static_cast<__int128>(piv) * at(i, j) - static_cast<__int128>(lead) * at(k, j);
                    const __int128 q = num / prev;
                    if (q > std::numeric_limits<std::int64_t>::max() || q < -std::numeric_limits<std::int64_t>::max()) {
                        throw Overflow{};
                    }
                    at(i, j) = static_cast<std::int64_t>(q);
                } else {
                    Number num = piv * at(i, j) - lead * at(k, j);
                    mpz_divexact(at(i, j).get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
                }
            }
            at(i, k) = Number(0);
        }
        prev = piv;
    }
    res.is_singular = res.rank < steps;
    return res;
}

}  // namespace

RankResult exact_rank(const IntMatrix& m) {
    for (auto v : m.data) {
        if (v == std::numeric_limits<std::int64_t>::min()) {
            auto r = bareiss<mpz_class>(m);
            r.overflow_promotions = 1;
            return r;
        }
    }
    try {
        return bareiss<std::int64_t>(m);
    } catch (const Overflow&) {
        auto r = bareiss<mpz_class>(m);
        r.overflow_promotions = 1;
        return r;
    }
}

RankResult exact_rank(const MatrixSample& m) { return exact_rank(m.entries); }

namespace {

void check_finite(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) fail(ErrorCode::NonFinite, "matrix has NaN or infinite entries");
}

}  // namespace

SvEstimate smallest_singular_value(const Eigen::MatrixXd& m) {
    check_finite(m);
    SvEstimate out;
    if (m.size() == 0) return out;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    out.value = s(s.size() - 1);
    const double eps = std::numeric_limits<double>::epsilon();
    const double n = static_cast<double>(std::max(m.rows(), m.cols()));
    out.relative_error_bound = out.value > 0 ? n * eps * smax / out.value : std::numeric_limits<double>::infinity();
    out.certified_positive = smax > 0 && out.value >= 1e-12 * smax;
    return out;
}

double spectral_norm(const Eigen::MatrixXd& m) {
    check_finite(m);
    if (m.size() == 0) return 0.0;
    if (m.rows() <= 16) return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
    return Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

double spectral_norm_deviation(const MatrixSample& m, const DiscreteLaw& law) {
    Eigen::MatrixXd d = m.to_double();
    d.array() -= law.eta_mean();
    return spectral_norm(d);
}

double column_distance(const Eigen::MatrixXd& m, std::size_t i) {
    const Eigen::Index n = m.cols();
    if (n < 2) fail(ErrorCode::InvalidArgument, "column_distance needs at least two columns");
    const auto col = static_cast<Eigen::Index>(i);
    Eigen::MatrixXd others(m.rows(), n - 1);
    others << m.leftCols(col), m.rightCols(n - 1 - col);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(others);
    const Eigen::VectorXd y = qr.householderQ().transpose() * m.col(col);
    const Eigen::Index r = qr.rank();
    return y.tail(m.rows() - r).norm();
}

double e_norm(const std::vector<double>& x, double p) {
    const double n = static_cast<double>(x.size());
    if (x.empty()) return 0.0;
    double sum = 0.0, sq = 0.0;
    for (double v : x) {
        sum += v;
        sq += v * v;
    }
    const double par2 = sum * sum / n;
    const double orth2 = std::max(0.0, sq - par2);
    return std::sqrt(orth2 + p * n * par2);
}

double log10_hadamard_bound(const Eigen::MatrixXd& m) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double c = m.col(j).norm();
        if (c == 0.0) return -std::numeric_limits<double>::infinity();
        acc += std::log10(c);
    }
    return acc;
}

FloatScreen float_screen(const Eigen::MatrixXd& m, double threshold) {
    FloatScreen out;
    const double hb = log10_hadamard_bound(m);
    if (!std::isfinite(hb)) {
        out.positive = true;
        return out;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    const auto& u = lu.matrixLU();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        const double d = std::abs(u(i, i));
        if (d == 0.0) {
            out.positive = true;
            return out;
        }
        logdet += std::log10(d);
    }
    out.ratio = std::pow(10.0, logdet - hb);
    out.positive = out.ratio <= threshold;
    return out;
}

SingularityDecision decide_singularity(const MatrixSample& m, const ScreenOptions& options, RngStream& audit_rng) {
    SingularityDecision d;
    const auto screen = float_screen(m.to_double(), options.threshold);
    d.screen_positive = screen.positive;
    const bool audit = audit_rng.uniform() < options.audit_fraction;
    if (screen.positive) {
        const auto r = exact_rank(m);
        d.singular = r.is_singular;
        d.exact_checked = true;
        d.overflow_promotions = r.overflow_promotions;
        return d;
    }
    if (audit) {
        const auto r = exact_rank(m);
        d.exact_checked = true;
        d.audited = true;
        d.overflow_promotions = r.overflow_promotions;
        if (r.is_singular) {
            fail(ErrorCode::AuditFailure, "sample " + m.seed_path + " screened nonsingular but is exactly singular");
        }
    }
    return d;
}

ExactKernel exact_kernel(const IntMatrix& in) {
    const std::size_t rows = in.rows, cols = in.cols;
    std::vector<mpz_class> a(in.data.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = static_cast<long>(in.data[k]);
    auto at = [&](std::size_t i, std::size_t j) -> mpz_class& { return a[i * cols + j]; };

    // Fraction-free forward elimination, partial pivoting (first nonzero), columns in order.
    std::vector<std::size_t> pivot_cols;
    mpz_class prev = 1;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = rows;
        for (std::size_t i = r; i < rows; ++i) {
            if (at(i, c) != 0) {
                piv = i;
                break;
            }
        }
        if (piv == rows) continue;
        if (piv != r)
            for (std::size_t j = 0; j < cols; ++j) std::swap(at(r, j), at(piv, j));
        for (std::size_t i = r + 1; i < rows; ++i) {
            for (std::size_t j = c + 1; j < cols; ++j) {
                mpz_class num = at(r, c) * at(i, j) - at(i, c) * at(r, j);
                mpz_divexact(at(i, j).get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
            }
            at(i, c) = 0;
        }
        prev = at(r, c);
        pivot_cols.push_back(c);
        ++r;
    }

    ExactKernel out;
    out.dimension = cols - pivot_cols.size();
    if (out.dimension == 0) return out;

    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivot_cols) is_pivot[c] = true;
    std::size_t free_col = 0;
    while (is_pivot[free_col]) ++free_col;

    // Rational back-substitution with x_free = 1 and the other free variables 0.
    std::vector<mpq_class> x(cols, 0);
    x[free_col] = 1;
    for (std::size_t k = pivot_cols.size(); k-- > 0;) {
        const std::size_t c = pivot_cols[k];
        mpq_class acc = 0;
        for (std::size_t j = c + 1; j < cols; ++j) {
            if (x[j] != 0) acc += mpq_class(at(k, j)) * x[j];
        }
        x[c] = -acc / mpq_class(at(k, c));
        x[c].canonicalize();
    }

    mpz_class l = 1;
    for (const auto& v : x) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den_mpz_t());
    out.vector.resize(cols);
    mpz_class g = 0;
    for (std::size_t j = 0; j < cols; ++j) {
        mpq_class s = x[j] * l;
        s.canonicalize();
        out.vector[j] = s.get_num();
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), out.vector[j].get_mpz_t());
    }
    int sign = 0;
    for (const auto& v : out.vector) {
        if (v != 0) {
            sign = sgn(v);
            break;
        }
    }
    if (sign < 0) g = -g;
    for (auto& v : out.vector) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
    return out;
}

ExactKernel normal_to_trailing_columns(const IntMatrix& m) {
    if (m.cols < 2) fail(ErrorCode::InvalidArgument, "need at least two columns");
    IntMatrix sys(m.cols - 1, m.rows);
    for (std::size_t j = 1; j < m.cols; ++j)
        for (std::size_t i = 0; i < m.rows; ++i) sys(j - 1, i) = m(i, j);
    return exact_kernel(sys);
}

std::vector<double> to_double_unit_max(const std::vector<mpz_class>& v) {
    mpz_class mx = 0;
    for (const auto& x : v)
        if (abs(x) > mx) mx = abs(x);
    std::vector<double> out(v.size(), 0.0);
    if (mx == 0) return out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        mpq_class q(v[i], mx);
        q.canonicalize();
        out[i] = q.get_d();
    }
    return out;
}

}  // namespace rsing
