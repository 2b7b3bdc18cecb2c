#include "rsing/sampling.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "rsing/errors.hpp"

namespace rsing {

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
    IntMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (rows[i].size() != m.cols) fail(ErrorCode::InvalidArgument, "ragged matrix rows");
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Eigen::MatrixXd MatrixSample::to_double() const {
    Eigen::MatrixXd out(entries.rows, entries.cols);
    const double inv = 1.0 / static_cast<double>(denominator);
    for (std::size_t i = 0; i < entries.rows; ++i)
        for (std::size_t j = 0; j < entries.cols; ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(entries(i, j)) * inv;
    return out;
}

std::size_t sample_level(const DiscreteLaw& law, RngStream& stream) {
    const auto& w = law.level_masses();
    double u = stream.uniform();
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (u < w[i]) return i;
        u -= w[i];
    }
    return w.size() - 1;
}

MatrixSample sample_matrix(const DiscreteLaw& law, std::size_t n, RngStream& stream) {
    MatrixSample m;
    m.n = n;
    m.entries = IntMatrix(n, n);
    m.delta_mask.assign(n * n, 0);
    m.denominator = law.denominator();
    m.b_level = law.scaled_levels()[0];
    m.seed = stream.root_seed();
    m.seed_path = stream.path_string();
    m.law_id = law.name();
    const auto& levels = law.scaled_levels();
    for (std::size_t k = 0; k < n * n; ++k) {
        const std::size_t idx = sample_level(law, stream);
        m.entries.data[k] = levels[idx];
        m.delta_mask[k] = idx != 0;
    }
    return m;
}

void write_matrix_dump(std::ostream& out, const MatrixSample& m) {
    out << m.n << ' ' << m.seed << ' ' << (m.law_id.empty() ? "-" : m.law_id) << '\n';
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.n; ++j) {
            if (j) out << ' ';
            out << m.entries(i, j);
        }
        out << '\n';
    }
}

MatrixSample read_matrix_dump(std::istream& in) {
    MatrixSample m;
    if (!(in >> m.n >> m.seed >> m.law_id)) fail(ErrorCode::InvalidArgument, "bad matrix dump header");
    m.entries = IntMatrix(m.n, m.n);
    for (auto& v : m.entries.data) {
        if (!(in >> v)) fail(ErrorCode::InvalidArgument, "truncated matrix dump");
    }
    m.delta_mask.assign(m.n * m.n, 0);
    return m;
}

}  // namespace rsing
