#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsing/distribution.hpp"
#include "rsing/rng.hpp"

namespace rsing {

// Dense row-major integer matrix.
struct IntMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> data;

    IntMatrix() = default;
    IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}
    static IntMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);

    std::int64_t& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    std::int64_t operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    IntMatrix transpose() const;
    bool operator==(const IntMatrix&) const = default;
};

// One n x n draw. entries hold eta * denominator, so entry / denominator is the exact value.
struct MatrixSample {
    std::size_t n = 0;
    IntMatrix entries;
    std::vector<std::uint8_t> delta_mask;
    std::int64_t denominator = 1;
    std::int64_t b_level = 0;
    std::uint64_t seed = 0;
    std::string seed_path;
    std::string law_id;

    bool delta(std::size_t i, std::size_t j) const { return delta_mask[i * n + j] != 0; }
    Eigen::MatrixXd to_double() const;
};

MatrixSample sample_matrix(const DiscreteLaw& law, std::size_t n, RngStream& stream);

// Index into law.scaled_levels(): 0 is the mode, i + 1 the i-th xi atom.
std::size_t sample_level(const DiscreteLaw& law, RngStream& stream);

// Header "n seed law_id", then one row of integers per line.
void write_matrix_dump(std::ostream& out, const MatrixSample& m);
MatrixSample read_matrix_dump(std::istream& in);

}  // namespace rsing
