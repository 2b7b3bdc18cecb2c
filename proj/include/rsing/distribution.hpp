#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace rsing {

/// Parses an exact rational from "num/den", an integer, or a finite decimal ("-1.25").
mpq_class parse_rational(std::string_view text);

struct Atom {
    mpq_class value;
    double mass = 0.0;
};

/// A raw probability mass function over exact rational values.
struct RawPmf {
    std::string name;
    std::vector<Atom> atoms;

    /// Masses sum to 1 within 1e-12, all positive, values pairwise distinct.
    void validate() const;

    /// Law file: "name: <id>" plus one "num/den : mass" line per atom; '#' starts a comment.
    static RawPmf parse(std::istream& in);
    static RawPmf load(const std::filesystem::path& path);
};

struct StandardizeOptions {
    /// Single-atom pmfs yield a p = 0 law instead of DegenerateLaw.
    bool allow_degenerate = false;
    /// Mode ties raise AmbiguousMode instead of picking the smallest value.
    bool reject_ambiguous_mode = false;
};

/// A biased discrete law written as eta = delta * (scale * xi) + b, delta ~ Bernoulli(p),
/// where xi takes the normalized values support[i] (max |support[i]| == 1) with masses[i].
class DiscreteLaw {
public:
    const std::string& name() const noexcept { return name_; }
    const mpq_class& b() const noexcept { return b_; }
    double p() const noexcept { return p_; }
    const std::vector<mpq_class>& support() const noexcept { return support_; }
    const std::vector<double>& masses() const noexcept { return masses_; }
    const mpq_class& scale() const noexcept { return scale_; }
    /// LCM of the denominators of every eta value; eta * denominator is always an integer.
    std::int64_t denominator() const noexcept { return denominator_; }
    bool degenerate() const noexcept { return support_.empty(); }

    double b_double() const noexcept { return b_d_; }
    double scale_double() const noexcept { return scale_d_; }
    const std::vector<double>& support_double() const noexcept { return support_d_; }

    /// Actual eta value of the i-th xi atom: scale * support[i] + b.
    mpq_class eta_value(std::size_t i) const { return scale_ * support_[i] + b_; }

    /// Integer-scaled eta values: index 0 is the mode b, index i+1 the i-th xi atom.
    const std::vector<std::int64_t>& scaled_levels() const noexcept { return levels_; }
    /// Probabilities matching scaled_levels().
    const std::vector<double>& level_masses() const noexcept { return level_masses_; }

    /// E[xi] in the normalized view.
    double xi_mean() const noexcept;
    /// E[eta] in actual units: p * scale * E[xi] + b.
    double eta_mean() const noexcept;

private:
    friend DiscreteLaw standardize(const RawPmf& raw, const StandardizeOptions& options);

    std::string name_;
    mpq_class b_;
    double p_ = 0.0;
    std::vector<mpq_class> support_;
    std::vector<double> masses_;
    mpq_class scale_{1};
    std::int64_t denominator_ = 1;

    double b_d_ = 0.0;
    double scale_d_ = 1.0;
    std::vector<double> support_d_;
    std::vector<std::int64_t> levels_;
    std::vector<double> level_masses_;
};

DiscreteLaw standardize(const RawPmf& raw, const StandardizeOptions& options = {});

/// Convenience: load + standardize.
DiscreteLaw load_law(const std::filesystem::path& path, const StandardizeOptions& options = {});

/// P(eta' = eta) for an independent copy eta'.
double collision_probability(const DiscreteLaw& law);

/// P(eta = 0).
double zero_mass(const DiscreteLaw& law);

/// Constants of the steep-vector analysis, all in the normalized view (eta / scale).
struct SupportConstants {
    double a = 0.0;           // min |a_i|
    double a_bar = 0.0;       // min_{i != j} |a_i - a_j|, +inf for a single atom
    double a_prime = 0.0;     // min |r| over nonzero atoms of eta
    double a_dprime = 0.0;    // max |r| over atoms of eta
    double c_sum = 0.0;       // 10 * max |a_i|
    double c1 = 0.0;          // a' / (2 a'')
    std::optional<double> c2; // 2 a'' (|b| + a'') / (|b| a_bar); empty when b == 0
    double gamma = 0.0;       // min(2 c_sum / a, 2 c_sum / a_bar)
};

SupportConstants support_constants(const DiscreteLaw& law);

/// C2 from its ingredients; throws BiasZero when b == 0.
double steep_constant_c2(double a_dprime, double b, double a_bar);

/// Characteristic function of xi (normalized view) at frequency u: sum_j p_j exp(2 pi i a_j u).
std::complex<double> characteristic_function(const DiscreteLaw& law, double u);

}  // namespace rsing
