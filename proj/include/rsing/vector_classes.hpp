#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rsing/distribution.hpp"
#include "rsing/rng.hpp"

namespace rsing {

// Calibration constants the analysis leaves unspecified.
struct Calibration {
    double r = 0.25;
    double delta = 0.08;
    double rho = 0.1;
    double C_tau = 1.0;
    double C0 = 1.0;
    double C1_prime = 1.0;  // steep-norm constant for T1
    double C2_prime = 1.0;  // steep-norm constant for T2, T3 and the complement
};

struct DecompositionParams {
    std::size_t n = 0;
    double p = 0.0;
    double d = 0.0;
    double r = 0.0, delta = 0.0, rho = 0.0, C_tau = 0.0, C0 = 0.0;
    long l0 = 0;
    int s0 = 0;
    std::vector<std::size_t> n_grid;  // n_0 .. n_{s0+3}
    double kappa = 0.0;
    double C1 = 0.0;
    std::optional<double> C2;
    double gamma = 0.0;

    // Threshold factor of T11: C2 * n, or gamma * d when b = 0.
    double t11_factor() const { return C2 ? *C2 * static_cast<double>(n) : gamma * d; }
    std::size_t rn() const { return static_cast<std::size_t>(r * static_cast<double>(n)); }
    // Upper end of the R scan: floor(n / ln^2 d).
    std::size_t r_scan_max() const;
};

// Throws OutOfRegime when l0 < 2, s0 does not exist or the grid is not ordered.
DecompositionParams derive_params(std::size_t n, double p, const SupportConstants& sc, const Calibration& cal);
DecompositionParams derive_params(std::size_t n, double p, const DiscreteLaw& law, const Calibration& cal);

// Like derive_params, but clamps l0 >= 2, s0 >= 1 and forces an ordered grid instead of throwing.
// in_regime reports whether the unclamped derivation succeeded.
DecompositionParams derive_params_relaxed(std::size_t n, double p, const SupportConstants& sc, const Calibration& cal,
                                          bool& in_regime);

struct Rearrangement {
    std::vector<double> sorted_abs;
    std::vector<std::size_t> perm;  // |x[perm[j]]| == sorted_abs[j]; ties by lowest index
};

Rearrangement rearrange(const std::vector<double>& x);

// (2t)^1.5 for t < 64d, exp(ln^2(2t)) for t >= 64d.
double growth_g(double t, double d);

enum class VectorClass { Vn, T0, T1, T2, T3, R1, R2, Unclassified };

const char* to_string(VectorClass c) noexcept;

struct VectorLabel {
    VectorClass cls = VectorClass::Unclassified;
    int j = 0;          // T1 subclass index
    std::size_t k = 0;  // R window start (1-based)
    double ratio = 0.0; // steep: x*_{a} / x*_{b}; R: |x_A|_2 / |x_A|_inf
    double norm_a = 0.0;  // R: |x_A|_2
    std::vector<std::size_t> q1, q2;  // Vn witness
    std::size_t violated_index = 0;   // 1-based index of the first failed gradual bound, 0 if none

    bool steep() const {
        return cls == VectorClass::T0 || cls == VectorClass::T1 || cls == VectorClass::T2 || cls == VectorClass::T3;
    }
    bool spread() const { return cls == VectorClass::R1 || cls == VectorClass::R2; }
    std::string name() const;
    std::string witness_summary() const;
};

struct ClassifyOptions {
    // Scan every k of the R window instead of a geometric subsequence (ratio 1.1).
    bool exhaustive_r = false;
};

struct VnCheck {
    bool gradual = false;
    bool nonconstant = false;
    std::size_t violated_index = 0;
    std::vector<std::size_t> q1, q2;
    bool member() const { return gradual && nonconstant; }
};

// x must already satisfy x*_{floor(rn)} = 1.
VnCheck check_vn(const std::vector<double>& x, const DecompositionParams& params);

// Rescales x so that x*_{floor(rn)} = 1; throws ZeroScaleEntry if that entry is 0.
std::vector<double> normalize_upsilon(const std::vector<double>& x, const DecompositionParams& params);

// Steep chain, then R, then Vn, else Unclassified.
VectorLabel classify(const std::vector<double>& x, const DecompositionParams& params, const ClassifyOptions& options = {});

// Steep chain and R only; Unclassified when neither applies.
VectorLabel classify_structured(const std::vector<double>& normalized, const DecompositionParams& params,
                                const ClassifyOptions& options = {});

struct SteepNormCheck {
    double ratio = 0.0;
    double bound = 0.0;
    std::size_t anchor = 0;  // 1-based
    bool holds = false;
};

// |x|_2 / x*_anchor against the class bound; labels outside T count as the complement.
SteepNormCheck steep_norm_ratio_check(const std::vector<double>& x, const VectorLabel& label,
                                      const DecompositionParams& params, const Calibration& cal);

struct LambdaSpec {
    std::size_t n = 0;
    long k = 1;
    double d = 1.0;  // growth function parameter
    std::vector<std::size_t> q1, q2;
    double rho = 0.0;
    std::vector<std::size_t> sigma;  // coordinate sigma[i] carries the bound g(n / (i + 1))
    double h = 0.0;
};

bool lambda_admissible(const LambdaSpec& spec);
bool lambda_member(const LambdaSpec& spec, const std::vector<double>& x);
// Throws EmptyLambda if h is not admissible or a coordinate grid is empty.
std::vector<double> sample_lambda(const LambdaSpec& spec, RngStream& stream);

enum class Generator { HeavyTailed, Lattice, NearConstant, Steep, Gradual };
const char* to_string(Generator g) noexcept;

std::vector<double> generate_vector(Generator g, const DecompositionParams& params, RngStream& stream);

struct CoverageCandidate {
    std::string generator;
    std::uint64_t trial = 0;
    std::string summary;
};

struct CoverageGeneratorStats {
    std::string generator;
    std::uint64_t sampled = 0;
    std::uint64_t vn = 0;
    std::uint64_t covered = 0;  // remainder labeled R or T
    std::uint64_t steep = 0;
    std::uint64_t spread = 0;
};

struct CoverageReport {
    std::vector<CoverageGeneratorStats> per_generator;
    std::uint64_t remainder = 0;
    std::uint64_t covered = 0;
    std::vector<CoverageCandidate> counterexamples;
    double covered_fraction() const { return remainder ? static_cast<double>(covered) / remainder : 1.0; }
};

struct CoverageTrial {
    std::size_t generator = 0;  // index into the mixed generator list
    std::uint64_t sampled = 0;
    std::uint64_t vn = 0;
    bool found = false;  // a non-Vn vector was drawn
    VectorLabel label;
    std::string summary;
};

// One trial: draws from mixed generator `generator` (0..2) until a non-Vn vector appears, then classifies it.
CoverageTrial coverage_trial(const DecompositionParams& params, std::size_t generator, RngStream& rng,
                             const ClassifyOptions& options = {});

const char* mixed_generator_name(std::size_t i) noexcept;

// Draws from the mixed generators (heavy-tailed, lattice, near-constant) until `trials`
// non-Vn vectors were seen, and reports how many fall into R or T.
CoverageReport coverage_check(const DecompositionParams& params, std::uint64_t trials, const RngStream& stream,
                              const ClassifyOptions& options = {}, std::size_t max_listed = 50);

// One vector per line, whitespace-separated decimals.
std::vector<std::vector<double>> read_vector_batch(std::istream& in);

}  // namespace rsing
