#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rsing/distribution.hpp"
#include "rsing/rng.hpp"

namespace rsing {

// C^2 cutoff: 1/K2 below 1/(2 K2), identity above 1/K2, quintic Hermite blend between.
class CutoffFn {
public:
    double K2() const noexcept { return k2_; }
    double operator()(double t) const noexcept;
    double derivative(double t) const noexcept;
    double second_derivative(double t) const noexcept;
    // Knots of the blend interval.
    double left() const noexcept { return 0.5 / k2_; }
    double right() const noexcept { return 1.0 / k2_; }

private:
    friend CutoffFn make_cutoff(double K2);
    double k2_ = 2.0;
};

// Throws InvalidArgument for K2 < 2 and SandwichViolation if the blend leaves [t, 1/K2]
// on a 10^4-point grid.
CutoffFn make_cutoff(double K2);

struct RudOptions {
    // Panel width as a multiple of 1/L, L the Lipschitz bound of the integrand.
    double panel_factor = 0.5;
    double t_max = 1e6;
    // Stops the search after this many panels; the estimate is then censored.
    std::uint64_t max_panels = 200000;
    std::uint64_t max_sequences = 2000000;
    // rud_estimate only: enumerate every sequence instead of sampling.
    bool exhaustive = false;
};

struct RudEstimate {
    double value = 0.0;
    double K1 = 0.0, K2 = 0.0;
    std::size_t m = 0;
    std::vector<std::pair<double, double>> integral_curve;  // (t, F(t))
    std::uint64_t sequences_sampled = 0;
    double std_error = 0.0;
    bool censored = false;  // F(t_max) <= K1; value is t_max
};

// Number of ordered sequences of m disjoint floor(n/m)-subsets of [n].
double sequence_count(std::size_t n, std::size_t m);

// Exact average over every sequence.
RudEstimate rud_exact(const std::vector<double>& y, const DiscreteLaw& law, std::size_t m, double K1, double K2,
                      const RudOptions& options = {});

// Monte Carlo over uniformly random sequences (or all of them with options.exhaustive).
RudEstimate rud_estimate(const std::vector<double>& y, const DiscreteLaw& law, std::size_t m, double K1, double K2,
                         std::uint64_t n_sequences, RngStream& stream, const RudOptions& options = {});

// Largest fraction of samples within distance t of one sample point.
double levy_estimate(std::vector<double> samples, double t);
double levy_estimate(const std::vector<std::vector<double>>& samples, double t);

struct SmallBallResult {
    double lhs = 0.0;
    double rhs_scale = 0.0;
    double ud = 0.0;
};

struct SmallBallOptions {
    std::uint64_t draws = 20000;
    std::uint64_t n_sequences = 200;
    double K1 = 10.0;
    double K2 = 8.0;
    RudOptions rud;
};

// lhs: Levy estimate of sum_i v_i Y_i at radius sqrt(m) tau, Y_i = X_i xi_i + b (normalized view),
// X uniform over 0/1 masks with exactly m ones. rhs_scale = tau + 1 / UD(v).
SmallBallResult small_ball_check(const std::vector<double>& v, const DiscreteLaw& law, std::size_t m, double tau,
                                 RngStream& stream, const SmallBallOptions& options = {});

struct ZetaAtom {
    double value = 0.0;
    double mass = 0.0;
};

struct DistanceKernelResult {
    double empirical_prob = 0.0;
    double f_bound = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t total = 0;
};

// max(1/(k h), eps/(s h), eps, s/k), h = h2 - h1.
double distance_kernel_bound(double s, double k, double h1, double h2, double eps);

// X uniform on (1/k)Z in [h1, h2]; counts X with E_zeta dist(zeta s X, Z) <= eps.
// trials == 0 enumerates the whole grid.
DistanceKernelResult distance_kernel_check(const std::vector<ZetaAtom>& zeta, double s, long k, double h1, double h2,
                                           double eps, std::uint64_t trials, RngStream& stream);

}  // namespace rsing
