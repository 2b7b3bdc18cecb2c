#include "rsing/rud.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <numeric>

#include "rsing/errors.hpp"

namespace rsing {

double CutoffFn::operator()(double t) const noexcept {
    const double a = left(), h = left();
    if (t <= a) return 1.0 / k2_;
    if (t >= right()) return t;
    const double s = (t - a) / h;
    return 1.0 / k2_ + h * s * s * s * (-4.0 + s * (7.0 - 3.0 * s));
}

double CutoffFn::derivative(double t) const noexcept {
    const double a = left(), h = left();
    if (t <= a) return 0.0;
    if (t >= right()) return 1.0;
    const double s = (t - a) / h;
    return s * s * (-12.0 + s * (28.0 - 15.0 * s));
}

double CutoffFn::second_derivative(double t) const noexcept {
    const double a = left(), h = left();
    if (t <= a || t >= right()) return 0.0;
    const double s = (t - a) / h;
    return s * (-24.0 + s * (84.0 - 60.0 * s)) / h;
}

CutoffFn make_cutoff(double K2) {
    if (!(K2 >= 2.0) || !std::isfinite(K2)) fail(ErrorCode::InvalidArgument, "K2 must be finite and >= 2");
    CutoffFn psi;
    psi.k2_ = K2;
    const int grid = 10000;
    for (int i = 0; i <= grid; ++i) {
        const double t = psi.left() + (psi.right() - psi.left()) * i / grid;
        const double v = psi(t);
        if (v > 1.0 / K2 + 1e-15 || v < t - 1e-15) {
            fail(ErrorCode::SandwichViolation, "cutoff leaves [t, 1/K2] at t = " + std::to_string(t));
        }
    }
    return psi;
}

double sequence_count(std::size_t n, std::size_t m) {
    if (m == 0 || m > n) return 0.0;
    const std::size_t k = n / m;
    // n! / ((k!)^m (n - k m)!)
    double lg = std::lgamma(n + 1.0) - static_cast<double>(m) * std::lgamma(k + 1.0) - std::lgamma(n - k * m + 1.0);
    return std::round(std::exp(lg));
}

namespace {

constexpr std::array<double, 10> kGlNodes = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472, -0.1488743389816312,
    0.1488743389816312,  0.4333953941292472,  0.6794095682990244,  0.8650633666889845,  0.9739065285171717};
constexpr std::array<double, 10> kGlWeights = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820, 0.2692667193099963, 0.2955242247147529,
    0.2955242247147529, 0.2692667193099963, 0.2190863625159820, 0.1494513491505806, 0.0666713443086881};

class Integrand {
public:
    Integrand(const std::vector<double>& y, const DiscreteLaw& law, std::size_t m, double K2,
              std::vector<std::vector<std::uint32_t>> seqs)
        : y_(y), a_(law.support_double()), w_(law.masses()), m_(m), k_(y.size() / m), psi_(make_cutoff(K2)),
          seqs_(std::move(seqs)) {
        const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
        base_.assign(y.size(), 0.0);
        for (std::size_t i = 0; i < y.size(); ++i)
            for (std::size_t j = 0; j < a_.size(); ++j) {
                const double w = 2.0 * std::numbers::pi * a_[j] * y[i] * inv_sqrt_m;
                if (w == 0.0) {
                    base_[i] += w_[j];
                    continue;
                }
                freq_.push_back(w);
                freq_weight_.push_back(w_[j]);
                freq_coord_.push_back(i);
            }
        mid_re_.resize(freq_.size());
        mid_im_.resize(freq_.size());
        phi_re_.resize(y.size());
        phi_im_.resize(y.size());
        double ymax = 0.0, amax = 0.0;
        for (double v : y) ymax = std::max(ymax, std::abs(v));
        for (double v : a_) amax = std::max(amax, std::abs(v));
        lipschitz_ = 2.0 * std::numbers::pi * std::sqrt(static_cast<double>(m)) * ymax * amax;
    }

    std::size_t sequences() const { return seqs_.size(); }
    double lipschitz() const { return lipschitz_; }

    // f for every sequence at s.
    void eval(double s, std::vector<double>& out) {
        for (std::size_t i = 0; i < y_.size(); ++i) {
            phi_re_[i] = base_[i];
            phi_im_[i] = 0.0;
        }
        for (std::size_t t = 0; t < freq_.size(); ++t) {
            phi_re_[freq_coord_[t]] += freq_weight_[t] * std::cos(freq_[t] * s);
            phi_im_[freq_coord_[t]] += freq_weight_[t] * std::sin(freq_[t] * s);
        }
        products(out);
    }

    // Per-sequence integral over [lo, hi]. Node phases factor as exp(i w mid) exp(i w half x_g);
    // the second factor depends only on the half-width and is cached. Zero frequencies are folded into base_.
    void integrate(double lo, double hi, std::vector<double>& out) {
        out.assign(seqs_.size(), 0.0);
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        const std::size_t terms = freq_.size();
        if (half != cached_half_) {
            node_re_.resize(kGlNodes.size() * terms);
            node_im_.resize(kGlNodes.size() * terms);
            for (std::size_t g = 0; g < kGlNodes.size(); ++g)
                for (std::size_t t = 0; t < terms; ++t) {
                    const double ang = freq_[t] * half * kGlNodes[g];
                    node_re_[g * terms + t] = std::cos(ang);
                    node_im_[g * terms + t] = std::sin(ang);
                }
            cached_half_ = half;
        }
        for (std::size_t t = 0; t < terms; ++t) {
            mid_re_[t] = freq_weight_[t] * std::cos(freq_[t] * mid);
            mid_im_[t] = freq_weight_[t] * std::sin(freq_[t] * mid);
        }
        for (std::size_t g = 0; g < kGlNodes.size(); ++g) {
            const double* nr = &node_re_[g * terms];
            const double* ni = &node_im_[g * terms];
            std::fill(phi_re_.begin(), phi_re_.end(), 0.0);
            std::fill(phi_im_.begin(), phi_im_.end(), 0.0);
            for (std::size_t t = 0; t < terms; ++t) {
                phi_re_[freq_coord_[t]] += mid_re_[t] * nr[t] - mid_im_[t] * ni[t];
                phi_im_[freq_coord_[t]] += mid_re_[t] * ni[t] + mid_im_[t] * nr[t];
            }
            for (std::size_t i = 0; i < y_.size(); ++i) phi_re_[i] += base_[i];
            products(scratch_);
            for (std::size_t q = 0; q < out.size(); ++q) out[q] += kGlWeights[g] * half * scratch_[q];
        }
    }

private:
    void products(std::vector<double>& out) {
        out.resize(seqs_.size());
        const double inv_k = 1.0 / static_cast<double>(k_);
        for (std::size_t q = 0; q < seqs_.size(); ++q) {
            const std::uint32_t* seq = seqs_[q].data();
            double prod = 1.0;
            for (std::size_t b = 0; b < m_; ++b) {
                double re = 0.0, im = 0.0;
                for (std::size_t t = 0; t < k_; ++t) {
                    re += phi_re_[seq[b * k_ + t]];
                    im += phi_im_[seq[b * k_ + t]];
                }
                prod *= psi_(std::sqrt(re * re + im * im) * inv_k);
            }
            out[q] = prod;
        }
    }

    const std::vector<double>& y_;
    const std::vector<double>& a_;
    const std::vector<double>& w_;
    std::size_t m_, k_;
    CutoffFn psi_;
    std::vector<std::vector<std::uint32_t>> seqs_;
    std::vector<double> scratch_;
    // Nonzero frequencies 2 pi a_j y_i / sqrt(m) with their mass and coordinate i.
    std::vector<double> freq_, freq_weight_;
    std::vector<std::size_t> freq_coord_;
    std::vector<double> base_;  // mass of zero frequencies per coordinate
    std::vector<double> node_re_, node_im_, mid_re_, mid_im_, phi_re_, phi_im_;
    double cached_half_ = -1.0;
    double lipschitz_ = 0.0;
};

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_args(const std::vector<double>& y, const DiscreteLaw& law, std::size_t m, double K1) {
    if (law.degenerate()) fail(ErrorCode::DegenerateLaw, "RUD needs a nondegenerate xi");
    if (m == 0 || 2 * m > y.size()) fail(ErrorCode::InvalidArgument, "m must satisfy 1 <= m <= n/2");
    if (!(K1 > 0.0)) fail(ErrorCode::InvalidArgument, "K1 must be positive");
    for (double v : y)
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "y has a non-finite entry");
}

std::vector<std::vector<std::uint32_t>> enumerate_sequences(std::size_t n, std::size_t m, std::uint64_t budget) {
    const double count = sequence_count(n, m);
    if (count > static_cast<double>(budget)) {
        fail(ErrorCode::TooLarge, "enumeration needs " + std::to_string(count) + " sequences, budget " +
                                      std::to_string(budget));
    }
    const std::size_t k = n / m;
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> cur;
    std::vector<bool> used(n, false);
    std::function<void(std::size_t, std::size_t, std::size_t)> rec = [&](std::size_t block, std::size_t filled,
                                                                         std::size_t start) {
        if (block == m) {
            out.push_back(cur);
            return;
        }
        if (filled == k) {
            rec(block + 1, 0, 0);
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            if (used[i]) continue;
            used[i] = true;
            cur.push_back(static_cast<std::uint32_t>(i));
            rec(block, filled + 1, i + 1);
            cur.pop_back();
            used[i] = false;
        }
    };
    rec(0, 0, 0);
    return out;
}

RudEstimate solve(Integrand& f, double K1, double K2, std::size_t m, bool exact, const RudOptions& options) {
    RudEstimate est;
    est.K1 = K1;
    est.K2 = K2;
    est.m = m;
    est.sequences_sampled = f.sequences();
    const double L = f.lipschitz();
    const double width = L > 0.0 ? options.panel_factor / L : std::max(K1, 1.0);

    std::vector<double> fseq(f.sequences(), 0.0), panel, part, fval;
    double F = 0.0, t = 0.0;
    double next_record = width;
    est.integral_curve.emplace_back(0.0, 0.0);
    const double t_cap = std::min(options.t_max, width * static_cast<double>(options.max_panels));
    while (t < t_cap) {
        const double b = std::min(t + width, t_cap);
        f.integrate(t, b, panel);
        const double Fb = F + 2.0 * mean(panel);
        if (Fb >= K1) {
            double lo = t, hi = b;
            for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                f.integrate(t, mid, part);
                if (F + 2.0 * mean(part) < K1) lo = mid;
                else hi = mid;
            }
            est.value = 0.5 * (lo + hi);
            f.integrate(t, est.value, part);
            for (std::size_t q = 0; q < fseq.size(); ++q) fseq[q] += part[q];
            est.integral_curve.emplace_back(est.value, F + 2.0 * mean(part));
            if (!exact && fseq.size() > 1) {
                const double mu = mean(fseq);
                double var = 0.0;
                for (double v : fseq) var += (v - mu) * (v - mu);
                var /= static_cast<double>(fseq.size() - 1);
                const double se_F = 2.0 * std::sqrt(var / static_cast<double>(fseq.size()));
                f.eval(est.value, fval);
                const double slope = 2.0 * mean(fval);
                est.std_error = slope > 0 ? se_F / slope : 0.0;
            }
            return est;
        }
        for (std::size_t q = 0; q < fseq.size(); ++q) fseq[q] += panel[q];
        F = Fb;
        t = b;
        if (t >= next_record) {
            est.integral_curve.emplace_back(t, F);
            while (next_record <= t) next_record *= 2.0;
        }
    }
    est.value = t_cap;
    est.censored = true;
    if (est.integral_curve.back().first != t) est.integral_curve.emplace_back(t, F);
    return est;
}

}  // namespace

RudEstimate rud_exact(const std::vector<double>& y, const DiscreteLaw& law, std::size_t m, double K1, double K2,
                      const RudOptions& options) {
    check_args(y, law, m, K1);
    Integrand f(y, law, m, K2, enumerate_sequences(y.size(), m, options.max_sequences));
    return solve(f, K1, K2, m, true, options);
}

RudEstimate rud_estimate(const std::vector<double>& y, const DiscreteLaw& law, std::size_t m, double K1, double K2,
                         std::uint64_t n_sequences, RngStream& stream, const RudOptions& options) {
    check_args(y, law, m, K1);
    if (options.exhaustive) return rud_exact(y, law, m, K1, K2, options);
    if (n_sequences == 0) fail(ErrorCode::InvalidArgument, "n_sequences must be positive");
    const std::size_t n = y.size(), k = n / m;
    std::vector<std::vector<std::uint32_t>> seqs;
    seqs.reserve(n_sequences);
    std::vector<std::uint32_t> perm(n);
    for (std::uint64_t q = 0; q < n_sequences; ++q) {
        std::iota(perm.begin(), perm.end(), 0u);
        shuffle(perm, stream);
        seqs.emplace_back(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m * k));
    }
    Integrand f(y, law, m, K2, std::move(seqs));
    return solve(f, K1, K2, m, false, options);
}

double levy_estimate(std::vector<double> samples, double t) {
    if (samples.empty()) fail(ErrorCode::InvalidArgument, "levy_estimate needs at least one sample");
    std::sort(samples.begin(), samples.end());
    std::size_t best = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        // Samples with |x - c| <= t for the center c = samples[i].
        const auto lo = std::lower_bound(samples.begin(), samples.end(), samples[i] - t);
        const auto hi = std::upper_bound(samples.begin(), samples.end(), samples[i] + t);
        best = std::max(best, static_cast<std::size_t>(hi - lo));
    }
    return static_cast<double>(best) / static_cast<double>(samples.size());
}

double levy_estimate(const std::vector<std::vector<double>>& samples, double t) {
    if (samples.empty()) fail(ErrorCode::InvalidArgument, "levy_estimate needs at least one sample");
    std::size_t best = 0;
    const double t2 = t * t;
    for (const auto& c : samples) {
        std::size_t count = 0;
        for (const auto& x : samples) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) d2 += (x[i] - c[i]) * (x[i] - c[i]);
            if (d2 <= t2) ++count;
        }
        best = std::max(best, count);
    }
    return static_cast<double>(best) / static_cast<double>(samples.size());
}

SmallBallResult small_ball_check(const std::vector<double>& v, const DiscreteLaw& law, std::size_t m, double tau,
                                 RngStream& stream, const SmallBallOptions& options) {
    const std::size_t n = v.size();
    if (m == 0 || 2 * m > n) fail(ErrorCode::InvalidArgument, "m must satisfy 1 <= m <= n/2");
    const double b = mpq_class(law.b() / law.scale()).get_d();
    const auto& a = law.support_double();
    const auto& w = law.masses();
    const double base = b * std::accumulate(v.begin(), v.end(), 0.0);

    RngStream draws = stream.substream(0);
    std::vector<double> sums(options.draws);
    std::vector<std::size_t> idx(n);
    for (auto& s : sums) {
        std::iota(idx.begin(), idx.end(), 0);
        double acc = base;
        for (std::size_t t = 0; t < m; ++t) {
            const auto j = t + static_cast<std::size_t>(draws.below(n - t));
            std::swap(idx[t], idx[j]);
            double u = draws.uniform();
            std::size_t atom = 0;
            while (atom + 1 < w.size() && u >= w[atom]) u -= w[atom++];
            acc += v[idx[t]] * a[atom];
        }
        s = acc;
    }
    SmallBallResult out;
    out.lhs = levy_estimate(sums, std::sqrt(static_cast<double>(m)) * tau);
    RngStream seq = stream.substream(1);
    out.ud = rud_estimate(v, law, m, options.K1, options.K2, options.n_sequences, seq, options.rud).value;
    out.rhs_scale = tau + 1.0 / out.ud;
    return out;
}

double distance_kernel_bound(double s, double k, double h1, double h2, double eps) {
    const double h = h2 - h1;
    return std::max({1.0 / (k * h), eps / (s * h), eps, s / k});
}

DistanceKernelResult distance_kernel_check(const std::vector<ZetaAtom>& zeta, double s, long k, double h1, double h2,
                                           double eps, std::uint64_t trials, RngStream& stream) {
    if (!(h2 > h1)) fail(ErrorCode::InvalidArgument, "need h2 > h1");
    if (k < 1) fail(ErrorCode::InvalidArgument, "need k >= 1");
    if (zeta.empty()) fail(ErrorCode::InvalidArgument, "zeta has no atoms");
    const auto jlo = static_cast<std::int64_t>(std::ceil(h1 * static_cast<double>(k) - 1e-9));
    const auto jhi = static_cast<std::int64_t>(std::floor(h2 * static_cast<double>(k) + 1e-9));
    if (jhi < jlo) fail(ErrorCode::InvalidArgument, "grid (1/k)Z in [h1, h2] is empty");
    const double slack = eps * (1.0 + 1e-12);

    auto hit = [&](std::int64_t j) {
        const double x = static_cast<double>(j) / static_cast<double>(k);
        double e = 0.0;
        for (const auto& z : zeta) {
            const double v = z.value * s * x;
            e += z.mass * std::abs(v - std::round(v));
        }
        return e <= slack;
    };

    DistanceKernelResult out;
    if (trials == 0) {
        for (std::int64_t j = jlo; j <= jhi; ++j) out.hits += hit(j);
        out.total = static_cast<std::uint64_t>(jhi - jlo + 1);
    } else {
        const auto width = static_cast<std::uint64_t>(jhi - jlo + 1);
        for (std::uint64_t t = 0; t < trials; ++t) out.hits += hit(jlo + static_cast<std::int64_t>(stream.below(width)));
        out.total = trials;
    }
    out.empirical_prob = static_cast<double>(out.hits) / static_cast<double>(out.total);
    out.f_bound = distance_kernel_bound(s, static_cast<double>(k), h1, h2, eps);
    return out;
}

}  // namespace rsing
