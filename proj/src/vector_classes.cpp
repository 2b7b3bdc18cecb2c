#include "rsing/vector_classes.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "rsing/errors.hpp"

namespace rsing {

std::size_t DecompositionParams::r_scan_max() const {
    const double l = std::log(d);
    if (!(l > 0.0)) return 0;
    return static_cast<std::size_t>(static_cast<double>(n) / (l * l));
}

DecompositionParams derive_params(std::size_t n, double p, const SupportConstants& sc, const Calibration& cal) {
    if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::OutOfRegime, "p must lie in (0, 1)");
    if (n < 2) fail(ErrorCode::OutOfRegime, "n must be at least 2");
    DecompositionParams out;
    out.n = n;
    out.p = p;
    out.d = p * static_cast<double>(n);
    out.r = cal.r;
    out.delta = cal.delta;
    out.rho = cal.rho;
    out.C_tau = cal.C_tau;
    out.C0 = cal.C0;
    out.C1 = sc.c1;
    out.C2 = sc.c2;
    out.gamma = sc.gamma;

    out.l0 = static_cast<long>(std::floor(out.d / (4.0 * std::log(1.0 / p))));
    if (out.l0 < 2) fail(ErrorCode::OutOfRegime, "l0 = " + std::to_string(out.l0) + " < 2");

    const double inv = 1.0 / (64.0 * p);
    if (inv < 1.0) fail(ErrorCode::OutOfRegime, "1/(64p) < 1, so no s0 satisfies l0^(s0-1) <= 1/(64p)");
    // Smallest s0 with l0^s0 > 1/(64p); then l0^(s0-1) <= 1/(64p) holds automatically.
    int s0 = 1;
    double power = static_cast<double>(out.l0);
    while (power <= inv) {
        power *= static_cast<double>(out.l0);
        ++s0;
    }
    out.s0 = s0;

    auto& g = out.n_grid;
    g.push_back(2);
    double lj = 1.0;
    for (int j = 1; j <= s0; ++j) {
        g.push_back(static_cast<std::size_t>(3.0 * lj));
        lj *= static_cast<double>(out.l0);
    }
    const auto floor_inv = static_cast<std::size_t>(std::floor(inv));
    g.push_back(static_cast<double>(floor_inv) >= 1.5 * static_cast<double>(g[s0]) ? floor_inv : g[s0]);
    g.push_back(static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n) / p))));
    g.push_back(static_cast<std::size_t>(std::floor(cal.r * static_cast<double>(n))));

    bool ordered = g[0] < g[1] && g.back() <= n;
    for (std::size_t j = 1; j + 1 < g.size(); ++j) ordered = ordered && g[j] <= g[j + 1];
    if (!ordered) {
        std::ostringstream msg;
        msg << "index grid not ordered:";
        for (auto v : g) msg << ' ' << v;
        fail(ErrorCode::OutOfRegime, msg.str());
    }
    out.kappa = std::log(out.gamma * out.d) / std::log(static_cast<double>(out.l0));
    return out;
}

DecompositionParams derive_params(std::size_t n, double p, const DiscreteLaw& law, const Calibration& cal) {
    return derive_params(n, p, support_constants(law), cal);
}

DecompositionParams derive_params_relaxed(std::size_t n, double p, const SupportConstants& sc, const Calibration& cal,
                                          bool& in_regime) {
    try {
        auto out = derive_params(n, p, sc, cal);
        in_regime = true;
        return out;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::OutOfRegime) throw;
    }
    in_regime = false;
    if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::OutOfRegime, "p must lie in (0, 1)");
    DecompositionParams out;
    out.n = n;
    out.p = p;
    out.d = p * static_cast<double>(n);
    out.r = cal.r;
    out.delta = cal.delta;
    out.rho = cal.rho;
    out.C_tau = cal.C_tau;
    out.C0 = cal.C0;
    out.C1 = sc.c1;
    out.C2 = sc.c2;
    out.gamma = sc.gamma;
    out.l0 = std::max(2L, static_cast<long>(std::floor(out.d / (4.0 * std::log(1.0 / p)))));
    out.s0 = 1;
    const double inv = 1.0 / (64.0 * p);
    double power = static_cast<double>(out.l0);
    while (power <= inv) {
        power *= static_cast<double>(out.l0);
        ++out.s0;
    }
    auto& g = out.n_grid;
    g.push_back(2);
    double lj = 1.0;
    for (int j = 1; j <= out.s0; ++j) {
        g.push_back(static_cast<std::size_t>(3.0 * lj));
        lj *= static_cast<double>(out.l0);
    }
    const auto floor_inv = static_cast<std::size_t>(std::floor(inv));
    g.push_back(static_cast<double>(floor_inv) >= 1.5 * static_cast<double>(g[out.s0]) ? floor_inv : g[out.s0]);
    g.push_back(static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n) / p))));
    g.push_back(static_cast<std::size_t>(std::floor(cal.r * static_cast<double>(n))));
    for (std::size_t j = 1; j < g.size(); ++j) g[j] = std::clamp(g[j], g[j - 1] + (j == 1 ? 1 : 0), n);
    out.kappa = std::log(out.gamma * out.d) / std::log(static_cast<double>(out.l0));
    return out;
}

Rearrangement rearrange(const std::vector<double>& x) {
    Rearrangement r;
    r.perm.resize(x.size());
    std::iota(r.perm.begin(), r.perm.end(), 0);
    std::stable_sort(r.perm.begin(), r.perm.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(x[a]) > std::abs(x[b]); });
    r.sorted_abs.reserve(x.size());
    for (auto i : r.perm) r.sorted_abs.push_back(std::abs(x[i]));
    return r;
}

double growth_g(double t, double d) {
    if (t < 64.0 * d) return std::pow(2.0 * t, 1.5);
    const double l = std::log(2.0 * t);
    return std::exp(l * l);
}

const char* to_string(VectorClass c) noexcept {
    switch (c) {
    case VectorClass::Vn: return "Vn";
    case VectorClass::T0: return "T0";
    case VectorClass::T1: return "T1";
    case VectorClass::T2: return "T2";
    case VectorClass::T3: return "T3";
    case VectorClass::R1: return "R1";
    case VectorClass::R2: return "R2";
    case VectorClass::Unclassified: return "Unclassified";
    }
    return "?";
}

std::string VectorLabel::name() const {
    if (cls == VectorClass::T1) return "T1" + std::to_string(j);
    return to_string(cls);
}

std::string VectorLabel::witness_summary() const {
    std::ostringstream out;
    out.precision(6);
    switch (cls) {
    case VectorClass::Vn: out << "|Q1|=" << q1.size() << " |Q2|=" << q2.size(); break;
    case VectorClass::T0:
    case VectorClass::T1:
    case VectorClass::T2:
    case VectorClass::T3: out << "ratio=" << ratio; break;
    case VectorClass::R1:
    case VectorClass::R2: out << "k=" << k << " ratio=" << ratio << " norm=" << norm_a; break;
    case VectorClass::Unclassified:
        out << "violated=" << violated_index;
        break;
    }
    return out.str();
}

std::vector<double> normalize_upsilon(const std::vector<double>& x, const DecompositionParams& params) {
    const std::size_t rn = params.rn();
    if (x.size() != params.n) fail(ErrorCode::InvalidArgument, "vector length does not match n");
    if (rn == 0) fail(ErrorCode::InvalidArgument, "floor(r n) is 0");
    std::vector<double> a(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = std::abs(x[i]);
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(rn - 1), a.end(), std::greater<>());
    const double scale = a[rn - 1];
    if (scale == 0.0) fail(ErrorCode::ZeroScaleEntry, "x*_{floor(rn)} is 0");
    std::vector<double> out(x);
    for (auto& v : out) v /= scale;
    return out;
}

VnCheck check_vn(const std::vector<double>& x, const DecompositionParams& params) {
    VnCheck out;
    const std::size_t n = x.size();
    const auto r = rearrange(x);
    out.gradual = true;
    for (std::size_t i = 1; i <= n; ++i) {
        if (r.sorted_abs[i - 1] > growth_g(static_cast<double>(n) / static_cast<double>(i), params.d)) {
            out.gradual = false;
            out.violated_index = i;
            break;
        }
    }
    // Taking the q largest and q smallest signed entries is optimal for sets of size >= q.
    const auto q = static_cast<std::size_t>(std::ceil(params.delta * static_cast<double>(n)));
    if (q == 0 || 2 * q > n) return out;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
    const double min_q1 = x[idx[q - 1]];
    const double max_q2 = x[idx[n - q]];
    if (max_q2 <= min_q1 - params.rho) {
        out.nonconstant = true;
        out.q1.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(q));
        out.q2.assign(idx.end() - static_cast<std::ptrdiff_t>(q), idx.end());
    }
    return out;
}

namespace {

// 1-based access to x*, clamped to n.
struct Sorted {
    const std::vector<double>& s;
    double operator()(std::size_t i) const { return s[std::min(i, s.size()) - 1]; }
};

bool in_ac(const std::vector<double>& x, const DecompositionParams& params, double lambda_abs) {
    const std::size_t need = params.n - params.rn();
    for (double lambda : {lambda_abs, -lambda_abs}) {
        std::size_t count = 0;
        for (double v : x)
            if (std::abs(v - lambda) <= params.rho * lambda_abs) ++count;
        if (count >= need) return true;
    }
    return false;
}

std::vector<std::size_t> r_candidates(std::size_t lo, std::size_t hi, bool exhaustive) {
    std::vector<std::size_t> ks;
    if (hi <= lo) return ks;
    if (exhaustive) {
        for (std::size_t k = lo + 1; k <= hi; ++k) ks.push_back(k);
        return ks;
    }
    double k = static_cast<double>(lo + 1);
    std::size_t last = 0;
    while (k <= static_cast<double>(hi)) {
        const auto ki = static_cast<std::size_t>(k);
        if (ki != last) ks.push_back(ki);
        last = ki;
        k *= 1.1;
    }
    if (ks.empty() || ks.back() != hi) ks.push_back(hi);
    return ks;
}

}  // namespace

VectorLabel classify_structured(const std::vector<double>& x, const DecompositionParams& params,
                                const ClassifyOptions& options) {
    const std::size_t n = params.n;
    const double nd = static_cast<double>(n);
    const auto r = rearrange(x);
    const Sorted xs{r.sorted_abs};
    const auto& g = params.n_grid;
    const int s0 = params.s0;
    VectorLabel label;

    auto steep = [&](double hi, double lo, double factor) { return hi >= factor * lo; };
    auto ratio = [](double hi, double lo) {
        return lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    };

    if (steep(xs(1), xs(2), params.C1 * nd)) {
        label.cls = VectorClass::T0;
        label.ratio = ratio(xs(1), xs(2));
        return label;
    }
    if (steep(xs(2), xs(g[1]), params.t11_factor())) {
        label.cls = VectorClass::T1;
        label.j = 1;
        label.ratio = ratio(xs(2), xs(g[1]));
        return label;
    }
    for (int j = 2; j <= s0 + 1; ++j) {
        if (steep(xs(g[j - 1]), xs(g[j]), params.gamma * params.d)) {
            label.cls = VectorClass::T1;
            label.j = j;
            label.ratio = ratio(xs(g[j - 1]), xs(g[j]));
            return label;
        }
    }
    const double ct = params.C_tau * std::sqrt(params.d);
    for (int k = 2; k <= 3; ++k) {
        const int jk = s0 + k;
        if (steep(xs(g[jk - 1]), xs(g[jk]), ct)) {
            label.cls = k == 2 ? VectorClass::T2 : VectorClass::T3;
            label.ratio = ratio(xs(g[jk - 1]), xs(g[jk]));
            return label;
        }
    }

    // R classes. Suffix sums of squares of x*, tail[i] = sum_{t >= i} x*_t^2 (1-based).
    const std::size_t lo = g[s0 + 1];
    const std::size_t hi = std::min(params.r_scan_max(), n);
    if (hi > lo) {
        std::vector<double> tail(n + 2, 0.0);
        for (std::size_t i = n; i >= 1; --i) tail[i] = tail[i + 1] + xs(i) * xs(i);
        const bool ac = in_ac(x, params, xs(params.rn()));
        const double need_ratio = params.C0 / std::sqrt(params.p);
        const double r1_lo = std::sqrt(nd / 2.0), r1_hi = params.C_tau * std::sqrt(params.d * nd);
        const double r2_lo = 2.0 * std::sqrt(nd) / params.r, r2_hi = params.C_tau * params.d * std::sqrt(nd);
        for (std::size_t k : r_candidates(lo, hi, options.exhaustive_r)) {
            const double norm = std::sqrt(tail[k]);
            const double inf = xs(k);
            const double rt = inf > 0 ? norm / inf : std::numeric_limits<double>::infinity();
            if (rt < need_ratio) continue;
            const bool r1 = ac && norm >= r1_lo && norm <= r1_hi;
            const bool r2 = norm >= r2_lo && norm <= r2_hi;
            if (r1 || r2) {
                label.cls = r1 ? VectorClass::R1 : VectorClass::R2;
                label.k = k;
                label.ratio = rt;
                label.norm_a = norm;
                return label;
            }
        }
    }
    label.cls = VectorClass::Unclassified;
    return label;
}

VectorLabel classify(const std::vector<double>& x, const DecompositionParams& params, const ClassifyOptions& options) {
    const auto y = normalize_upsilon(x, params);
    auto label = classify_structured(y, params, options);
    if (label.cls != VectorClass::Unclassified) return label;
    auto vn = check_vn(y, params);
    if (vn.member()) {
        label.cls = VectorClass::Vn;
        label.q1 = std::move(vn.q1);
        label.q2 = std::move(vn.q2);
        return label;
    }
    label.violated_index = vn.violated_index;
    return label;
}

SteepNormCheck steep_norm_ratio_check(const std::vector<double>& x, const VectorLabel& label,
                                      const DecompositionParams& params, const Calibration& cal) {
    SteepNormCheck out;
    const double n = static_cast<double>(params.n);
    const double d = params.d;
    const double denom = std::pow(64.0 * params.p, params.kappa);
    const auto& g = params.n_grid;
    const int s0 = params.s0;
    switch (label.cls) {
    case VectorClass::T0:
        out.anchor = 1;
        out.bound = std::sqrt(n);
        break;
    case VectorClass::T1:
        out.anchor = g[static_cast<std::size_t>(label.j - 1)];
        out.bound = cal.C1_prime * n * n * d * d / denom;
        break;
    case VectorClass::T2:
        out.anchor = g[s0 + 1];
        out.bound = cal.C2_prime * n * n * std::pow(d, 3.0) / denom;
        break;
    case VectorClass::T3:
        out.anchor = g[s0 + 2];
        out.bound = cal.C2_prime * cal.C_tau * n * n * std::pow(d, 3.5) / denom;
        break;
    default:
        out.anchor = g[s0 + 3];
        out.bound = cal.C2_prime * cal.C_tau * cal.C_tau * n * n * std::pow(d, 4.0) / denom;
        break;
    }
    const auto r = rearrange(x);
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    const double anchor_val = r.sorted_abs[std::min(out.anchor, x.size()) - 1];
    out.ratio = anchor_val > 0 ? norm / anchor_val : std::numeric_limits<double>::infinity();
    out.holds = out.ratio <= out.bound;
    return out;
}

bool lambda_admissible(const LambdaSpec& spec) {
    std::vector<std::size_t> rank(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) rank[spec.sigma[i]] = i + 1;
    const double n = static_cast<double>(spec.n);
    for (auto i : spec.q1)
        if (!(spec.h + 2.0 <= growth_g(n / static_cast<double>(rank[i]), spec.d))) return false;
    for (auto i : spec.q2)
        if (!(-growth_g(n / static_cast<double>(rank[i]), spec.d) <= spec.h - spec.rho - 2.0)) return false;
    return true;
}

namespace {

// Envelope values are capped so grid indices stay inside 64-bit range.
constexpr double kEnvelopeCap = 1e15;

struct Box {
    std::int64_t lo, hi;  // inclusive grid indices j, value j / k
};

std::vector<Box> lambda_boxes(const LambdaSpec& spec) {
    if (spec.sigma.size() != spec.n) fail(ErrorCode::InvalidArgument, "sigma must be a permutation of [n]");
    std::vector<std::size_t> rank(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) rank[spec.sigma[i]] = i + 1;
    const double n = static_cast<double>(spec.n);
    const double k = static_cast<double>(spec.k);
    std::vector<double> lo(spec.n), hi(spec.n);
    for (std::size_t c = 0; c < spec.n; ++c) {
        const double env = std::min(growth_g(n / static_cast<double>(rank[c]), spec.d), kEnvelopeCap / k);
        lo[c] = -env;
        hi[c] = env;
    }
    for (auto c : spec.q1) lo[c] = std::max(lo[c], spec.h);
    for (auto c : spec.q2) hi[c] = std::min(hi[c], spec.h - spec.rho);
    std::vector<Box> boxes(spec.n);
    for (std::size_t c = 0; c < spec.n; ++c) {
        // Small tolerance so grid points sitting on a boundary are kept.
        boxes[c].lo = static_cast<std::int64_t>(std::ceil(lo[c] * k - 1e-9));
        boxes[c].hi = static_cast<std::int64_t>(std::floor(hi[c] * k + 1e-9));
        if (boxes[c].hi < boxes[c].lo) fail(ErrorCode::EmptyLambda, "coordinate " + std::to_string(c) + " has an empty grid");
    }
    return boxes;
}

}  // namespace

bool lambda_member(const LambdaSpec& spec, const std::vector<double>& x) {
    if (x.size() != spec.n) return false;
    const double n = static_cast<double>(spec.n);
    const double k = static_cast<double>(spec.k);
    const double tol = 1e-9;
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double v = x[spec.sigma[i]];
        if (std::abs(v * k - std::round(v * k)) > tol) return false;
        if (std::abs(v) > growth_g(n / static_cast<double>(i + 1), spec.d) + tol) return false;
    }
    for (auto c : spec.q1)
        if (x[c] < spec.h - tol) return false;
    for (auto c : spec.q2)
        if (x[c] > spec.h - spec.rho + tol) return false;
    return true;
}

std::vector<double> sample_lambda(const LambdaSpec& spec, RngStream& stream) {
    if (!lambda_admissible(spec)) fail(ErrorCode::EmptyLambda, "h does not satisfy the admissibility constraints");
    const auto boxes = lambda_boxes(spec);
    std::vector<double> x(spec.n);
    for (std::size_t c = 0; c < spec.n; ++c) {
        const auto width = static_cast<std::uint64_t>(boxes[c].hi - boxes[c].lo) + 1;
        const auto j = boxes[c].lo + static_cast<std::int64_t>(stream.below(width));
        x[c] = static_cast<double>(j) / static_cast<double>(spec.k);
    }
    return x;
}

const char* to_string(Generator g) noexcept {
    switch (g) {
    case Generator::HeavyTailed: return "heavy_tailed";
    case Generator::Lattice: return "lattice";
    case Generator::NearConstant: return "near_constant";
    case Generator::Steep: return "steep";
    case Generator::Gradual: return "gradual";
    }
    return "?";
}

namespace {

double normal(RngStream& rng) {
    // Box-Muller; the first uniform is shifted off zero.
    const double u1 = (static_cast<double>(rng.next_u64() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

double uniform_in(RngStream& rng, double a, double b) { return a + (b - a) * rng.uniform(); }

double log_uniform(RngStream& rng, double a, double b) { return std::exp(uniform_in(rng, std::log(a), std::log(b))); }

double sign(RngStream& rng) { return (rng.next_u64() & 1) ? 1.0 : -1.0; }

}  // namespace

std::vector<double> generate_vector(Generator gen, const DecompositionParams& params, RngStream& rng) {
    const std::size_t n = params.n;
    std::vector<double> x(n);
    switch (gen) {
    case Generator::HeavyTailed: {
        // Pareto magnitudes; signs either random or all equal.
        const double alpha = uniform_in(rng, 0.2, 3.0);
        const bool one_sided = rng.uniform() < 0.5;
        for (auto& v : x) {
            const double u = 1.0 - rng.uniform();
            v = std::pow(u, -1.0 / alpha) * (one_sided ? 1.0 : sign(rng));
        }
        break;
    }
    case Generator::Lattice: {
        const auto k = static_cast<double>(1 + rng.below(8));
        const auto base = static_cast<double>(1 + rng.below(4 * static_cast<std::uint64_t>(k)));
        const double sigma = log_uniform(rng, 0.05, 10.0);
        for (auto& v : x) v = (base + std::round(sigma * normal(rng))) / k;
        break;
    }
    case Generator::NearConstant: {
        // Entries near a common value c, plus a block of outliers of a common magnitude.
        const double c = sign(rng);
        const double noise = uniform_in(rng, 0.0, params.rho / 2.0);
        for (auto& v : x) v = c * (1.0 + noise * uniform_in(rng, -1.0, 1.0));
        const auto outliers = static_cast<std::size_t>(log_uniform(rng, 1.0, static_cast<double>(n) / 2.0));
        const double mag = log_uniform(rng, 1.0, 1e4);
        const double osign = rng.uniform() < 0.75 ? c : -c;
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        shuffle(idx, rng);
        for (std::size_t t = 0; t < outliers && t < n; ++t) x[idx[t]] = osign * mag * uniform_in(rng, 0.9, 1.1);
        break;
    }
    case Generator::Steep: {
        for (auto& v : x) v = uniform_in(rng, 0.5, 1.0) * sign(rng);
        x[rng.below(n)] = 10.0 * params.C1 * static_cast<double>(n) * static_cast<double>(n);
        break;
    }
    case Generator::Gradual: {
        // Upper half in [1 + 2 rho, 2.5], lower half in [0.25, 1 - 2 rho]; bounded ratios keep it gradual.
        const double scale = log_uniform(rng, 1e-3, 1e3) * sign(rng);
        for (std::size_t i = 0; i < n; ++i)
            x[i] = scale * (i < n / 2 ? uniform_in(rng, 1.0 + 2.0 * params.rho, 2.5)
                                      : uniform_in(rng, 0.25, 1.0 - 2.0 * params.rho));
        shuffle(x, rng);
        break;
    }
    }
    return x;
}

namespace {

constexpr Generator kMixed[] = {Generator::HeavyTailed, Generator::Lattice, Generator::NearConstant};

}  // namespace

const char* mixed_generator_name(std::size_t i) noexcept { return to_string(kMixed[i % 3]); }

CoverageTrial coverage_trial(const DecompositionParams& params, std::size_t generator, RngStream& rng,
                             const ClassifyOptions& options) {
    CoverageTrial out;
    out.generator = generator % 3;
    // Redraw until the vector is outside Vn, with a bounded number of attempts.
    for (int attempt = 0; attempt < 256; ++attempt) {
        const auto raw = generate_vector(kMixed[out.generator], params, rng);
        std::vector<double> x;
        try {
            x = normalize_upsilon(raw, params);
        } catch (const Error&) {
            continue;
        }
        ++out.sampled;
        if (check_vn(x, params).member()) {
            ++out.vn;
            continue;
        }
        out.found = true;
        out.label = classify_structured(x, params, options);
        if (out.label.cls == VectorClass::Unclassified) {
            const auto r = rearrange(x);
            const auto& g = params.n_grid;
            std::ostringstream s;
            s.precision(4);
            s << "x*_1=" << r.sorted_abs[0];
            for (int j : {params.s0 + 1, params.s0 + 2}) s << " x*_" << g[j] << '=' << r.sorted_abs[g[j] - 1];
            out.summary = s.str();
        }
        break;
    }
    return out;
}

CoverageReport coverage_check(const DecompositionParams& params, std::uint64_t trials, const RngStream& stream,
                              const ClassifyOptions& options, std::size_t max_listed) {
    CoverageReport report;
    for (std::size_t g = 0; g < 3; ++g) report.per_generator.push_back({mixed_generator_name(g), 0, 0, 0, 0, 0});
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng = stream.substream(t);
        const auto trial = coverage_trial(params, static_cast<std::size_t>(t % 3), rng, options);
        auto& stats = report.per_generator[trial.generator];
        stats.sampled += trial.sampled;
        stats.vn += trial.vn;
        if (!trial.found) continue;
        ++report.remainder;
        if (trial.label.steep()) ++stats.steep;
        if (trial.label.spread()) ++stats.spread;
        if (trial.label.cls != VectorClass::Unclassified) {
            ++stats.covered;
            ++report.covered;
        } else if (report.counterexamples.size() < max_listed) {
            report.counterexamples.push_back({stats.generator, t, trial.summary});
        }
    }
    return report;
}

std::vector<std::vector<double>> read_vector_batch(std::istream& in) {
    std::vector<std::vector<double>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ss(line);
        std::vector<double> v;
        std::string tok;
        while (ss >> tok) {
            std::size_t used = 0;
            double val = 0;
            try {
                val = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size()) fail(ErrorCode::InvalidArgument, "bad number '" + tok + "' in vector batch");
            v.push_back(val);
        }
        if (!v.empty()) out.push_back(std::move(v));
    }
    return out;
}

}  // namespace rsing
