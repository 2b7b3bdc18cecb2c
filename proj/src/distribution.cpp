#include "rsing/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "rsing/errors.hpp"

namespace rsing {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DegenerateLaw: return "DegenerateLaw";
    case ErrorCode::AmbiguousMode: return "AmbiguousMode";
    case ErrorCode::InvalidLaw: return "InvalidLaw";
    case ErrorCode::BiasZero: return "BiasZero";
    case ErrorCode::OutOfRegime: return "OutOfRegime";
    case ErrorCode::ZeroScaleEntry: return "ZeroScaleEntry";
    case ErrorCode::EmptyLambda: return "EmptyLambda";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::SandwichViolation: return "SandwichViolation";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::AuditFailure: return "AuditFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
    const std::int64_t g = std::gcd(a, b);
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a / g, b, &out)) {
        fail(ErrorCode::InvalidLaw, "value denominators overflow a 64-bit common denominator");
    }
    return out;
}

}  // namespace

mpq_class parse_rational(std::string_view text) {
    const std::string s = trim(text);
    if (s.empty()) fail(ErrorCode::InvalidLaw, "empty rational");
    mpq_class out;
    try {
        if (const auto dot = s.find('.'); dot != std::string::npos) {
            if (s.find('/') != std::string::npos) fail(ErrorCode::InvalidLaw, "mixed decimal/fraction: " + s);
            bool negative = s[0] == '-';
            std::string digits = s.substr(negative || s[0] == '+' ? 1 : 0);
            const auto d = digits.find('.');
            std::string frac = digits.substr(d + 1);
            std::string whole = digits.substr(0, d);
            if (whole.empty()) whole = "0";
            const auto all = whole + frac;
            if (all.find_first_not_of("0123456789") != std::string::npos) {
                fail(ErrorCode::InvalidLaw, "bad decimal: " + s);
            }
            mpz_class num(all, 10);
            mpz_class den;
            mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
            out = mpq_class(num, den);
            if (negative) out = -out;
        } else {
            if (s.find_first_not_of("+-0123456789/") != std::string::npos) {
                fail(ErrorCode::InvalidLaw, "bad rational: " + s);
            }
            std::string cleaned = s[0] == '+' ? s.substr(1) : s;
            out = mpq_class(cleaned, 10);
            if (out.get_den() == 0) fail(ErrorCode::InvalidLaw, "zero denominator: " + s);
        }
    } catch (const std::invalid_argument&) {
        fail(ErrorCode::InvalidLaw, "bad rational: " + s);
    }
    out.canonicalize();
    return out;
}

void RawPmf::validate() const {
    if (atoms.empty()) fail(ErrorCode::InvalidLaw, "law has no atoms");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (!(atoms[i].mass > 0.0) || !std::isfinite(atoms[i].mass)) {
            fail(ErrorCode::InvalidLaw, "atom mass must be positive and finite");
        }
        total += atoms[i].mass;
        for (std::size_t j = 0; j < i; ++j) {
            if (atoms[i].value == atoms[j].value) {
                fail(ErrorCode::InvalidLaw, "duplicate atom value " + atoms[i].value.get_str());
            }
        }
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "masses sum to " << total << ", expected 1";
        fail(ErrorCode::InvalidLaw, msg.str());
    }
}

RawPmf RawPmf::parse(std::istream& in) {
    RawPmf pmf;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto colon = body.find(':');
        if (colon == std::string::npos) {
            fail(ErrorCode::InvalidLaw, "line " + std::to_string(line_no) + ": expected 'value : mass'");
        }
        const std::string key = trim(std::string_view(body).substr(0, colon));
        const std::string rhs = trim(std::string_view(body).substr(colon + 1));
        if (key == "name") {
            pmf.name = rhs;
            continue;
        }
        Atom atom;
        atom.value = parse_rational(key);
        std::size_t used = 0;
        try {
            atom.mass = std::stod(rhs, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != rhs.size() || rhs.empty()) {
            fail(ErrorCode::InvalidLaw, "line " + std::to_string(line_no) + ": bad mass '" + rhs + "'");
        }
        pmf.atoms.push_back(std::move(atom));
    }
    pmf.validate();
    return pmf;
}

RawPmf RawPmf::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ConfigError, "cannot open law file '" + path.string() + "'");
    auto pmf = parse(in);
    if (pmf.name.empty()) pmf.name = path.stem().string();
    return pmf;
}

DiscreteLaw standardize(const RawPmf& raw, const StandardizeOptions& options) {
    raw.validate();

    // Mode: largest mass, ties to the smallest value.
    std::size_t mode = 0;
    bool tie = false;
    for (std::size_t i = 1; i < raw.atoms.size(); ++i) {
        const auto& a = raw.atoms[i];
        const auto& m = raw.atoms[mode];
        if (a.mass > m.mass) {
            mode = i;
            tie = false;
        } else if (a.mass == m.mass) {
            tie = true;
            if (a.value < m.value) mode = i;
        }
    }
    // A tie only matters if it is at the maximal mass.
    if (tie) {
        tie = std::count_if(raw.atoms.begin(), raw.atoms.end(),
                            [&](const Atom& a) { return a.mass == raw.atoms[mode].mass; }) > 1;
    }
    if (tie && options.reject_ambiguous_mode) {
        fail(ErrorCode::AmbiguousMode, "two atoms share the maximal mass");
    }

    DiscreteLaw law;
    law.name_ = raw.name;
    law.b_ = raw.atoms[mode].value;
    law.p_ = 1.0 - raw.atoms[mode].mass;

    if (raw.atoms.size() == 1) {
        if (!options.allow_degenerate) fail(ErrorCode::DegenerateLaw, "single-atom law has p = 0");
        law.p_ = 0.0;
    }

    mpq_class scale = 0;
    for (std::size_t i = 0; i < raw.atoms.size(); ++i) {
        if (i == mode) continue;
        mpq_class diff = abs(raw.atoms[i].value - law.b_);
        if (diff > scale) scale = diff;
    }
    if (scale == 0) scale = 1;
    law.scale_ = scale;

    std::int64_t den = 1;
    for (const auto& atom : raw.atoms) {
        if (!atom.value.get_den().fits_slong_p()) fail(ErrorCode::InvalidLaw, "denominator too large");
        den = checked_lcm(den, atom.value.get_den().get_si());
    }
    law.denominator_ = den;

    const double p = law.p_;
    auto to_level = [den](const mpq_class& v) {
        mpq_class scaled = v * den;
        scaled.canonicalize();
        if (!scaled.get_num().fits_slong_p()) fail(ErrorCode::InvalidLaw, "scaled value overflows 64 bits");
        return static_cast<std::int64_t>(scaled.get_num().get_si());
    };
    law.levels_.push_back(to_level(law.b_));
    law.level_masses_.push_back(raw.atoms[mode].mass);
    for (std::size_t i = 0; i < raw.atoms.size(); ++i) {
        if (i == mode) continue;
        mpq_class a = (raw.atoms[i].value - law.b_) / scale;
        a.canonicalize();
        law.support_.push_back(a);
        law.masses_.push_back(raw.atoms[i].mass / p);
        law.support_d_.push_back(a.get_d());
        law.levels_.push_back(to_level(raw.atoms[i].value));
        law.level_masses_.push_back(raw.atoms[i].mass);
    }
    law.b_d_ = law.b_.get_d();
    law.scale_d_ = law.scale_.get_d();
    return law;
}

DiscreteLaw load_law(const std::filesystem::path& path, const StandardizeOptions& options) {
    return standardize(RawPmf::load(path), options);
}

double DiscreteLaw::xi_mean() const noexcept {
    double mean = 0.0;
    for (std::size_t i = 0; i < support_d_.size(); ++i) mean += masses_[i] * support_d_[i];
    return mean;
}

double DiscreteLaw::eta_mean() const noexcept { return p_ * scale_d_ * xi_mean() + b_d_; }

double collision_probability(const DiscreteLaw& law) {
    const double p = law.p();
    double sq = 0.0;
    for (double m : law.masses()) sq += m * m;
    return (1.0 - p) * (1.0 - p) + p * p * sq;
}

double zero_mass(const DiscreteLaw& law) {
    if (law.b() == 0) return 1.0 - law.p();
    for (std::size_t i = 0; i < law.support().size(); ++i) {
        if (law.eta_value(i) == 0) return law.p() * law.masses()[i];
    }
    return 0.0;
}

double steep_constant_c2(double a_dprime, double b, double a_bar) {
    if (b == 0.0) fail(ErrorCode::BiasZero, "C2 is undefined for b = 0");
    return 2.0 * a_dprime * (std::abs(b) + a_dprime) / (std::abs(b) * a_bar);
}

SupportConstants support_constants(const DiscreteLaw& law) {
    if (law.degenerate()) fail(ErrorCode::DegenerateLaw, "support constants need at least one xi atom");
    SupportConstants c;
    const auto& a = law.support_double();

    c.a = std::numeric_limits<double>::infinity();
    double amax = 0.0;
    for (double v : a) {
        c.a = std::min(c.a, std::abs(v));
        amax = std::max(amax, std::abs(v));
    }
    c.a_bar = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) c.a_bar = std::min(c.a_bar, std::abs(a[i] - a[j]));
    }

    // Atoms of eta / scale: b/scale and a_i + b/scale.
    const mpq_class b_norm = law.b() / law.scale();
    std::vector<mpq_class> eta_atoms{b_norm};
    for (const auto& ai : law.support()) eta_atoms.push_back(ai + b_norm);
    c.a_prime = std::numeric_limits<double>::infinity();
    c.a_dprime = 0.0;
    for (const auto& r : eta_atoms) {
        const double mag = mpq_class(abs(r)).get_d();
        if (r != 0) c.a_prime = std::min(c.a_prime, mag);
        c.a_dprime = std::max(c.a_dprime, mag);
    }

    c.c_sum = 10.0 * amax;
    c.c1 = c.a_prime / (2.0 * c.a_dprime);
    if (law.b() != 0) c.c2 = steep_constant_c2(c.a_dprime, b_norm.get_d(), c.a_bar);
    // A single xi atom leaves a_bar undefined; only the 2 C_sum / a term applies.
    c.gamma = 2.0 * c.c_sum / c.a;
    if (std::isfinite(c.a_bar)) c.gamma = std::min(c.gamma, 2.0 * c.c_sum / c.a_bar);
    return c;
}

std::complex<double> characteristic_function(const DiscreteLaw& law, double u) {
    std::complex<double> sum{0.0, 0.0};
    const auto& a = law.support_double();
    const auto& w = law.masses();
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double angle = 2.0 * std::numbers::pi * a[j] * u;
        sum += w[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    return sum;
}

}  // namespace rsing
