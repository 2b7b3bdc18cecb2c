#include "rsing/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "rsing/errors.hpp"
#include "rsing/events.hpp"
#include "rsing/linalg.hpp"
#include "rsing/rud.hpp"
#include "rsing/sampling.hpp"
#include "rsing/vector_classes.hpp"

namespace rsing {

RngStream sample_stream(std::uint64_t seed, std::uint64_t task, std::uint64_t i) {
    return RngStream(seed).substream(task).substream(i);
}

namespace {

std::filesystem::path task_file(const std::filesystem::path& dir, std::uint64_t t) {
    return dir / ("task_" + std::to_string(t) + ".json");
}

bool load_cached(const std::filesystem::path& dir, std::uint64_t t, TaskOutput& out) {
    std::ifstream in(task_file(dir, t));
    if (!in) return false;
    try {
        const json doc = json::parse(in);
        out.aggregate = doc.at("aggregate");
        out.census.clear();
        for (const auto& row : doc.at("census")) out.census.push_back(census_row_from_json(row));
        return true;
    } catch (const json::exception&) {
        return false;  // torn or stale file: recompute
    }
}

void store_cached(const std::filesystem::path& dir, std::uint64_t t, const TaskOutput& out) {
    json census = json::array();
    for (const auto& row : out.census) census.push_back(to_json(row));
    const auto final_path = task_file(dir, t);
    auto tmp = final_path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp);
        f << json{{"aggregate", out.aggregate}, {"census", census}}.dump();
    }
    std::filesystem::rename(tmp, final_path);
}

}  // namespace

std::vector<TaskOutput> run_tasks(const TaskPlan& plan, const TaskFn& fn) {
    if (plan.task_size == 0) fail(ErrorCode::ConfigError, "task_size must be positive");
    const std::uint64_t ntasks = (plan.total + plan.task_size - 1) / plan.task_size;
    std::vector<TaskOutput> outputs(ntasks);
    std::vector<std::exception_ptr> errors(ntasks);
    if (!plan.cache_dir.empty()) std::filesystem::create_directories(plan.cache_dir);

    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::uint64_t t = next.fetch_add(1);
            if (t >= ntasks || failed.load()) return;
            const std::uint64_t first = t * plan.task_size;
            const std::uint64_t count = std::min(plan.task_size, plan.total - first);
            try {
                if (!plan.cache_dir.empty() && load_cached(plan.cache_dir, t, outputs[t])) continue;
                outputs[t] = fn(t, first, count);
                if (!plan.cache_dir.empty()) store_cached(plan.cache_dir, t, outputs[t]);
            } catch (...) {
                errors[t] = std::current_exception();
                failed = true;
            }
        }
    };
    const auto nthreads = static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(plan.workers, ntasks)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    // Tasks are claimed in index order, so every task below a failure has run.
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return outputs;
}

namespace {

// Numbers add, objects merge key by key, arrays concatenate.
void merge_into(json& acc, const json& add) {
    if (acc.is_null()) {
        acc = add;
        return;
    }
    if (add.is_object()) {
        for (const auto& [key, value] : add.items()) merge_into(acc[key], value);
    } else if (add.is_array()) {
        for (const auto& v : add) acc.push_back(v);
    } else if (add.is_number_unsigned() && acc.is_number_unsigned()) {
        acc = acc.get<std::uint64_t>() + add.get<std::uint64_t>();
    } else if (add.is_number_integer() && acc.is_number_integer()) {
        acc = acc.get<std::int64_t>() + add.get<std::int64_t>();
    } else if (add.is_number()) {
        acc = acc.get<double>() + add.get<double>();
    } else {
        acc = add;
    }
}

struct Merged {
    json aggregate = json::object();
    std::vector<CensusRow> census;
};

Merged merge(std::vector<TaskOutput>&& outputs) {
    Merged m;
    for (auto& o : outputs) {
        merge_into(m.aggregate, o.aggregate);
        for (auto& row : o.census) m.census.push_back(std::move(row));
    }
    return m;
}

std::uint64_t count_of(const json& agg, const std::string& key) {
    return agg.contains(key) ? agg.at(key).get<std::uint64_t>() : 0;
}

std::vector<double> doubles_of(const json& agg, const std::string& key) {
    std::vector<double> out;
    if (!agg.contains(key)) return out;
    for (const auto& v : agg.at(key)) out.push_back(v.get<double>());
    return out;
}

TaskPlan plan_for(const ExperimentConfig& cfg, std::uint64_t total) {
    TaskPlan plan;
    plan.total = total;
    plan.task_size = cfg.task_size;
    plan.workers = cfg.workers;
    if (cfg.resume) plan.cache_dir = cfg.out_dir / ".tasks" / cfg.hash();
    return plan;
}

DiscreteLaw require_law(const ExperimentConfig& cfg) {
    if (cfg.law_path.empty())
        fail(ErrorCode::ConfigError, std::string(to_string(cfg.experiment)) + " needs a 'law' entry");
    if (!std::filesystem::exists(cfg.law_path))
        fail(ErrorCode::ConfigError, "law file not found: " + cfg.law_path.string());
    return load_law(cfg.law_path);
}

// Linear-interpolation quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::nan("");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

json quantile_table(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    json out = json::object();
    for (double q : {0.0, 0.1, 0.5, 0.9, 0.99, 1.0}) out["q" + format_double(q)] = quantile(v, q);
    return out;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_error_of_mean(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// k distinct indices of [0, n) by a partial Fisher-Yates pass.
std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, RngStream& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

json findings_json(const StructuredFindings& f) {
    auto pairs = [](const std::vector<LevelSetPair>& ps) {
        json out = json::array();
        for (const auto& p : ps) {
            json sigma = json::array();
            for (const auto& [from, to] : p.sigma) sigma.push_back({from, to});
            out.push_back({{"j1", p.j1}, {"j2", p.j2}, {"kind", std::string(1, p.kind)}, {"sigma", sigma}});
        }
        return out;
    };
    return json{{"zero_columns", f.zero.columns},
                {"zero_rows", f.zero.rows},
                {"column_pairs", pairs(f.column_pairs)},
                {"row_pairs", pairs(f.row_pairs)}};
}

const std::vector<Cause> kCauses = {Cause::None, Cause::ZeroColumn, Cause::ZeroRow, Cause::ColumnPair,
                                    Cause::RowPair, Cause::Unexplained};

ScreenOptions screen_options(const ExperimentConfig& cfg) {
    ScreenOptions so;
    so.threshold = cfg.get("screen_threshold", so.threshold);
    so.audit_fraction = cfg.get("audit_fraction", so.audit_fraction);
    return so;
}

void add_theory_terms(ExperimentReport& r, const TheoryTerms& t) {
    r.theory_value("q0", t.q0);
    r.theory_value("qc", t.qc);
    r.theory_value("zero_term", t.zero_term);
    r.theory_value("collision_term", t.collision_term);
    r.theory_value("p_s", t.p_s);
    r.theory_value("p_zero_column", t.p_zero_column);
    r.theory_value("p_zero_row", t.p_zero_row);
    r.theory_value("p_zero_line", t.p_zero_line);
    r.theory_value("bonferroni_lower", t.bonferroni_lower);
    r.theory_value("bonferroni_upper", t.bonferroni_upper);
}

json audit_counts(const json& agg) {
    return json{{"screen_positive", count_of(agg, "screen_positive")},
                {"exact_checked", count_of(agg, "exact_checked")},
                {"audited", count_of(agg, "audited")},
                {"disagreements", 0}};
}

}  // namespace

std::optional<double> enumerate_singular_probability(const DiscreteLaw& law, std::size_t n,
                                                     std::uint64_t max_patterns) {
    const auto& levels = law.scaled_levels();
    const auto& masses = law.level_masses();
    const std::size_t L = levels.size(), cells = n * n;
    double patterns = std::pow(static_cast<double>(L), static_cast<double>(cells));
    if (patterns > static_cast<double>(max_patterns)) return std::nullopt;
    std::vector<std::size_t> digit(cells, 0);
    IntMatrix m(n, n);
    double total = 0.0;
    for (;;) {
        double prob = 1.0;
        for (std::size_t c = 0; c < cells; ++c) {
            m.data[c] = levels[digit[c]];
            prob *= masses[digit[c]];
        }
        if (exact_rank(m).is_singular) total += prob;
        std::size_t c = 0;
        while (c < cells && ++digit[c] == L) digit[c++] = 0;
        if (c == cells) break;
    }
    return total;
}

ExperimentReport run_singularity(const ExperimentConfig& cfg) {
    const auto law = require_law(cfg);
    const auto n = cfg.get<std::size_t>("n", 10);
    const auto so = screen_options(cfg);
    if (n == 0) fail(ErrorCode::ConfigError, "n must be positive");

    auto outputs = run_tasks(plan_for(cfg, cfg.samples), [&](std::uint64_t task, std::uint64_t first,
                                                            std::uint64_t count) {
        TaskOutput out;
        std::uint64_t singular = 0, zc = 0, zr = 0, zl = 0, pos = 0, checked = 0, audited = 0, promotions = 0;
        std::map<std::string, std::uint64_t> causes;
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto s = sample_stream(cfg.seed, task, i);
            auto ms = s.substream(0);
            auto audit_rng = s.substream(1);
            const auto m = sample_matrix(law, n, ms);
            const auto dec = decide_singularity(m, so, audit_rng);
            const auto f = attribute(m, law, dec.singular);
            singular += dec.singular;
            zc += !f.zero.columns.empty();
            zr += !f.zero.rows.empty();
            zl += !f.zero.columns.empty() || !f.zero.rows.empty();
            pos += dec.screen_positive;
            checked += dec.exact_checked;
            audited += dec.audited;
            promotions += static_cast<std::uint64_t>(dec.overflow_promotions);
            ++causes[to_string(f.cause)];
            CensusRow row;
            row.sample_index = first + i;
            row.seed_path = s.path_string();
            row.singular = dec.singular;
            row.cause = to_string(f.cause);
            if (dec.singular) row.findings = findings_json(f).dump();
            out.census.push_back(std::move(row));
        }
        out.aggregate = {{"singular", singular},   {"zero_column", zc}, {"zero_row", zr},
                         {"zero_line", zl},        {"screen_positive", pos},
                         {"exact_checked", checked}, {"audited", audited},
                         {"overflow_promotions", promotions}, {"causes", causes}};
        return out;
    });
    auto merged = merge(std::move(outputs));
    const auto& agg = merged.aggregate;
    const std::uint64_t N = cfg.samples;

    ExperimentReport r;
    json causes = json::object();
    for (auto c : kCauses) causes[to_string(c)] = agg.contains("causes") ? count_of(agg.at("causes"), to_string(c)) : 0;
    const std::uint64_t singular = count_of(agg, "singular");
    const std::uint64_t unexplained = causes.at("unexplained").get<std::uint64_t>();
    r.proportion("p_singular", singular, N);
    r.proportion("p_zero_column", count_of(agg, "zero_column"), N);
    r.proportion("p_zero_row", count_of(agg, "zero_row"), N);
    r.proportion("p_zero_line", count_of(agg, "zero_line"), N);
    r.proportion("p_explained", singular - unexplained, N);
    r.proportion("p_unexplained", unexplained, N);

    add_theory_terms(r, theory_leading_order(law, n));
    r.theory_value("structured_lower_bound", theory_leading_order(law, n).p_zero_line);
    if (auto exact = enumerate_singular_probability(law, n)) r.theory_value("p_singular_exact", *exact);

    r.counts = {{"samples", N},
                {"singular", singular},
                {"nonsingular", N - singular},
                {"causes", causes},
                {"detectors",
                 {{"zero_column", count_of(agg, "zero_column")},
                  {"zero_row", count_of(agg, "zero_row")},
                  {"zero_line", count_of(agg, "zero_line")}}},
                {"audit", audit_counts(agg)},
                {"overflow_promotions", count_of(agg, "overflow_promotions")}};
    r.details = {{"n", n}, {"law_id", law.name()}};
    r.census = std::move(merged.census);
    return r;
}

ExperimentReport run_smin_tail(const ExperimentConfig& cfg) {
    const auto law = require_law(cfg);
    const auto n = cfg.get<std::size_t>("n", 10);
    const auto t_grid = cfg.get<std::vector<double>>("t_grid", {0.0, 0.1, 1.0});
    const auto so = screen_options(cfg);
    if (n == 0) fail(ErrorCode::ConfigError, "n must be positive");
    const double l = std::log(2.0 * static_cast<double>(n));
    const double base = std::exp(-3.0 * l * l);

    auto outputs = run_tasks(plan_for(cfg, cfg.samples), [&](std::uint64_t task, std::uint64_t first,
                                                            std::uint64_t count) {
        TaskOutput out;
        std::uint64_t singular = 0, pos = 0, checked = 0, audited = 0, fallbacks = 0;
        std::vector<std::uint64_t> tail(t_grid.size(), 0);
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto s = sample_stream(cfg.seed, task, i);
            auto ms = s.substream(0);
            auto audit_rng = s.substream(1);
            const auto m = sample_matrix(law, n, ms);
            const auto dec = decide_singularity(m, so, audit_rng);
            bool is_singular = dec.singular;
            double smin = 0.0;
            if (!is_singular) {
                const auto sv = smallest_singular_value(m.to_double());
                smin = sv.value;
                if (!sv.certified_positive) {
                    ++fallbacks;
                    if (exact_rank(m).is_singular) {
                        is_singular = true;
                        smin = 0.0;
                    }
                }
            }
            singular += is_singular;
            pos += dec.screen_positive;
            checked += dec.exact_checked;
            audited += dec.audited;
            for (std::size_t k = 0; k < t_grid.size(); ++k) tail[k] += smin <= t_grid[k] * base;
            CensusRow row;
            row.sample_index = first + i;
            row.seed_path = s.path_string();
            row.singular = is_singular;
            row.cause = is_singular ? "singular" : "none";
            row.smin = smin;
            out.census.push_back(std::move(row));
        }
        out.aggregate = {{"singular", singular},       {"screen_positive", pos}, {"exact_checked", checked},
                         {"audited", audited},         {"exact_fallbacks", fallbacks},
                         {"tail", json::object()}};
        for (std::size_t k = 0; k < t_grid.size(); ++k) out.aggregate["tail"][std::to_string(k)] = tail[k];
        return out;
    });
    auto merged = merge(std::move(outputs));
    const auto& agg = merged.aggregate;
    const std::uint64_t N = cfg.samples;
    const std::uint64_t singular = count_of(agg, "singular");

    ExperimentReport r;
    r.proportion("p_singular", singular, N);
    const double p_sing = N ? static_cast<double>(singular) / static_cast<double>(N) : 0.0;
    json inequality = json::array();
    json tail_counts = json::object();
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const std::uint64_t hits = agg.contains("tail") ? count_of(agg.at("tail"), std::to_string(k)) : 0;
        const std::string tag = "t=" + format_double(t_grid[k]);
        r.proportion("p_tail_" + tag, hits, N);
        r.theory_value("threshold_" + tag, t_grid[k] * base);
        const double lhs = N ? static_cast<double>(hits) / static_cast<double>(N) : 0.0;
        const double se = proportion_std_error(hits, N);
        const double rhs = t_grid[k] + p_sing;
        inequality.push_back({{"t", t_grid[k]}, {"lhs", lhs}, {"lhs_std_error", se}, {"rhs", rhs},
                              {"holds", lhs <= rhs + 3.0 * se}});
        tail_counts[tag] = hits;
    }
    r.theory_value("log_threshold_factor", -3.0 * l * l);
    r.counts = {{"samples", N},
                {"singular", singular},
                {"nonsingular", N - singular},
                {"tail", tail_counts},
                {"exact_fallbacks", count_of(agg, "exact_fallbacks")},
                {"audit", audit_counts(agg)}};
    r.details = {{"n", n}, {"law_id", law.name()}, {"inequality", inequality}};
    r.census = std::move(merged.census);
    return r;
}

ExperimentReport run_events(const ExperimentConfig& cfg) {
    const auto law = require_law(cfg);
    const auto n = cfg.get<std::size_t>("n", 200);
    const auto m = cfg.get<std::size_t>("m", 3);
    const auto l = cfg.get<std::size_t>("l", 2);
    const double p = law.p();
    std::size_t auto_card = p > 0.0 ? 2 * static_cast<std::size_t>(std::floor(1.0 / (64.0 * p))) : 1;
    auto_card = std::clamp<std::size_t>(auto_card, 1, std::max<std::size_t>(1, n / 2));
    const auto card_l = cfg.get<std::size_t>("card_l", auto_card);
    const auto card_draws = cfg.get<std::size_t>("card_draws", 8);
    if (n < 2) fail(ErrorCode::ConfigError, "n must be at least 2");
    if (l * m > n || l == 0 || m == 0) fail(ErrorCode::ConfigError, "need 1 <= m, 1 <= l and l*m <= n");
    const double nd = static_cast<double>(n);
    const double card_lo = static_cast<double>(card_l) * p * nd / 16.0;
    const double card_hi = 2.0 * static_cast<double>(card_l) * p * nd;

    auto outputs = run_tasks(plan_for(cfg, cfg.samples), [&](std::uint64_t task, std::uint64_t first,
                                                            std::uint64_t count) {
        TaskOutput out;
        std::uint64_t e_sum = 0, e_col = 0, e_card = 0;
        std::vector<std::uint64_t> hist(n + 1, 0);
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto s = sample_stream(cfg.seed, task, i);
            auto ms = s.substream(0);
            auto col_rng = s.substream(1);
            auto card_rng = s.substream(2);
            const auto mat = sample_matrix(law, n, ms);
            for (auto c : support_counts(mat)) ++hist[c];
            const bool sum_ok = e_sum_holds(mat, law);
            const auto J = random_subset(n, l * m, col_rng);
            const std::vector<std::size_t> J1(J.begin(), J.begin() + static_cast<std::ptrdiff_t>(m));
            const std::vector<std::size_t> J2(J.begin() + static_cast<std::ptrdiff_t>(m), J.end());
            const bool col_ok = e_col_holds(mat, J1, J2);
            bool card_ok = true;
            for (std::size_t d = 0; d < card_draws && card_ok; ++d) {
                const auto size = static_cast<double>(incidence_set(mat, random_subset(n, card_l, card_rng)).size());
                card_ok = size >= card_lo && size <= card_hi;
            }
            e_sum += sum_ok;
            e_col += col_ok;
            e_card += card_ok;
            CensusRow row;
            row.sample_index = first + i;
            row.seed_path = s.path_string();
            row.cause = "none";
            row.label = std::string("e_sum=") + (sum_ok ? "1" : "0") + " e_col=" + (col_ok ? "1" : "0") +
                        " e_card=" + (card_ok ? "1" : "0");
            out.census.push_back(std::move(row));
        }
        json h = json::object();
        for (std::size_t k = 0; k <= n; ++k)
            if (hist[k]) h[std::to_string(k)] = hist[k];
        out.aggregate = {{"e_sum", e_sum}, {"e_col", e_col}, {"e_card", e_card}, {"support", h}};
        return out;
    });
    auto merged = merge(std::move(outputs));
    const auto& agg = merged.aggregate;
    const std::uint64_t N = cfg.samples;

    ExperimentReport r;
    r.proportion("p_e_sum", count_of(agg, "e_sum"), N);
    r.proportion("p_e_col", count_of(agg, "e_col"), N);
    r.proportion("p_e_card_sampled_J", count_of(agg, "e_card"), N);
    r.theory_value("e_sum_bound", 1.0 - std::exp(-2.7 * p * nd));
    r.theory_value("e_col_bound", 1.0 - std::exp(-2.0 * p * nd));
    r.theory_value("e_card_bound", 1.0 - std::exp(-nd / 1000.0));
    r.theory_value("support_mean", p * nd);

    const auto pmf = binomial_pmf(n, p);
    const double columns = static_cast<double>(N) * nd;
    json buckets = json::array();
    std::uint64_t beyond = 0;
    for (std::size_t k = 0; k <= n; ++k) {
        const std::uint64_t obs =
            agg.contains("support") ? count_of(agg.at("support"), std::to_string(k)) : 0;
        if (obs == 0 && pmf[k] * columns < 1.0) continue;
        const double freq = columns > 0 ? static_cast<double>(obs) / columns : 0.0;
        const double se = std::sqrt(pmf[k] * (1.0 - pmf[k]) / columns);
        const double z = se > 0 ? (freq - pmf[k]) / se : (freq == pmf[k] ? 0.0 : INFINITY);
        if (std::abs(z) > 4.0) ++beyond;
        buckets.push_back({{"k", k}, {"observed", freq}, {"pmf", pmf[k]}, {"z", std::isfinite(z) ? json(z) : json("inf")}});
    }
    r.counts = {{"samples", N},
                {"e_sum", count_of(agg, "e_sum")},
                {"e_col", count_of(agg, "e_col")},
                {"e_card", count_of(agg, "e_card")},
                {"support_buckets_beyond_4sigma", beyond}};
    r.details = {{"n", n},         {"p", p},           {"m", m},
                 {"l", l},         {"card_l", card_l}, {"card_draws", card_draws},
                 {"card_window", {card_lo, card_hi}},  {"e_card_mode", "sampled J"},
                 {"support_buckets", buckets}};
    r.census = std::move(merged.census);
    return r;
}

ExperimentReport run_classify_coverage(const ExperimentConfig& cfg) {
    const auto law = require_law(cfg);
    const auto n = cfg.get<std::size_t>("n", 5000);
    const auto p = cfg.get<double>("p", 0.01);
    ClassifyOptions options;
    options.exhaustive_r = cfg.get<bool>("exhaustive_r", false);
    const auto max_listed = cfg.get<std::size_t>("max_listed", 1000);
    const auto params = derive_params(n, p, support_constants(law), cfg.calibration);

    auto outputs = run_tasks(plan_for(cfg, cfg.samples), [&](std::uint64_t task, std::uint64_t first,
                                                            std::uint64_t count) {
        TaskOutput out;
        json per = json::object();
        json classes = json::object();
        json listed = json::array();
        std::uint64_t remainder = 0, covered = 0, exhausted = 0;
        for (std::uint64_t i = 0; i < count; ++i) {
            auto s = sample_stream(cfg.seed, task, i);
            const std::uint64_t g = first + i;
            const auto trial = coverage_trial(params, static_cast<std::size_t>(g % 3), s, options);
            const std::string gen = mixed_generator_name(trial.generator);
            json& st = per[gen];
            merge_into(st["sampled"], json(trial.sampled));
            merge_into(st["vn"], json(trial.vn));
            CensusRow row;
            row.sample_index = g;
            row.seed_path = s.path_string();
            row.cause = gen;
            if (!trial.found) {
                ++exhausted;
                row.label = "none";
                out.census.push_back(std::move(row));
                continue;
            }
            ++remainder;
            const auto name = trial.label.name();
            merge_into(classes[name], json(std::uint64_t{1}));
            const bool ok = trial.label.cls != VectorClass::Unclassified;
            merge_into(st["remainder"], json(std::uint64_t{1}));
            merge_into(st["covered"], json(std::uint64_t{ok}));
            merge_into(st["steep"], json(std::uint64_t{trial.label.steep()}));
            merge_into(st["spread"], json(std::uint64_t{trial.label.spread()}));
            if (ok) ++covered;
            else listed.push_back({{"trial", g}, {"generator", gen}, {"summary", trial.summary}});
            row.label = name;
            row.findings = ok ? "" : trial.summary;
            out.census.push_back(std::move(row));
        }
        out.aggregate = {{"remainder", remainder}, {"covered", covered}, {"exhausted", exhausted},
                         {"per_generator", per},   {"classes", classes}, {"uncovered", listed}};
        return out;
    });
    auto merged = merge(std::move(outputs));
    const auto& agg = merged.aggregate;
    const std::uint64_t remainder = count_of(agg, "remainder"), covered = count_of(agg, "covered");

    ExperimentReport r;
    r.proportion("covered_fraction", covered, remainder);
    json uncovered = agg.contains("uncovered") ? agg.at("uncovered") : json::array();
    const std::size_t total_uncovered = uncovered.size();
    if (uncovered.size() > max_listed) uncovered.erase(uncovered.begin() + static_cast<std::ptrdiff_t>(max_listed), uncovered.end());
    r.theory_value("d", params.d);
    r.theory_value("kappa", params.kappa);
    r.theory_value("t11_factor", params.t11_factor());
    r.theory_value("r_scan_max", static_cast<double>(params.r_scan_max()));
    r.counts = {{"samples", cfg.samples},
                {"remainder", remainder},
                {"covered", covered},
                {"uncovered", remainder - covered},
                {"no_remainder_draw", count_of(agg, "exhausted")},
                {"classes", agg.contains("classes") ? agg.at("classes") : json::object()},
                {"per_generator", agg.contains("per_generator") ? agg.at("per_generator") : json::object()}};
    r.details = {{"n", n},
                 {"p", p},
                 {"l0", params.l0},
                 {"s0", params.s0},
                 {"n_grid", params.n_grid},
                 {"exhaustive_r", options.exhaustive_r},
                 {"uncovered_total", total_uncovered},
                 {"uncovered", uncovered}};
    r.census = std::move(merged.census);
    return r;
}

namespace {

struct RudSettings {
    std::uint64_t n_sequences = 64;
    RudOptions options;
};

RudSettings rud_settings(const ExperimentConfig& cfg, double t_max_default, std::uint64_t max_panels_default,
                         std::uint64_t n_sequences_default = 64, double panel_factor_default = RudOptions{}.panel_factor) {
    RudSettings s;
    s.n_sequences = cfg.get<std::uint64_t>("n_sequences", n_sequences_default);
    s.options.panel_factor = cfg.get<double>("panel_factor", panel_factor_default);
    s.options.t_max = cfg.get<double>("t_max", t_max_default);
    s.options.max_panels = cfg.get<std::uint64_t>("max_panels", max_panels_default);
    if (s.n_sequences == 0) fail(ErrorCode::ConfigError, "n_sequences must be positive");
    return s;
}

// A Vn member from the gradual generator, normalized so x*_{floor(rn)} = 1.
std::optional<std::vector<double>> draw_vn(const DecompositionParams& params, RngStream& rng, int attempts = 64) {
    for (int a = 0; a < attempts; ++a) {
        auto x = generate_vector(Generator::Gradual, params, rng);
        try {
            x = normalize_upsilon(x, params);
        } catch (const Error&) {
            continue;
        }
        if (check_vn(x, params).member()) return x;
    }
    return std::nullopt;
}

}  // namespace

ExperimentReport run_rud_profile(const ExperimentConfig& cfg) {
    const auto law = require_law(cfg);
    const auto n = cfg.get<std::size_t>("n", 64);
    const auto m = cfg.get<std::size_t>("m", 4);
    const auto rs = rud_settings(cfg, 1e4, 200000, 16, 2.0);
    if (m == 0 || 2 * m > n) fail(ErrorCode::ConfigError, "m must satisfy 1 <= m <= n/2");
    bool in_regime = false;
    const auto params = derive_params_relaxed(n, law.p(), support_constants(law), cfg.calibration, in_regime);
    const double sqrt_m = std::sqrt(static_cast<double>(m));

    RngStream const_rng = RngStream(cfg.seed).substream(~std::uint64_t{0});
    const auto constant = rud_estimate(std::vector<double>(n, 1.0), law, m, cfg.K1, cfg.K2, rs.n_sequences,
                                       const_rng, rs.options);

    auto outputs = run_tasks(plan_for(cfg, cfg.samples), [&](std::uint64_t task, std::uint64_t first,
                                                            std::uint64_t count) {
        TaskOutput out;
        json ud = json::array(), se = json::array();
        std::uint64_t violations = 0, censored = 0, failures = 0;
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto s = sample_stream(cfg.seed, task, i);
            auto vec_rng = s.substream(0);
            auto seq_rng = s.substream(1);
            CensusRow row;
            row.sample_index = first + i;
            row.seed_path = s.path_string();
            const auto x = draw_vn(params, vec_rng);
            if (!x) {
                ++failures;
                row.cause = "no_vn_draw";
                out.census.push_back(std::move(row));
                continue;
            }
            const auto est = rud_estimate(*x, law, m, cfg.K1, cfg.K2, rs.n_sequences, seq_rng, rs.options);
            ud.push_back(est.value);
            se.push_back(est.std_error);
            violations += est.value < sqrt_m - 3.0 * est.std_error;
            censored += est.censored;
            row.cause = "none";
            row.label = "Vn";
            row.findings = json{{"ud", est.value}, {"std_error", est.std_error}, {"censored", est.censored}}.dump();
            out.census.push_back(std::move(row));
        }
        out.aggregate = {{"ud", ud}, {"se", se}, {"violations", violations}, {"censored", censored},
                         {"failures", failures}};
        return out;
    });
    auto merged = merge(std::move(outputs));
    const auto& agg = merged.aggregate;
    const auto uds = doubles_of(agg, "ud");
    const auto ses = doubles_of(agg, "se");

    ExperimentReport r;
    r.estimate("mean_ud", mean_of(uds), std_error_of_mean(uds));
    if (!uds.empty()) {
        const auto it = std::min_element(uds.begin(), uds.end());
        r.estimate("min_ud", *it, ses[static_cast<std::size_t>(it - uds.begin())]);
    }
    r.estimate("constant_ud", constant.value, constant.std_error);
    std::uint64_t below_constant = 0;
    for (double v : uds) below_constant += v < constant.value;
    r.theory_value("sqrt_m", sqrt_m);
    r.theory_value("half_K1", cfg.K1 / 2.0);
    r.counts = {{"samples", cfg.samples},
                {"estimated", uds.size()},
                {"no_vn_draw", count_of(agg, "failures")},
                {"violations", count_of(agg, "violations")},
                {"censored", count_of(agg, "censored")},
                {"below_constant", below_constant}};
    r.details = {{"n", n},
                 {"m", m},
                 {"K1", cfg.K1},
                 {"K2", cfg.K2},
                 {"params_in_regime", in_regime},
                 {"constant_censored", constant.censored},
                 {"ud_quantiles", quantile_table(uds)}};
    r.census = std::move(merged.census);
    return r;
}

ExperimentReport run_kernel_profile(const ExperimentConfig& cfg) {
    const auto law = require_law(cfg);
    const auto n = cfg.get<std::size_t>("n", 24);
    const auto rs = rud_settings(cfg, 1e3, 20000);
    if (n < 4 || n > 40) fail(ErrorCode::ConfigError, "kernel_profile needs 4 <= n <= 40");
    const double p = law.p();
    const double pn = p * static_cast<double>(n);
    std::vector<std::size_t> ms;
    for (double v : {std::ceil(pn / 8.0), std::floor(8.0 * pn)}) {
        const auto mm = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(v, 1.0)), 1, n / 2);
        if (std::find(ms.begin(), ms.end(), mm) == ms.end()) ms.push_back(mm);
    }
    bool in_regime = false;
    const auto params = derive_params_relaxed(n, p, support_constants(law), cfg.calibration, in_regime);

    std::vector<RudEstimate> constant;
    for (std::size_t j = 0; j < ms.size(); ++j) {
        RngStream rng = RngStream(cfg.seed).substream(~std::uint64_t{0}).substream(j);
        constant.push_back(
            rud_estimate(std::vector<double>(n, 1.0), law, ms[j], cfg.K1, cfg.K2, rs.n_sequences, rng, rs.options));
    }

    auto outputs = run_tasks(plan_for(cfg, cfg.samples), [&](std::uint64_t task, std::uint64_t first,
                                                            std::uint64_t count) {
        TaskOutput out;
        json classes = json::object();
        json uds = json::object();
        std::uint64_t degenerate = 0, zero_scale = 0, censored = 0;
        double max_log_hadamard = std::numeric_limits<double>::lowest();
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto s = sample_stream(cfg.seed, task, i);
            auto ms_rng = s.substream(0);
            const auto mat = sample_matrix(law, n, ms_rng);
            max_log_hadamard = std::max(max_log_hadamard, log10_hadamard_bound(mat.to_double()));
            const auto ker = normal_to_trailing_columns(mat.entries);
            const bool degen = ker.dimension > 1;
            degenerate += degen;
            CensusRow row;
            row.sample_index = first + i;
            row.seed_path = s.path_string();
            row.cause = degen ? "degenerate_kernel" : "none";
            const auto x = to_double_unit_max(ker.vector);
            std::vector<double> y;
            try {
                y = normalize_upsilon(x, params);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ZeroScaleEntry) throw;
                ++zero_scale;
                merge_into(classes["zero_scale"], json(std::uint64_t{1}));
                row.label = "zero_scale";
                out.census.push_back(std::move(row));
                continue;
            }
            const auto label = classify(y, params);
            merge_into(classes[label.name()], json(std::uint64_t{1}));
            row.label = label.name();
            json f = {{"degenerate", degen}};
            for (std::size_t j = 0; j < ms.size(); ++j) {
                auto seq_rng = s.substream(1 + j);
                const auto est = rud_estimate(y, law, ms[j], cfg.K1, cfg.K2, rs.n_sequences, seq_rng, rs.options);
                uds[std::to_string(ms[j])].push_back(est.value);
                censored += est.censored;
                f["ud_m" + std::to_string(ms[j])] = est.value;
            }
            row.findings = f.dump();
            out.census.push_back(std::move(row));
        }
        out.aggregate = {{"classes", classes}, {"ud", uds}, {"degenerate", degenerate},
                         {"zero_scale", zero_scale}, {"censored", censored},
                         {"log10_hadamard", json::array({max_log_hadamard})}};
        return out;
    });
    auto merged = merge(std::move(outputs));
    const auto& agg = merged.aggregate;

    ExperimentReport r;
    json per_m = json::array();
    for (std::size_t j = 0; j < ms.size(); ++j) {
        const std::string key = std::to_string(ms[j]);
        const auto v = agg.contains("ud") ? doubles_of(agg.at("ud"), key) : std::vector<double>{};
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        const double median = quantile(sorted, 0.5);
        r.estimate("median_kernel_ud_m" + key, median, 0.0);
        r.estimate("constant_ud_m" + key, constant[j].value, constant[j].std_error);
        per_m.push_back({{"m", ms[j]},
                         {"median_ratio_to_constant", median / constant[j].value},
                         {"quantiles", quantile_table(v)}});
    }
    double max_log_h = std::numeric_limits<double>::lowest();
    for (double v : doubles_of(agg, "log10_hadamard")) max_log_h = std::max(max_log_h, v);
    r.theory_value("max_log10_hadamard_bound", max_log_h);
    r.counts = {{"samples", cfg.samples},
                {"classes", agg.contains("classes") ? agg.at("classes") : json::object()},
                {"degenerate_kernel", count_of(agg, "degenerate")},
                {"zero_scale", count_of(agg, "zero_scale")},
                {"censored", count_of(agg, "censored")}};
    r.details = {{"n", n}, {"p", p}, {"m_values", ms}, {"params_in_regime", in_regime}, {"per_m", per_m}};
    r.census = std::move(merged.census);
    return r;
}

ExperimentReport run_lattice_ud(const ExperimentConfig& cfg) {
    const auto law = require_law(cfg);
    const auto n_grid = cfg.get<std::vector<std::size_t>>("n_grid", {8, 16, 32});
    const auto k = cfg.get<long>("k", 4);
    const auto m = cfg.get<std::size_t>("m", 2);
    const auto c_grid = cfg.get<std::vector<double>>("C_grid", {1.0, 2.0, 4.0, 8.0});
    const auto h = cfg.get<double>("h", 0.0);
    const auto d = cfg.get<double>("d", 1.0);
    const auto rs = rud_settings(cfg, 0.0, 200000);
    if (n_grid.empty() || c_grid.empty()) fail(ErrorCode::ConfigError, "n_grid and C_grid must be nonempty");
    if (k < 1) fail(ErrorCode::ConfigError, "k must be at least 1");
    const double c_min = *std::min_element(c_grid.begin(), c_grid.end());
    const double t_stop = static_cast<double>(k) * std::sqrt(static_cast<double>(m)) / c_min;

    std::vector<LambdaSpec> specs;
    for (auto n : n_grid) {
        if (2 * m > n) fail(ErrorCode::ConfigError, "m must satisfy m <= n/2 for every n");
        LambdaSpec spec;
        spec.n = n;
        spec.k = k;
        spec.d = d;
        spec.rho = cfg.calibration.rho;
        spec.h = h;
        const auto q = static_cast<std::size_t>(std::ceil(cfg.calibration.delta * static_cast<double>(n)));
        for (std::size_t i = 0; i < q; ++i) spec.q1.push_back(i);
        for (std::size_t i = q; i < 2 * q && i < n; ++i) spec.q2.push_back(i);
        spec.sigma.resize(n);
        std::iota(spec.sigma.begin(), spec.sigma.end(), 0);
        if (!lambda_admissible(spec)) fail(ErrorCode::EmptyLambda, "Lambda is empty at n = " + std::to_string(n));
        specs.push_back(std::move(spec));
    }
    RudOptions options = rs.options;
    // Only UD <= k sqrt(m) / C matters, so integration can stop at the largest threshold.
    options.t_max = rs.options.t_max > 0 ? std::min(rs.options.t_max, t_stop) : t_stop;

    const std::uint64_t per_n = cfg.samples;
    auto outputs = run_tasks(plan_for(cfg, per_n * specs.size()), [&](std::uint64_t task, std::uint64_t first,
                                                                     std::uint64_t count) {
        TaskOutput out;
        json hits = json::object();
        json members = json::object();
        for (std::uint64_t i = 0; i < count; ++i) {
            const std::uint64_t g = first + i;
            const std::size_t which = static_cast<std::size_t>(g / per_n);
            const auto& spec = specs[which];
            const auto s = sample_stream(cfg.seed, task, i);
            auto x_rng = s.substream(0);
            auto seq_rng = s.substream(1);
            const auto x = sample_lambda(spec, x_rng);
            const bool member = lambda_member(spec, x);
            const auto est = rud_estimate(x, law, m, cfg.K1, cfg.K2, rs.n_sequences, seq_rng, options);
            const std::string nk = std::to_string(spec.n);
            merge_into(members[nk], json(std::uint64_t{member}));
            for (std::size_t c = 0; c < c_grid.size(); ++c) {
                const double thr = static_cast<double>(k) * std::sqrt(static_cast<double>(m)) / c_grid[c];
                const bool hit = !est.censored && est.value <= thr;
                merge_into(hits[nk][std::to_string(c)], json(std::uint64_t{hit}));
            }
            CensusRow row;
            row.sample_index = g;
            row.seed_path = s.path_string();
            row.cause = "none";
            row.label = "n=" + nk;
            row.findings = json{{"ud", est.value}, {"censored", est.censored}, {"member", member}}.dump();
            out.census.push_back(std::move(row));
        }
        out.aggregate = {{"hits", hits}, {"members", members}};
        return out;
    });
    auto merged = merge(std::move(outputs));
    const auto& agg = merged.aggregate;

    ExperimentReport r;
    json trend = json::array();
    std::uint64_t non_members = 0;
    for (std::size_t c = 0; c < c_grid.size(); ++c) {
        const double thr = static_cast<double>(k) * std::sqrt(static_cast<double>(m)) / c_grid[c];
        r.theory_value("threshold_C=" + format_double(c_grid[c]), thr);
        json row = {{"C", c_grid[c]}, {"log_probability", json::array()}};
        bool decreasing = true;
        double prev = INFINITY;
        for (auto n : n_grid) {
            const std::string nk = std::to_string(n);
            std::uint64_t h_count = 0;
            if (agg.contains("hits") && agg.at("hits").contains(nk)) h_count = count_of(agg.at("hits").at(nk), std::to_string(c));
            r.proportion("p_ud_le_threshold_n=" + nk + "_C=" + format_double(c_grid[c]), h_count, per_n);
            const double prob = per_n ? static_cast<double>(h_count) / static_cast<double>(per_n) : 0.0;
            const double lp = prob > 0 ? std::log(prob) : -INFINITY;
            row["log_probability"].push_back(std::isfinite(lp) ? json(lp) : json("-inf"));
            if (!(lp <= prev)) decreasing = false;
            prev = lp;
        }
        row["nonincreasing"] = decreasing;
        trend.push_back(row);
    }
    for (auto n : n_grid) {
        const std::string nk = std::to_string(n);
        const std::uint64_t mem = agg.contains("members") ? count_of(agg.at("members"), nk) : 0;
        non_members += per_n - mem;
    }
    r.counts = {{"samples", per_n * specs.size()}, {"samples_per_n", per_n}, {"non_members", non_members}};
    r.details = {{"n_grid", n_grid}, {"k", k}, {"m", m}, {"h", h}, {"d", d}, {"C_grid", c_grid}, {"trend", trend}};
    r.census = std::move(merged.census);
    return r;
}

ExperimentReport run_concentration(const ExperimentConfig& cfg) {
    const auto law = require_law(cfg);
    const auto table_n = cfg.get<std::vector<std::size_t>>("table_n", {600, 1000, 5000});
    const auto table_p = cfg.get<std::vector<double>>("table_p", {0.09, 0.095});
    const auto table_tau = cfg.get<std::vector<double>>("table_tau", {3.0, 5.0});
    const auto norm_n = cfg.get<std::vector<std::size_t>>("norm_n", {100, 200, 400});
    const auto esum_n = cfg.get<std::size_t>("esum_n", 200);
    const double p = law.p();
    const double scale = law.scale_double();

    ExperimentReport r;
    json table = json::array();
    std::uint64_t tail_violations = 0, window_violations = 0, out_of_regime = 0;
    for (auto n : table_n)
        for (double pp : table_p)
            for (double tau : table_tau) {
                const auto b = binomial_bounds(n, pp, tau);
                const bool tail_ok = b.exact_tail <= b.upper_bound;
                const bool window_ok = b.exact_window >= b.window_bound;
                tail_violations += !tail_ok;
                window_violations += !window_ok;
                out_of_regime += !b.in_regime;
                table.push_back({{"n", n},
                                 {"p", pp},
                                 {"tau", tau},
                                 {"exact_tail", b.exact_tail},
                                 {"upper_bound", b.upper_bound},
                                 {"exact_window", b.exact_window},
                                 {"window_bound", b.window_bound},
                                 {"in_regime", b.in_regime}});
            }

    auto outputs = run_tasks(plan_for(cfg, cfg.samples), [&](std::uint64_t task, std::uint64_t first,
                                                            std::uint64_t count) {
        TaskOutput out;
        json ratios = json::object();
        std::uint64_t e_sum = 0;
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto s = sample_stream(cfg.seed, task, i);
            bool esum_done = false, esum_ok = false;
            json f = json::object();
            for (std::size_t j = 0; j < norm_n.size(); ++j) {
                auto rng = s.substream(j);
                const auto mat = sample_matrix(law, norm_n[j], rng);
                const double ratio =
                    spectral_norm_deviation(mat, law) / scale / std::sqrt(p * static_cast<double>(norm_n[j]));
                ratios[std::to_string(norm_n[j])].push_back(ratio);
                f["norm_ratio_n" + std::to_string(norm_n[j])] = ratio;
                if (norm_n[j] == esum_n && !esum_done) {
                    esum_ok = e_sum_holds(mat, law);
                    esum_done = true;
                }
            }
            if (!esum_done) {
                auto rng = s.substream(norm_n.size());
                esum_ok = e_sum_holds(sample_matrix(law, esum_n, rng), law);
            }
            e_sum += esum_ok;
            CensusRow row;
            row.sample_index = first + i;
            row.seed_path = s.path_string();
            row.cause = "none";
            row.label = esum_ok ? "e_sum" : "no_e_sum";
            row.findings = f.dump();
            out.census.push_back(std::move(row));
        }
        out.aggregate = {{"e_sum", e_sum}, {"ratios", ratios}};
        return out;
    });
    auto merged = merge(std::move(outputs));
    const auto& agg = merged.aggregate;

    r.proportion("p_e_sum", count_of(agg, "e_sum"), cfg.samples);
    r.theory_value("e_sum_bound", 1.0 - std::exp(-2.7 * p * static_cast<double>(esum_n)));
    json norms = json::array();
    std::vector<double> q99;
    for (auto n : norm_n) {
        const auto v = agg.contains("ratios") ? doubles_of(agg.at("ratios"), std::to_string(n)) : std::vector<double>{};
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        q99.push_back(quantile(sorted, 0.99));
        r.estimate("norm_ratio_mean_n=" + std::to_string(n), mean_of(v), std_error_of_mean(v));
        norms.push_back({{"n", n}, {"quantiles", quantile_table(v)}});
    }
    double spread = NAN;
    if (q99.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(q99.begin(), q99.end());
        spread = *hi / *lo;
    }
    r.counts = {{"samples", cfg.samples},
                {"e_sum", count_of(agg, "e_sum")},
                {"table_rows", table.size()},
                {"tail_violations", tail_violations},
                {"window_violations", window_violations},
                {"table_out_of_regime", out_of_regime}};
    r.details = {{"binomial_table", table},
                 {"norm_quantiles", norms},
                 {"q99_max_over_min", std::isfinite(spread) ? json(spread) : json(nullptr)},
                 {"q99_stable_within_2", std::isfinite(spread) && spread <= 2.0},
                 {"esum_n", esum_n},
                 {"p", p}};
    r.census = std::move(merged.census);
    return r;
}

ExperimentReport run_distance_kernel(const ExperimentConfig& cfg) {
    const auto s_list = cfg.get<std::vector<double>>("s_grid", {0.1, 0.5, 1.0, 2.0, 5.0});
    const auto eps_list = cfg.get<std::vector<double>>("eps_grid", {0.01, 0.05});
    const auto k_list = cfg.get<std::vector<long>>("k_grid", {50, 100});
    const auto h1 = cfg.get<double>("h1", 0.0);
    const auto h2 = cfg.get<double>("h2", 2.0);
    const auto zeta_raw = cfg.get<std::vector<std::vector<double>>>("zeta", {{1.0, 1.0}});
    const auto trials = cfg.get<std::uint64_t>("trials", 0);
    const auto enum_s = cfg.get<double>("enum_s", 0.5);
    const auto enum_eps = cfg.get<double>("enum_eps", 0.01);
    const auto enum_k = cfg.get<long>("enum_k", 100);
    std::vector<ZetaAtom> zeta;
    for (const auto& a : zeta_raw) {
        if (a.size() != 2) fail(ErrorCode::ConfigError, "zeta atoms are [value, mass] pairs");
        zeta.push_back({a[0], a[1]});
    }
    struct Point {
        double s, eps;
        long k;
    };
    std::vector<Point> points{{enum_s, enum_eps, enum_k}};
    for (double s : s_list)
        for (double e : eps_list)
            for (long k : k_list) points.push_back({s, e, k});

    auto outputs = run_tasks(plan_for(cfg, points.size()), [&](std::uint64_t task, std::uint64_t first,
                                                              std::uint64_t count) {
        TaskOutput out;
        json rows = json::array();
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto& pt = points[first + i];
            auto s = sample_stream(cfg.seed, task, i);
            const std::uint64_t t = first == 0 && i == 0 ? 0 : trials;
            const auto res = distance_kernel_check(zeta, pt.s, pt.k, h1, h2, pt.eps, t, s);
            rows.push_back({{"s", pt.s},          {"eps", pt.eps},   {"k", pt.k},
                            {"hits", res.hits},   {"total", res.total},
                            {"prob", res.empirical_prob}, {"f", res.f_bound}});
            CensusRow row;
            row.sample_index = first + i;
            row.seed_path = s.path_string();
            row.cause = "none";
            row.label = "s=" + format_double(pt.s) + " eps=" + format_double(pt.eps) + " k=" + std::to_string(pt.k);
            row.findings = json{{"prob", res.empirical_prob}, {"f", res.f_bound}}.dump();
            out.census.push_back(std::move(row));
        }
        out.aggregate = {{"rows", rows}};
        return out;
    });
    auto merged = merge(std::move(outputs));
    const auto& rows = merged.aggregate.at("rows");

    ExperimentReport r;
    const auto& e = rows.at(0);
    r.estimate("enumeration_prob", e.at("prob").get<double>(), 0.0);
    r.theory_value("enumeration_f_bound", e.at("f").get<double>());
    double c_fit = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        c_fit = std::max(c_fit, rows[i].at("prob").get<double>() / rows[i].at("f").get<double>());
    r.estimate("C_fit", c_fit, 0.0);
    r.theory_value("union_bound_constant", 12.0);
    json grid(rows.begin() + 1, rows.end());
    r.counts = {{"samples", points.size()},
                {"grid_points", points.size() - 1},
                {"enumeration_hits", e.at("hits")},
                {"enumeration_total", e.at("total")}};
    r.details = {{"h1", h1}, {"h2", h2}, {"zeta", zeta_raw}, {"trials", trials}, {"grid", grid},
                 {"mode", trials == 0 ? "enumeration" : "monte_carlo"}};
    r.census = std::move(merged.census);
    return r;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport r;
    switch (cfg.experiment) {
    case ExperimentKind::Singularity: r = run_singularity(cfg); break;
    case ExperimentKind::SminTail: r = run_smin_tail(cfg); break;
    case ExperimentKind::Events: r = run_events(cfg); break;
    case ExperimentKind::ClassifyCoverage: r = run_classify_coverage(cfg); break;
    case ExperimentKind::RudProfile: r = run_rud_profile(cfg); break;
    case ExperimentKind::KernelProfile: r = run_kernel_profile(cfg); break;
    case ExperimentKind::LatticeUd: r = run_lattice_ud(cfg); break;
    case ExperimentKind::Concentration: r = run_concentration(cfg); break;
    case ExperimentKind::DistanceKernel: r = run_distance_kernel(cfg); break;
    }
    r.experiment = to_string(cfg.experiment);
    r.config = cfg.echo();
    r.config_hash = cfg.hash();
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace rsing
