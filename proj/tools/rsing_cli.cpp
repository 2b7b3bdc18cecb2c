#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "rsing/config.hpp"
#include "rsing/distribution.hpp"
#include "rsing/errors.hpp"
#include "rsing/experiments.hpp"
#include "rsing/report.hpp"
#include "rsing/rud.hpp"
#include "rsing/sampling.hpp"
#include "rsing/vector_classes.hpp"

using namespace rsing;

namespace {

// Used by `rud` and `levy` when no law file is given: xi uniform on {-1, 1}.
constexpr const char* kDefaultLaw = "name: sym3\n0 : 0.7\n1 : 0.15\n-1 : 0.15\n";

struct ExperimentFlags {
    std::string config;
    std::string law;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::uint64_t samples = 0;
    std::uint64_t task_size = 0;
    std::string out;
    std::vector<std::string> overrides;
    bool resume = false;
    bool timing = false;
};

int exit_code_for(ErrorCode c) {
    switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidLaw:
    case ErrorCode::DegenerateLaw:
    case ErrorCode::AmbiguousMode:
    case ErrorCode::OutOfRegime: return 2;
    case ErrorCode::AuditFailure: return 3;
    default: return 1;
    }
}

DiscreteLaw law_or_default(const std::string& path) {
    if (path.empty()) {
        std::istringstream in(kDefaultLaw);
        return standardize(RawPmf::parse(in));
    }
    if (!std::filesystem::exists(path)) fail(ErrorCode::ConfigError, "law file not found: " + path);
    return load_law(path);
}

std::vector<std::vector<double>> read_vectors(const std::string& path) {
    if (path == "-") return read_vector_batch(std::cin);
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ConfigError, "cannot open vector file: " + path);
    return read_vector_batch(in);
}

int run_experiment_command(ExperimentKind kind, const ExperimentFlags& f, CLI::App& sub) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        cfg = load_config(f.config);
        if (cfg.experiment != kind)
            fail(ErrorCode::ConfigError, f.config + " configures '" + to_string(cfg.experiment) + "', not '" +
                                             to_string(kind) + "'");
    } else {
        cfg.experiment = kind;
    }
    if (!f.law.empty()) {
        cfg.law_ref = f.law;
        cfg.law_path = f.law;
    }
    if (sub.count("--seed")) cfg.seed = f.seed;
    if (sub.count("--workers")) cfg.workers = f.workers;
    if (sub.count("--samples")) cfg.samples = f.samples;
    if (sub.count("--task-size")) cfg.task_size = f.task_size;
    if (cfg.task_size == 0) fail(ErrorCode::ConfigError, "--task-size must be positive");
    for (const auto& o : f.overrides) apply_override(cfg, o);
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (cfg.out_dir.empty()) {
        const char* env = std::getenv("RSING_OUT");
        cfg.out_dir = env && *env ? env : "out";
    }
    cfg.resume = f.resume;
    cfg.timing = f.timing;

    const auto report = run_experiment(cfg);
    write_report(report, cfg.out_dir, cfg.timing);

    std::cout << report.experiment << "  config " << report.config_hash << "  -> " << cfg.out_dir.string() << '\n';
    for (const auto& e : report.estimates)
        std::cout << "  " << e.name << " = " << format_double(e.value) << " +/- " << format_double(e.std_error) << '\n';
    for (const auto& t : report.theory) std::cout << "  [theory] " << t.name << " = " << format_double(t.value) << '\n';
    if (cfg.timing) std::cout << "  runtime " << report.runtime_s << " s\n";
    return 0;
}

void add_experiment_flags(CLI::App& sub, ExperimentFlags& f) {
    sub.add_option("--config", f.config, "YAML config file");
    sub.add_option("--law", f.law, "law file (overrides the config)");
    sub.add_option("--seed", f.seed, "root seed");
    sub.add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    sub.add_option("--samples", f.samples, "number of samples");
    sub.add_option("--task-size", f.task_size, "samples per task");
    sub.add_option("--out", f.out, "output directory (default: $RSING_OUT or ./out)");
    sub.add_option("--set", f.overrides, "parameter override key=value (repeatable)");
    sub.add_flag("--resume", f.resume, "reuse finished tasks from a previous run in --out");
    sub.add_flag("--timing", f.timing, "include runtime_s in report.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random-matrix singularity lab"};
    app.require_subcommand(1);

    std::vector<std::pair<ExperimentKind, CLI::App*>> experiment_cmds;
    ExperimentFlags flags;
    for (const auto& name : experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        add_experiment_flags(*sub, flags);
        experiment_cmds.emplace_back(parse_experiment(name), sub);
    }

    // classify
    std::string cl_vectors, cl_law;
    double cl_p = 0.0;
    bool cl_exhaustive = false;
    auto* classify_cmd = app.add_subcommand("classify", "label vectors as T0-T3, R1/R2, Vn or Unclassified");
    classify_cmd->add_option("--vectors", cl_vectors, "file with one vector per line ('-' for stdin)")->required();
    classify_cmd->add_option("--law", cl_law, "law file supplying C1, C2, gamma")->required();
    classify_cmd->add_option("--p", cl_p, "sparsity p")->required();
    classify_cmd->add_flag("--exhaustive-r", cl_exhaustive, "scan every k in the R window");

    // rud
    std::string rud_vector, rud_law, rud_curve;
    std::size_t rud_m = 1;
    double rud_k1 = 10.0, rud_k2 = 8.0, rud_panel = RudOptions{}.panel_factor;
    std::uint64_t rud_sequences = 0, rud_seed = 0;
    auto* rud_cmd = app.add_subcommand("rud", "randomized unstructured degree of one vector");
    rud_cmd->add_option("--vector", rud_vector, "file holding the vector")->required();
    rud_cmd->add_option("--m", rud_m, "number of blocks, 1 <= m <= n/2")->required();
    rud_cmd->add_option("--k1", rud_k1, "K1");
    rud_cmd->add_option("--k2", rud_k2, "K2 (>= 2)");
    rud_cmd->add_option("--law", rud_law, "law file (default: xi uniform on {-1, 1})");
    rud_cmd->add_option("--sequences", rud_sequences, "Monte Carlo sequences (default: exact when feasible)");
    rud_cmd->add_option("--seed", rud_seed, "seed for sampled sequences");
    rud_cmd->add_option("--panel-factor", rud_panel, "panel width in units of 1/L");
    rud_cmd->add_option("--curve", rud_curve, "write the (t, F) curve as CSV");

    // levy
    std::string levy_input, levy_law;
    double levy_t = 0.0;
    std::uint64_t levy_draws = 0, levy_seed = 0;
    auto* levy_cmd = app.add_subcommand("levy", "Levy concentration estimate");
    levy_cmd->add_option("--input", levy_input, "sample file, one sample per line");
    levy_cmd->add_option("--law", levy_law, "draw eta samples from this law instead (default: xi uniform on {-1, 1})");
    levy_cmd->add_option("--draws", levy_draws, "number of eta draws");
    levy_cmd->add_option("--seed", levy_seed, "seed for eta draws");
    levy_cmd->add_option("--t", levy_t, "radius")->required()->check(CLI::NonNegativeNumber);

    // sample
    std::string sm_law, sm_output;
    std::size_t sm_n = 0;
    std::uint64_t sm_seed = 0, sm_index = 0;
    auto* sample_cmd = app.add_subcommand("sample", "draw one matrix and print it as a dump");
    sample_cmd->add_option("--law", sm_law, "law file")->required();
    sample_cmd->add_option("--n", sm_n, "matrix size")->required()->check(CLI::PositiveNumber);
    sample_cmd->add_option("--seed", sm_seed, "root seed");
    sample_cmd->add_option("--index", sm_index, "substream index");
    sample_cmd->add_option("--output", sm_output, "file to write (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (auto& [kind, sub] : experiment_cmds)
            if (sub->parsed()) return run_experiment_command(kind, flags, *sub);

        if (classify_cmd->parsed()) {
            const auto law = law_or_default(cl_law);
            const auto vectors = read_vectors(cl_vectors);
            ClassifyOptions options;
            options.exhaustive_r = cl_exhaustive;
            std::size_t idx = 0;
            for (const auto& v : vectors) {
                const auto params = derive_params(v.size(), cl_p, law, Calibration{});
                try {
                    const auto label = classify(v, params, options);
                    std::cout << idx << ' ' << label.name() << ' ' << label.witness_summary() << '\n';
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::ZeroScaleEntry) throw;
                    std::cout << idx << " zero_scale -\n";
                }
                ++idx;
            }
            return 0;
        }

        if (rud_cmd->parsed()) {
            const auto law = law_or_default(rud_law);
            const auto vectors = read_vectors(rud_vector);
            if (vectors.size() != 1) fail(ErrorCode::InvalidArgument, rud_vector + " must hold exactly one vector");
            const auto& y = vectors.front();
            RudOptions options;
            options.panel_factor = rud_panel;
            RudEstimate est;
            if (rud_sequences == 0) {
                est = rud_exact(y, law, rud_m, rud_k1, rud_k2, options);
            } else {
                RngStream rng(rud_seed);
                est = rud_estimate(y, law, rud_m, rud_k1, rud_k2, rud_sequences, rng, options);
            }
            std::printf("%.12g\n", est.value);
            std::fprintf(stderr, "std_error %.6g  sequences %llu%s\n", est.std_error,
                         static_cast<unsigned long long>(est.sequences_sampled), est.censored ? "  (censored)" : "");
            if (!rud_curve.empty()) {
                std::ofstream out(rud_curve);
                out << "t,F\n";
                for (const auto& [t, F] : est.integral_curve) out << format_double(t) << ',' << format_double(F) << '\n';
            }
            return 0;
        }

        if (levy_cmd->parsed()) {
            std::vector<std::vector<double>> samples;
            if (!levy_input.empty()) {
                samples = read_vectors(levy_input);
            } else {
                if (levy_draws == 0) fail(ErrorCode::ConfigError, "levy needs --input or --draws");
                const auto law = law_or_default(levy_law);
                RngStream rng(levy_seed);
                const auto& levels = law.scaled_levels();
                const double den = static_cast<double>(law.denominator());
                for (std::uint64_t i = 0; i < levy_draws; ++i)
                    samples.push_back({static_cast<double>(levels[sample_level(law, rng)]) / den});
            }
            double value;
            if (!samples.empty() && samples.front().size() == 1) {
                std::vector<double> scalars;
                for (const auto& s : samples) scalars.push_back(s.front());
                value = levy_estimate(scalars, levy_t);
            } else {
                value = levy_estimate(samples, levy_t);
            }
            std::printf("%.12g\n", value);
            return 0;
        }

        if (sample_cmd->parsed()) {
            if (!std::filesystem::exists(sm_law)) fail(ErrorCode::ConfigError, "law file not found: " + sm_law);
            const auto law = load_law(sm_law);
            RngStream rng = RngStream(sm_seed).substream(sm_index);
            const auto m = sample_matrix(law, sm_n, rng);
            if (sm_output.empty()) {
                write_matrix_dump(std::cout, m);
            } else {
                std::ofstream out(sm_output);
                if (!out) fail(ErrorCode::ConfigError, "cannot write " + sm_output);
                write_matrix_dump(out, m);
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
