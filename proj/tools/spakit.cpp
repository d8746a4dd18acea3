// spakit command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 numerical or certification
// failure, 3 I/O error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spakit/bench.hpp"
#include "spakit/error.hpp"
#include "spakit/io.hpp"
#include "spakit/precondition.hpp"
#include "spakit/spa.hpp"
#include "spakit/theory.hpp"
#include "spakit/tightness.hpp"

using namespace spakit;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

struct ExtractOpts {
    std::string input, format = "csv", algo, tie = "lowest", out;
    std::size_t r = 0;
    double alpha = 1.0;
};

struct ExperimentOpts {
    int exp = 0;
    std::size_t trials = 0, levels = 0;
    std::uint64_t seed = 1;
    bool full = false;
    std::string out;
    unsigned jobs = 0;
};

struct TightnessOpts {
    std::string family, out;
    bool grid = false;
};

struct TheoryOpts {
    std::string check;
    std::size_t samples = 500;
    std::uint64_t seed = 1;
};

struct TableOpts {
    int exp = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 1;
    bool full = false;
    std::vector<double> levels, alphas = {0.1, 0.5, 1.0, 2.0, 10.0};
    std::string out;
    unsigned jobs = 0;
};

// Writes to `path`, or stdout when empty.
template <class F>
void with_output(const std::string& path, F&& write) {
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", path));
    write(out);
    out.flush();
    if (!out) throw IoError(fmt::format("write failed: {}", path));
}

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

int cmd_extract(const ExtractOpts& o) {
    const DataMatrix X = o.format == "mtx" ? io::read_matrix_market(std::filesystem::path(o.input))
                                           : io::read_csv(std::filesystem::path(o.input));
    const Algorithm a = *parse_algorithm(o.algo);
    const TieBreakRule tb = o.tie == "highest" ? TieBreakRule::highest() : TieBreakRule::lowest();
    ExtractionResult res;
    try {
        res = run_algorithm(a, X, o.r, tb, o.alpha);
    } catch (const RankDeficientError& e) {
        std::cerr << "error: " << e.what() << '\n';
        std::cerr << "partial indices: " << join(e.partial_indices()) << '\n';
        return kNumerical;
    }
    std::cout << join(res.indices) << '\n';
    if (!o.out.empty()) {
        with_output(o.out, [&](std::ostream& os) {
            os << "step,index,step_norm\n";
            for (std::size_t k = 0; k < res.indices.size(); ++k) {
                const double norm = k < res.step_norms.size() ? res.step_norms[k] : std::nan("");
                os << k << ',' << res.indices[k] << ',' << format_number(norm) << '\n';
            }
        });
    }
    return kOk;
}

int cmd_experiment(const ExperimentOpts& o) {
    const std::size_t trials = o.trials ? o.trials : (o.full ? kFullTrials : kReducedTrials);
    const std::size_t levels = o.levels ? o.levels : (o.full ? kFullLevels : kReducedLevels);
    const ExperimentConfig cfg = ExperimentConfig::preset(o.exp);
    const std::vector<double> grid = noise_grid(o.exp, levels);
    const std::vector<SweepResult> sweeps = run_experiment(cfg, bench_algorithms(), grid, trials, o.seed, o.jobs);

    const std::filesystem::path dir(o.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    const std::string stem = fmt::format("exp{}_", o.exp);
    emit_csv(dir / (stem + "sweep.csv"), sweeps);
    emit_summary_csv(dir / (stem + "summary.csv"), sweeps);
    emit_svg_lineplot(dir / (stem + "accuracy.svg"), sweeps, fmt::format("Exp. {}: accuracy vs noise level", o.exp));
    emit_summary_csv(std::cout, sweeps);
    return kOk;
}

std::vector<WorstCaseInstance> tightness_instances(const std::string& family, bool grid) {
    std::vector<WorstCaseInstance> out;
    if (family == "spa") {
        for (double K : grid ? std::vector<double>{1.0, 2.0} : std::vector<double>{1.0})
            for (double d : grid ? std::vector<double>{0.05, 0.1, 0.15, 0.2} : std::vector<double>{0.1})
                out.push_back(build_spa_worstcase(K, d, K * d * d / 6.0));
    } else if (family == "spa2") {
        out.push_back(build_spa2_worstcase(1.0, 0.4, 0.01));
        if (grid) {
            out.push_back(build_spa2_worstcase(1.0, 0.1, 0.1 / 12.0));
            out.push_back(build_spa2_worstcase(3.0, 0.3, 0.9 / 12.0));
            for (double d : {0.05, 0.2, 0.45}) out.push_back(build_spa2_worstcase(2.0, d, 2.0 * d / 12.0));
        }
    } else {
        out.push_back(build_mve_worstcase(1.0, 0.5, 0.1));
        if (grid) {
            out.push_back(build_mve_worstcase(2.0, 0.25, 0.25 * 2.0 / 8.0));
            for (double d : {0.1, 0.5, 0.9}) out.push_back(build_mve_worstcase(1.0, d, d / 8.0));
        }
    }
    return out;
}

int cmd_tightness(const TightnessOpts& o) {
    std::vector<CertificationRecord> records;
    for (const WorstCaseInstance& inst : tightness_instances(o.family, o.grid)) records.push_back(certify(inst));
    with_output(o.out, [&](std::ostream& os) { write_certifications_csv(os, records); });
    bool ok = true;
    for (const CertificationRecord& r : records) {
        if (!r.pass) {
            ok = false;
            std::string p;
            for (const auto& [k, v] : r.params) p += fmt::format(" {}={}", k, v);
            std::cerr << "certification failed:" << p << '\n';
        }
    }
    return ok ? kOk : kNumerical;
}

int cmd_theory(const TheoryOpts& o) {
    const TheoryReport rep = run_theory_check(o.check, o.samples, o.seed);
    std::cout << fmt::format("{} samples={} violations={} worst_ratio={} {}\n", rep.name, rep.samples, rep.violations,
                             format_number(rep.worst_ratio), rep.pass ? "PASS" : "FAIL");
    if (!rep.pass) std::cerr << "violating samples: " << join(rep.violating_samples) << '\n';
    return rep.pass ? kOk : kNumerical;
}

int cmd_cond_table(const TableOpts& o) {
    const std::size_t trials = o.trials ? o.trials : (o.full ? kFullTrials : kReducedTrials);
    const std::vector<double> levels = o.levels.empty() ? cond_table_levels(o.exp) : o.levels;
    const auto rows = conditioning_table(ExperimentConfig::preset(o.exp), levels, trials, o.seed, o.jobs);
    with_output(o.out, [&](std::ostream& os) { emit_cond_table_csv(os, rows); });
    return kOk;
}

int cmd_lift_sensitivity(const TableOpts& o) {
    const std::size_t trials = o.trials ? o.trials : (o.full ? kFullTrials : kReducedTrials);
    const std::vector<double> levels = o.levels.empty() ? cond_table_levels(o.exp) : o.levels;
    const auto rows = lift_sensitivity(ExperimentConfig::preset(o.exp), o.alphas, levels, trials, o.seed, o.jobs);
    with_output(o.out, [&](std::ostream& os) { emit_lift_sensitivity_csv(os, rows); });
    return kOk;
}

void add_table_flags(CLI::App* sub, TableOpts& o) {
    sub->add_option("--exp", o.exp, "experiment 1..4")->required()->check(CLI::Range(1, 4));
    sub->add_option("--trials", o.trials, "trials per noise level (default 10, 30 with --full-scale)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_flag("--full-scale", o.full, "30 trials");
    sub->add_option("--noise-levels", o.levels, "comma-separated noise levels (default: table levels)")
        ->delimiter(',')
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", o.out, "output CSV (default stdout)");
    sub->add_option("--jobs", o.jobs, "worker threads (default: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Successive projection algorithms for separable simplex-structured matrix factorization"};
    app.require_subcommand(1);

    ExtractOpts ex;
    auto* extract = app.add_subcommand("extract", "extract r vertex columns from a data matrix");
    extract->add_option("--input", ex.input, "data matrix file")->required();
    extract->add_option("--format", ex.format, "csv or mtx")->check(CLI::IsMember({"csv", "mtx"}));
    extract->add_option("--algo", ex.algo, "spa|tspa|tlspa|spa2|tlspa2|faw|mve-spa")
        ->required()
        ->check(CLI::IsMember({"spa", "tspa", "tlspa", "spa2", "tlspa2", "faw", "mve-spa"}));
    extract->add_option("-r", ex.r, "number of columns to extract")->required()->check(CLI::PositiveNumber);
    extract->add_option("--tie-break", ex.tie, "lowest or highest")->check(CLI::IsMember({"lowest", "highest"}));
    extract->add_option("--alpha", ex.alpha, "lift height multiplier for tlspa/tlspa2")->check(CLI::PositiveNumber);
    extract->add_option("--out", ex.out, "CSV with per-step diagnostics");

    ExperimentOpts eo;
    auto* experiment = app.add_subcommand("experiment", "noise sweep of the six algorithms on a synthetic experiment");
    experiment->add_option("--exp", eo.exp, "experiment 1..4")->required()->check(CLI::Range(1, 4));
    experiment->add_option("--trials", eo.trials, "trials per level (default 10, 30 with --full-scale)")
        ->check(CLI::PositiveNumber);
    experiment->add_option("--levels", eo.levels, "noise levels (default 21, 51 with --full-scale)")
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    experiment->add_option("--seed", eo.seed, "master seed");
    experiment->add_flag("--full-scale", eo.full, "30 trials, 51 levels");
    experiment->add_option("--out", eo.out, "output directory")->required();
    experiment->add_option("--jobs", eo.jobs, "worker threads (default: all cores)");

    TightnessOpts to;
    auto* tightness = app.add_subcommand("tightness", "build and certify worst-case instances");
    tightness->add_option("--family", to.family, "spa|spa2|mve")->required()->check(CLI::IsMember({"spa", "spa2", "mve"}));
    tightness->add_flag("--grid", to.grid, "certify a parameter grid instead of a single point");
    tightness->add_option("--out", to.out, "certification CSV (default stdout)");

    TheoryOpts th;
    auto* theory = app.add_subcommand("theory-check", "seeded property checks of the error bounds");
    theory->add_option("--check", th.check, "median-lemma|lift-cond|thm31|thm32|thm41|translated-sv")
        ->required()
        ->check(CLI::IsMember({"median-lemma", "lift-cond", "thm31", "thm32", "thm41", "translated-sv"}));
    theory->add_option("--samples", th.samples, "number of seeded instances")
        ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
    theory->add_option("--seed", th.seed, "master seed");

    TableOpts ct;
    auto* cond = app.add_subcommand("cond-table", "conditioning of W after each algorithm's preprocessing");
    add_table_flags(cond, ct);

    TableOpts ls;
    auto* lift = app.add_subcommand("lift-sensitivity", "TL-SPA conditioning against the lift multiplier");
    add_table_flags(lift, ls);
    lift->add_option("--alphas", ls.alphas, "comma-separated multipliers")->delimiter(',')->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*extract) return cmd_extract(ex);
        if (*experiment) return cmd_experiment(eo);
        if (*tightness) return cmd_tightness(to);
        if (*theory) return cmd_theory(th);
        if (*cond) return cmd_cond_table(ct);
        if (*lift) return cmd_lift_sensitivity(ls);
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const RankDeficientError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const ConvergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const CertificationError& e) {
        std::cerr << "certification failure: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}
