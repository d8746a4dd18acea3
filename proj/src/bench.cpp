#include "spakit/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "spakit/error.hpp"
#include "spakit/precondition.hpp"

namespace spakit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::array<Algorithm, 6> kBenchAlgorithms = {Algorithm::spa,   Algorithm::tspa, Algorithm::faw,
                                                       Algorithm::tlspa, Algorithm::spa2, Algorithm::tlspa2};

Dense lifted_w(const Dense& W, const LiftShiftParams& p) {
    Dense Wl(W.rows() + 1, W.cols());
    Wl.topRows(W.rows()) = W.colwise() - p.v;
    Wl.bottomRows(1).setConstant(p.c);
    return Wl;
}

std::size_t max_norm_column(const DataMatrix& X) {
    const Vector norms = column_norms(X);
    Eigen::Index p = 0;
    for (Eigen::Index j = 1; j < norms.size(); ++j)
        if (norms(j) > norms(p)) p = j;
    return static_cast<std::size_t>(p);
}

TrialRecord evaluate(Algorithm a, const GroundTruthInstance& inst, std::size_t trial) {
    TrialRecord rec;
    rec.exp_id = inst.cfg.exp_id;
    rec.algorithm = to_string(a);
    rec.noise_level = inst.cfg.noise_level;
    rec.trial = trial;
    rec.seed = inst.cfg.seed;
    std::vector<std::size_t> idx;
    try {
        idx = run_algorithm(a, inst.X, inst.cfg.r).indices;
    } catch (const RankDeficientError& e) {
        idx = e.partial_indices();
    }
    rec.accuracy = accuracy(idx, inst.true_vertex_indices);
    rec.match_error = idx.size() == inst.cfg.r ? match_error(inst.W, inst.X.select_cols(idx)).bottleneck_error : kInf;
    rec.kappa_report = preprocessing_kappa(a, inst);
    return rec;
}

GroundTruthInstance cell_instance(const ExperimentConfig& tmpl, double level, std::uint64_t master, std::size_t trial,
                                  std::size_t level_index) {
    ExperimentConfig cfg = tmpl;
    cfg.noise_level = level;
    cfg.seed = derive_seed(master, tmpl.exp_id, trial, level_index);
    return gen_instance(cfg);
}

void check_grid_args(std::span<const double> levels, std::size_t trials) {
    if (levels.empty()) throw InvalidArgument("need at least one noise level");
    if (trials == 0) throw InvalidArgument("need at least one trial");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] >= 0.0) || !std::isfinite(levels[i])) throw InvalidArgument("noise levels must be finite and nonnegative");
        if (i > 0 && !(levels[i] > levels[i - 1])) throw InvalidArgument("noise levels must be strictly increasing");
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError(fmt::format("write failed: {}", path.string()));
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw IoError(fmt::format("line {}: bad number '{}'", line, s));
    return v;
}

unsigned long long parse_unsigned(const std::string& s, std::size_t line) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw IoError(fmt::format("line {}: bad integer '{}'", line, s));
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw IoError(fmt::format("line {}: integer out of range '{}'", line, s));
    }
}

}  // namespace

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::spa: return "spa";
        case Algorithm::tspa: return "tspa";
        case Algorithm::faw: return "faw";
        case Algorithm::tlspa: return "tlspa";
        case Algorithm::spa2: return "spa2";
        case Algorithm::tlspa2: return "tlspa2";
        case Algorithm::mve_spa: return "mve-spa";
    }
    return "?";
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
    for (Algorithm a : {Algorithm::spa, Algorithm::tspa, Algorithm::faw, Algorithm::tlspa, Algorithm::spa2,
                        Algorithm::tlspa2, Algorithm::mve_spa}) {
        if (to_string(a) == name) return a;
    }
    return std::nullopt;
}

std::span<const Algorithm> bench_algorithms() { return kBenchAlgorithms; }

ExtractionResult run_algorithm(Algorithm a, const DataMatrix& X, std::size_t r, const TieBreakRule& tb, double alpha) {
    switch (a) {
        case Algorithm::spa: return spa(X, r, tb);
        case Algorithm::tspa: return tspa(X, r, tb);
        case Algorithm::faw: return faw(X, r, tb);
        case Algorithm::tlspa: return tlspa(X, r, tb, alpha);
        case Algorithm::spa2: return spa2(X, r, tb);
        case Algorithm::tlspa2: return tlspa2(X, r, tb, alpha);
        case Algorithm::mve_spa: return mve_spa(X, r, tb);
    }
    throw InvalidArgument("unknown algorithm");
}

double accuracy(std::span<const std::size_t> indices, std::span<const std::size_t> truth) {
    if (truth.empty()) throw InvalidArgument("accuracy: empty ground truth");
    const std::set<std::size_t> t(truth.begin(), truth.end());
    const std::set<std::size_t> got(indices.begin(), indices.end());
    std::size_t hits = 0;
    for (std::size_t j : got) hits += t.count(j);
    return static_cast<double>(hits) / static_cast<double>(t.size());
}

double accuracy(const ExtractionResult& result, const GroundTruthInstance& truth) {
    return accuracy(result.indices, truth.true_vertex_indices);
}

double preprocessing_kappa(Algorithm a, const GroundTruthInstance& inst, double alpha) {
    const Dense W = inst.W.to_dense();
    const std::size_t r = static_cast<std::size_t>(W.cols());
    const DataMatrix& X = inst.X;
    try {
        switch (a) {
            case Algorithm::spa:
                return conditioning(W, "spa", r).kappa;
            case Algorithm::tspa:
            case Algorithm::faw: {
                if (r < 2) throw InvalidArgument("translated conditioning needs r >= 2");
                const Dense Wt = W.colwise() - X.col(max_norm_column(X));
                return conditioning(Wt, "tspa", r - 1).kappa;
            }
            case Algorithm::tlspa:
                return conditioning(lifted_w(W, compute_lift_shift(X, r, alpha)), "tlspa", r).kappa;
            case Algorithm::spa2: {
                const std::vector<std::size_t> J = spa(X, r).indices;
                return conditioning(pinv_apply(X.select_cols(J), inst.W), "spa2", r).kappa;
            }
            case Algorithm::tlspa2: {
                const LiftShiftParams p = compute_lift_shift(X, r, alpha);
                const DataMatrix Xl = lift_shift(X, p);
                const std::vector<std::size_t> J = spa(Xl, r).indices;
                return conditioning(pinv_apply(Xl.select_cols(J), DataMatrix(lifted_w(W, p))), "tlspa2", r).kappa;
            }
            case Algorithm::mve_spa: {
                const SvdFactors f = truncated_svd(X, r);
                const MvePreconditioning mp = mve_precondition(X, r);
                return conditioning(Dense(mp.sqrt_A * f.U.transpose() * W), "mve-spa", r).kappa;
            }
        }
    } catch (const RankDeficientError&) {
        return kInf;
    }
    throw InvalidArgument("unknown algorithm");
}

std::pair<double, double> default_noise_range(int exp_id) {
    switch (exp_id) {
        case 1:
        case 3:
        case 4: return {1e-3, 1.0};
        case 2: return {1e-7, 1.0};
        default: throw InvalidArgument(fmt::format("unknown experiment {} (expected 1..4)", exp_id));
    }
}

std::vector<double> noise_grid(double lo, double hi, std::size_t levels) {
    if (levels < 2) throw InvalidArgument("noise grid needs at least two levels");
    if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) throw InvalidArgument("noise grid needs 0 < lo < hi");
    std::vector<double> g(levels);
    const double step = std::log10(hi / lo) / static_cast<double>(levels - 1);
    for (std::size_t i = 0; i < levels; ++i) g[i] = lo * std::pow(10.0, step * static_cast<double>(i));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> noise_grid(int exp_id, std::size_t levels) {
    const auto [lo, hi] = default_noise_range(exp_id);
    return noise_grid(lo, hi, levels);
}

double robustness(std::span<const double> levels, std::span<const TrialRecord> records) {
    double best = 0.0;
    for (double level : levels) {
        bool all = true;
        bool any = false;
        for (const TrialRecord& t : records) {
            if (t.noise_level != level) continue;
            any = true;
            all = all && t.accuracy == 1.0;
        }
        if (!any || !all) break;
        best = level;
    }
    return best;
}

SweepResult summarize(std::vector<TrialRecord> records) {
    SweepResult s;
    if (records.empty()) return s;
    s.exp_id = records.front().exp_id;
    s.algorithm = records.front().algorithm;
    std::set<double> levels;
    for (const TrialRecord& t : records) {
        if (t.exp_id != s.exp_id || t.algorithm != s.algorithm)
            throw InvalidArgument("summarize: records from different sweeps");
        levels.insert(t.noise_level);
    }
    s.noise_levels.assign(levels.begin(), levels.end());
    for (double level : s.noise_levels) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const TrialRecord& t : records) {
            if (t.noise_level != level) continue;
            sum += t.accuracy;
            ++count;
        }
        s.mean_accuracy.push_back(sum / static_cast<double>(count));
    }
    s.robustness = robustness(s.noise_levels, records);
    s.records = std::move(records);
    return s;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(jobs, count);
    std::vector<std::exception_ptr> errors(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<SweepResult> run_experiment(const ExperimentConfig& tmpl, std::span<const Algorithm> algorithms,
                                        std::span<const double> levels, std::size_t trials,
                                        std::uint64_t master_seed, unsigned jobs) {
    check_grid_args(levels, trials);
    if (algorithms.empty()) throw InvalidArgument("no algorithms selected");
    tmpl.validate();
    const std::size_t cells = levels.size() * trials;
    std::vector<std::vector<TrialRecord>> out(cells);
    parallel_for(cells, jobs, [&](std::size_t c) {
        const std::size_t li = c / trials, t = c % trials;
        const GroundTruthInstance inst = cell_instance(tmpl, levels[li], master_seed, t, li);
        for (Algorithm a : algorithms) out[c].push_back(evaluate(a, inst, t));
    });
    std::vector<SweepResult> sweeps;
    for (std::size_t k = 0; k < algorithms.size(); ++k) {
        std::vector<TrialRecord> recs;
        recs.reserve(cells);
        for (std::size_t c = 0; c < cells; ++c) recs.push_back(out[c][k]);
        sweeps.push_back(summarize(std::move(recs)));
    }
    return sweeps;
}

SweepResult run_sweep(const ExperimentConfig& tmpl, Algorithm a, std::size_t levels, std::size_t trials,
                      std::uint64_t master_seed, unsigned jobs) {
    const std::vector<double> grid = noise_grid(tmpl.exp_id, levels);
    const std::array<Algorithm, 1> one = {a};
    return run_experiment(tmpl, one, grid, trials, master_seed, jobs).front();
}

std::vector<double> cond_table_levels(int exp_id) {
    switch (exp_id) {
        case 1: return {0.10, 0.28, 0.46, 0.64, 0.82, 1.0};
        case 2: return {1e-6, 1.48e-5, 2.18e-4, 0.003, 0.047, 0.7};
        case 3: return {0.10, 0.16, 0.25, 0.40, 0.63, 1.0};
        case 4: return {0.01, 0.025, 0.063, 0.16, 0.40, 1.0};
        default: throw InvalidArgument(fmt::format("unknown experiment {} (expected 1..4)", exp_id));
    }
}

std::pair<double, double> mean_std(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("mean_std: no values");
    double sum = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) return {kInf, kInf};
        sum += v;
    }
    const double mean = sum / static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::vector<CondTableRow> conditioning_table(const ExperimentConfig& tmpl, std::span<const double> levels,
                                             std::size_t trials, std::uint64_t master_seed, unsigned jobs) {
    check_grid_args(levels, trials);
    tmpl.validate();
    static constexpr std::array<std::pair<Algorithm, const char*>, 5> reports = {{{Algorithm::spa, "spa"},
                                                                                  {Algorithm::tspa, "tspa-faw"},
                                                                                  {Algorithm::tlspa, "tlspa"},
                                                                                  {Algorithm::spa2, "spa2"},
                                                                                  {Algorithm::tlspa2, "tlspa2"}}};
    const std::size_t cells = levels.size() * trials;
    std::vector<std::array<double, reports.size()>> kappa(cells);
    parallel_for(cells, jobs, [&](std::size_t c) {
        const std::size_t li = c / trials, t = c % trials;
        const GroundTruthInstance inst = cell_instance(tmpl, levels[li], master_seed, t, li);
        for (std::size_t k = 0; k < reports.size(); ++k) kappa[c][k] = preprocessing_kappa(reports[k].first, inst);
    });
    std::vector<CondTableRow> rows;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        for (std::size_t k = 0; k < reports.size(); ++k) {
            std::vector<double> v;
            for (std::size_t t = 0; t < trials; ++t) v.push_back(kappa[li * trials + t][k]);
            const auto [mean, sd] = mean_std(v);
            rows.push_back({tmpl.exp_id, levels[li], reports[k].second, mean, sd});
        }
    }
    return rows;
}

std::vector<LiftSensitivityRow> lift_sensitivity(const ExperimentConfig& tmpl, std::span<const double> alphas,
                                                 std::span<const double> levels, std::size_t trials,
                                                 std::uint64_t master_seed, unsigned jobs) {
    check_grid_args(levels, trials);
    tmpl.validate();
    if (alphas.empty()) throw InvalidArgument("no alphas given");
    for (double a : alphas)
        if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("alphas must be positive");
    const std::size_t cells = levels.size() * trials;
    std::vector<std::vector<double>> kappa(cells);
    parallel_for(cells, jobs, [&](std::size_t c) {
        const std::size_t li = c / trials, t = c % trials;
        const GroundTruthInstance inst = cell_instance(tmpl, levels[li], master_seed, t, li);
        for (double a : alphas) kappa[c].push_back(preprocessing_kappa(Algorithm::tlspa, inst, a));
    });
    std::vector<LiftSensitivityRow> rows;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        std::vector<double> v;
        for (std::size_t c = 0; c < cells; ++c) v.push_back(kappa[c][k]);
        const auto [mean, sd] = mean_std(v);
        rows.push_back({tmpl.exp_id, alphas[k], mean, sd});
    }
    return rows;
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", x);
}

void emit_csv(std::ostream& os, std::span<const SweepResult> sweeps) {
    os << "exp_id,algorithm,noise_level,trial,accuracy,match_error,kappa_report,seed\n";
    for (const SweepResult& s : sweeps) {
        for (const TrialRecord& t : s.records) {
            os << t.exp_id << ',' << t.algorithm << ',' << format_number(t.noise_level) << ',' << t.trial << ','
               << format_number(t.accuracy) << ',' << format_number(t.match_error) << ','
               << format_number(t.kappa_report) << ',' << t.seed << '\n';
        }
    }
}

void emit_csv(const std::filesystem::path& path, std::span<const SweepResult> sweeps) {
    std::ofstream out = open_out(path);
    emit_csv(out, sweeps);
    finish(out, path);
}

std::vector<SweepResult> parse_sweep_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "exp_id,algorithm,noise_level,trial,accuracy,match_error,kappa_report,seed")
        throw IoError("sweep csv: missing or unexpected header");
    std::vector<std::pair<std::pair<int, std::string>, std::vector<TrialRecord>>> groups;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != 8) throw IoError(fmt::format("line {}: expected 8 fields, got {}", lineno, f.size()));
        TrialRecord t;
        t.exp_id = static_cast<int>(parse_unsigned(f[0], lineno));
        t.algorithm = f[1];
        t.noise_level = parse_double(f[2], lineno);
        t.trial = static_cast<std::size_t>(parse_unsigned(f[3], lineno));
        t.accuracy = parse_double(f[4], lineno);
        t.match_error = parse_double(f[5], lineno);
        t.kappa_report = parse_double(f[6], lineno);
        t.seed = parse_unsigned(f[7], lineno);
        const std::pair<int, std::string> key{t.exp_id, t.algorithm};
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
            groups.push_back({key, {}});
            it = std::prev(groups.end());
        }
        it->second.push_back(std::move(t));
    }
    std::vector<SweepResult> out;
    for (auto& g : groups) out.push_back(summarize(std::move(g.second)));
    return out;
}

std::vector<SweepResult> parse_sweep_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
    return parse_sweep_csv(in);
}

void emit_summary_csv(std::ostream& os, std::span<const SweepResult> sweeps) {
    os << "exp_id,algorithm,robustness\n";
    for (const SweepResult& s : sweeps) os << s.exp_id << ',' << s.algorithm << ',' << format_number(s.robustness) << '\n';
}

void emit_summary_csv(const std::filesystem::path& path, std::span<const SweepResult> sweeps) {
    std::ofstream out = open_out(path);
    emit_summary_csv(out, sweeps);
    finish(out, path);
}

void emit_cond_table_csv(std::ostream& os, std::span<const CondTableRow> rows) {
    os << "exp_id,noise_level,algorithm,mean_kappa,std_kappa\n";
    for (const CondTableRow& r : rows)
        os << r.exp_id << ',' << format_number(r.noise_level) << ',' << r.algorithm << ',' << format_number(r.mean_kappa)
           << ',' << format_number(r.std_kappa) << '\n';
}

void emit_lift_sensitivity_csv(std::ostream& os, std::span<const LiftSensitivityRow> rows) {
    os << "exp_id,alpha,mean_kappa,std_kappa\n";
    for (const LiftSensitivityRow& r : rows)
        os << r.exp_id << ',' << format_number(r.alpha) << ',' << format_number(r.mean_kappa) << ','
           << format_number(r.std_kappa) << '\n';
}

void emit_svg_lineplot(std::ostream& os, std::span<const SweepResult> sweeps, const std::string& title, int width,
                       int height) {
    static constexpr std::array<const char*, 8> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                           "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    const double left = 70, right = 170, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;

    double lo = kInf, hi = 0.0;
    for (const SweepResult& s : sweeps)
        for (double x : s.noise_levels)
            if (x > 0.0) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
    if (!(hi > 0.0)) {
        lo = 1e-3;
        hi = 1.0;
    }
    double d0 = std::floor(std::log10(lo)), d1 = std::ceil(std::log10(hi));
    if (d1 <= d0) d1 = d0 + 1;
    const auto px = [&](double x) { return left + pw * (std::log10(x) - d0) / (d1 - d0); };
    const auto py = [&](double y) { return top + ph * (1.0 - y); };

    os << fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n",
        width, height);
    os << fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
    if (!title.empty())
        os << fmt::format("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
                          left + pw / 2, xml_escape(title));
    os << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left, top, pw, ph);
    for (double d = d0; d <= d1; d += 1.0) {
        const double x = left + pw * (d - d0) / (d1 - d0);
        os << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#dddddd\"/>\n", x, top, top + ph);
        os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">1e{}</text>\n",
                          x, top + ph + 18, static_cast<int>(d));
    }
    for (int k = 0; k <= 4; ++k) {
        const double y = py(k / 4.0);
        os << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#dddddd\"/>\n", left, y, left + pw);
        os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{:.2f}</text>\n",
                          left - 6, y + 4, k / 4.0);
    }
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">noise level</text>\n",
                      left + pw / 2, height - 15);
    os << fmt::format("<text x=\"18\" y=\"{0}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
                      "transform=\"rotate(-90 18 {0})\">accuracy</text>\n",
                      top + ph / 2);
    for (std::size_t k = 0; k < sweeps.size(); ++k) {
        const SweepResult& s = sweeps[k];
        const char* color = palette[k % palette.size()];
        std::string pts;
        for (std::size_t i = 0; i < s.noise_levels.size() && i < s.mean_accuracy.size(); ++i) {
            if (!(s.noise_levels[i] > 0.0)) continue;
            if (!pts.empty()) pts += ' ';
            pts += fmt::format("{:.2f},{:.2f}", px(s.noise_levels[i]), py(s.mean_accuracy[i]));
        }
        os << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", color, pts);
        const double ly = top + 10 + 20.0 * static_cast<double>(k);
        os << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                          left + pw + 15, ly, left + pw + 40, color);
        os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                          left + pw + 46, ly + 4, xml_escape(s.algorithm));
    }
    os << "</svg>\n";
}

void emit_svg_lineplot(const std::filesystem::path& path, std::span<const SweepResult> sweeps, const std::string& title,
                       int width, int height) {
    std::ofstream out = open_out(path);
    emit_svg_lineplot(out, sweeps, title, width, height);
    finish(out, path);
}

}  // namespace spakit
