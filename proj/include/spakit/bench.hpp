#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spakit/matrix.hpp"
#include "spakit/spa.hpp"
#include "spakit/synthgen.hpp"

namespace spakit {

enum class Algorithm { spa, tspa, faw, tlspa, spa2, tlspa2, mve_spa };

std::string to_string(Algorithm a);
/// Accepts the names produced by to_string.
std::optional<Algorithm> parse_algorithm(const std::string& name);
/// spa, tspa, faw, tlspa, spa2, tlspa2: the algorithms compared in the sweeps.
std::span<const Algorithm> bench_algorithms();

/// alpha scales the lift height of tlspa and tlspa2 and is ignored otherwise.
ExtractionResult run_algorithm(Algorithm a, const DataMatrix& X, std::size_t r, const TieBreakRule& tb = {},
                               double alpha = 1.0);

/// |indices intersect truth| / r, as sets. Partial results count what they found.
double accuracy(std::span<const std::size_t> indices, std::span<const std::size_t> truth);
double accuracy(const ExtractionResult& result, const GroundTruthInstance& truth);

/// Conditioning of the ground-truth W after the algorithm's preprocessing:
///   spa          K(W) / sigma_r(W)
///   tspa, faw    K(Wt) / sigma_{r-1}(Wt), Wt = W - x_p e^T, x_p the max-norm column of X
///   tlspa        K(Wl) / sigma_r(Wl), Wl = (W - v e^T ; c e^T)
///   spa2         kappa(X(:,J)^+ W), J from spa
///   tlspa2       kappa(Xl(:,J)^+ Wl), J from spa on the lifted X
///   mve-spa      kappa(A^{1/2} U_r^T W), U_r the leading left singular vectors of X
/// +inf when the preprocessing itself fails for rank deficiency.
double preprocessing_kappa(Algorithm a, const GroundTruthInstance& inst, double alpha = 1.0);

struct TrialRecord {
    int exp_id = 0;
    std::string algorithm;
    double noise_level = 0.0;
    std::size_t trial = 0;
    double accuracy = 0.0;
    double match_error = 0.0;  // +inf when fewer than r indices came back
    double kappa_report = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const TrialRecord&) const = default;
};

struct SweepResult {
    int exp_id = 0;
    std::string algorithm;
    std::vector<double> noise_levels;   // ascending
    std::vector<double> mean_accuracy;  // per level
    double robustness = 0.0;
    std::vector<TrialRecord> records;   // level-major, then trial

    bool operator==(const SweepResult&) const = default;
};

/// Default geometric noise range per experiment: [1e-3, 1] except Exp 2, [1e-7, 1].
std::pair<double, double> default_noise_range(int exp_id);
/// `levels` log-spaced values from lo to hi inclusive (levels >= 2).
std::vector<double> noise_grid(double lo, double hi, std::size_t levels);
std::vector<double> noise_grid(int exp_id, std::size_t levels);

/// Largest level delta such that every level up to delta has accuracy 1 in
/// every trial; 0 when the smallest level already fails.
double robustness(std::span<const double> levels, std::span<const TrialRecord> records);

/// Rebuilds noise_levels, mean_accuracy and robustness from records of one
/// (exp_id, algorithm) pair.
SweepResult summarize(std::vector<TrialRecord> records);

inline constexpr std::size_t kReducedTrials = 10;
inline constexpr std::size_t kReducedLevels = 21;
inline constexpr std::size_t kFullTrials = 30;
inline constexpr std::size_t kFullLevels = 51;

/// Runs every algorithm on the same instance for each (trial, level) cell.
/// Cell seeds come from derive_seed(master_seed, exp_id, trial, level), so
/// results do not depend on `jobs` (0 = hardware concurrency).
std::vector<SweepResult> run_experiment(const ExperimentConfig& tmpl, std::span<const Algorithm> algorithms,
                                        std::span<const double> levels, std::size_t trials,
                                        std::uint64_t master_seed, unsigned jobs = 1);

SweepResult run_sweep(const ExperimentConfig& tmpl, Algorithm a, std::size_t levels, std::size_t trials,
                      std::uint64_t master_seed, unsigned jobs = 1);

struct CondTableRow {
    int exp_id = 0;
    double noise_level = 0.0;
    std::string algorithm;  // spa, tspa-faw, tlspa, spa2, tlspa2
    double mean_kappa = 0.0;
    double std_kappa = 0.0;  // sample standard deviation; inf with any infinite trial
};

/// Default noise levels of the conditioning table for each experiment.
std::vector<double> cond_table_levels(int exp_id);

std::vector<CondTableRow> conditioning_table(const ExperimentConfig& tmpl, std::span<const double> levels,
                                             std::size_t trials, std::uint64_t master_seed, unsigned jobs = 1);

struct LiftSensitivityRow {
    int exp_id = 0;
    double alpha = 1.0;
    double mean_kappa = 0.0;  // pooled over levels and trials
    double std_kappa = 0.0;
};

std::vector<LiftSensitivityRow> lift_sensitivity(const ExperimentConfig& tmpl, std::span<const double> alphas,
                                                 std::span<const double> levels, std::size_t trials,
                                                 std::uint64_t master_seed, unsigned jobs = 1);

/// Mean and sample standard deviation; (inf, inf) if any value is not finite.
std::pair<double, double> mean_std(std::span<const double> values);

/// %.17g, with "inf" for infinity.
std::string format_number(double x);

// Sweep CSV: exp_id,algorithm,noise_level,trial,accuracy,match_error,kappa_report,seed
void emit_csv(std::ostream& os, std::span<const SweepResult> sweeps);
void emit_csv(const std::filesystem::path& path, std::span<const SweepResult> sweeps);
/// Groups by (exp_id, algorithm) in order of first appearance.
std::vector<SweepResult> parse_sweep_csv(std::istream& is);
std::vector<SweepResult> parse_sweep_csv(const std::filesystem::path& path);

// Summary CSV: exp_id,algorithm,robustness
void emit_summary_csv(std::ostream& os, std::span<const SweepResult> sweeps);
void emit_summary_csv(const std::filesystem::path& path, std::span<const SweepResult> sweeps);

// exp_id,noise_level,algorithm,mean_kappa,std_kappa
void emit_cond_table_csv(std::ostream& os, std::span<const CondTableRow> rows);
// exp_id,alpha,mean_kappa,std_kappa
void emit_lift_sensitivity_csv(std::ostream& os, std::span<const LiftSensitivityRow> rows);

/// Mean accuracy against noise level, log-x, one polyline per sweep.
void emit_svg_lineplot(std::ostream& os, std::span<const SweepResult> sweeps, const std::string& title = {},
                       int width = 960, int height = 540);
void emit_svg_lineplot(const std::filesystem::path& path, std::span<const SweepResult> sweeps,
                       const std::string& title = {}, int width = 960, int height = 540);

/// Runs body(i) for i in [0, count) on up to `jobs` threads (0 = hardware
/// concurrency). The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body);

}  // namespace spakit
