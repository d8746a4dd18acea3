#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "spakit/matrix.hpp"

namespace spakit {

/// mt19937_64 stream with hand-written samplers so draws are reproducible
/// across standard libraries:
///   uniform  53 high bits of the engine output times 2^-53, in [0, 1)
///   normal   Marsaglia polar method, second value of each pair cached
///   gamma    Marsaglia-Tsang; shape < 1 via gamma(shape + 1) * U^(1/shape)
///   index    rejection sampling on the raw 64-bit output
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();
    double normal();
    double gamma(double shape);
    std::uint64_t index(std::uint64_t bound);  // uniform on [0, bound)
    std::vector<std::size_t> permutation(std::size_t n);  // Fisher-Yates

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for one (experiment, trial, noise level) cell, independent of the
/// order in which cells are run.
std::uint64_t derive_seed(std::uint64_t master, int exp_id, std::size_t trial, std::size_t level);

enum class WKind { well_conditioned, ill_conditioned, rank_deficient };
enum class HKind { dirichlet, middle_points };
enum class NoiseKind { gaussian_scaled, adversarial_middle };

std::string to_string(WKind k);
std::string to_string(HKind k);
std::string to_string(NoiseKind k);

struct ExperimentConfig {
    int exp_id = 1;
    std::size_t m = 40;
    std::size_t n = 110;
    std::size_t r = 10;
    WKind w_kind = WKind::well_conditioned;
    HKind h_kind = HKind::dirichlet;
    NoiseKind noise_kind = NoiseKind::gaussian_scaled;
    double noise_level = 0.0;
    std::uint64_t seed = 0;

    /// Exp 1: 40 x 110, r = 10, uniform W, Dirichlet(0.5) H, Gaussian noise.
    /// Exp 2: as Exp 1 with singular values log-spaced in [1e-6, 1].
    /// Exp 3: 40 x 55, middle points, adversarial noise.
    /// Exp 4: as Exp 3 with m = 9 = r - 1.
    static ExperimentConfig preset(int exp_id);

    void validate() const;
};

inline constexpr double kDirichletShape = 0.5;
inline constexpr double kIllConditionedFloor = 1e-6;

struct GroundTruthInstance {
    ExperimentConfig cfg;
    DataMatrix W;
    DataMatrix H;
    DataMatrix N;
    DataMatrix X;
    std::vector<std::size_t> true_vertex_indices;  // true_vertex_indices[k] carries W(:, k)
    double epsilon_col = 0.0;                      // max_j ||N(:, j)||
};

DataMatrix gen_W(const ExperimentConfig& cfg, Rng& rng);
std::pair<DataMatrix, std::vector<std::size_t>> gen_H(const ExperimentConfig& cfg, Rng& rng);
DataMatrix gen_noise(const ExperimentConfig& cfg, const DataMatrix& W, const DataMatrix& H, Rng& rng);

/// W, then H, then N, all drawn from one stream seeded with cfg.seed.
GroundTruthInstance gen_instance(const ExperimentConfig& cfg);

/// W.csv, H.csv, N.csv, X.csv and meta.json in dir (created if missing).
void export_instance(const GroundTruthInstance& inst, const std::filesystem::path& dir);

}  // namespace spakit
