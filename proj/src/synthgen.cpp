#include "spakit/synthgen.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "spakit/error.hpp"
#include "spakit/io.hpp"

namespace spakit {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) {
        throw InvalidArgument("Rng::gamma: shape must be positive");
    }
    if (shape < 1.0) {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

std::uint64_t Rng::index(std::uint64_t bound) {
    if (bound == 0) {
        throw InvalidArgument("Rng::index: empty range");
    }
    // largest multiple of bound representable, so x % bound is unbiased below it
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = i;
    }
    for (std::size_t i = n; i > 1; --i) {
        std::swap(p[i - 1], p[index(i)]);
    }
    return p;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, int exp_id, std::size_t trial, std::size_t level) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(exp_id));
    h = splitmix64(h ^ static_cast<std::uint64_t>(trial));
    return splitmix64(h ^ static_cast<std::uint64_t>(level));
}

std::string to_string(WKind k) {
    switch (k) {
        case WKind::well_conditioned:
            return "well-conditioned";
        case WKind::ill_conditioned:
            return "ill-conditioned";
        case WKind::rank_deficient:
            return "rank-deficient";
    }
    return "?";
}

std::string to_string(HKind k) { return k == HKind::dirichlet ? "dirichlet" : "middle-points"; }

std::string to_string(NoiseKind k) {
    return k == NoiseKind::gaussian_scaled ? "gaussian-scaled" : "adversarial-middle";
}

ExperimentConfig ExperimentConfig::preset(int exp_id) {
    ExperimentConfig c;
    c.exp_id = exp_id;
    c.r = 10;
    switch (exp_id) {
        case 1:
            c.m = 40;
            c.n = 110;
            break;
        case 2:
            c.m = 40;
            c.n = 110;
            c.w_kind = WKind::ill_conditioned;
            break;
        case 3:
            c.m = 40;
            c.n = 55;
            c.h_kind = HKind::middle_points;
            c.noise_kind = NoiseKind::adversarial_middle;
            break;
        case 4:
            c.m = 9;
            c.n = 55;
            c.w_kind = WKind::rank_deficient;
            c.h_kind = HKind::middle_points;
            c.noise_kind = NoiseKind::adversarial_middle;
            break;
        default:
            throw InvalidArgument(fmt::format("unknown experiment {} (expected 1..4)", exp_id));
    }
    return c;
}

void ExperimentConfig::validate() const {
    if (r < 1 || m < 1 || n < r) {
        throw InvalidArgument(fmt::format("experiment config: need m >= 1, 1 <= r <= n (m={}, n={}, r={})", m, n, r));
    }
    if (w_kind == WKind::rank_deficient && m != r - 1) {
        throw InvalidArgument("experiment config: rank-deficient W needs m = r - 1");
    }
    if (w_kind == WKind::ill_conditioned && m < r) {
        throw InvalidArgument("experiment config: ill-conditioned W needs m >= r");
    }
    if (h_kind == HKind::middle_points && n != r + r * (r - 1) / 2) {
        throw InvalidArgument(fmt::format("experiment config: middle points need n = r + r(r-1)/2 = {}",
                                          r + r * (r - 1) / 2));
    }
    if (h_kind == HKind::dirichlet && n <= r) {
        throw InvalidArgument("experiment config: Dirichlet columns need n > r");
    }
    if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
        throw InvalidArgument("experiment config: noise level must be a finite nonnegative number");
    }
}

DataMatrix gen_W(const ExperimentConfig& cfg, Rng& rng) {
    cfg.validate();
    const auto m = static_cast<Eigen::Index>(cfg.m);
    const auto r = static_cast<Eigen::Index>(cfg.r);
    Dense W(m, r);
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            W(i, j) = rng.uniform();
        }
    }
    if (cfg.w_kind == WKind::ill_conditioned) {
        const SvdFactors f = truncated_svd(W, cfg.r);
        Vector s(r);
        for (Eigen::Index k = 0; k < r; ++k) {
            const double t = r == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(r - 1);
            s(k) = std::pow(10.0, t * std::log10(kIllConditionedFloor));
        }
        W = f.U * s.asDiagonal() * f.V.transpose();
    }
    return DataMatrix(std::move(W));
}

std::pair<DataMatrix, std::vector<std::size_t>> gen_H(const ExperimentConfig& cfg, Rng& rng) {
    cfg.validate();
    const auto r = static_cast<Eigen::Index>(cfg.r);
    const auto n = static_cast<Eigen::Index>(cfg.n);
    Dense H0 = Dense::Zero(r, n);
    H0.leftCols(r).setIdentity();
    if (cfg.h_kind == HKind::dirichlet) {
        for (Eigen::Index j = r; j < n; ++j) {
            for (Eigen::Index i = 0; i < r; ++i) {
                H0(i, j) = rng.gamma(kDirichletShape);
            }
            H0.col(j) /= H0.col(j).sum();
        }
    } else {
        Eigen::Index c = r;
        for (Eigen::Index i = 0; i < r; ++i) {
            for (Eigen::Index k = i + 1; k < r; ++k, ++c) {
                H0(i, c) = 0.5;
                H0(k, c) = 0.5;
            }
        }
    }
    // column j of H0 lands at position perm[j]
    const std::vector<std::size_t> perm = rng.permutation(cfg.n);
    Dense H(r, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        H.col(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)])) = H0.col(j);
    }
    std::vector<std::size_t> truth(perm.begin(), perm.begin() + r);
    return {DataMatrix(std::move(H)), std::move(truth)};
}

DataMatrix gen_noise(const ExperimentConfig& cfg, const DataMatrix& W, const DataMatrix& H, Rng& rng) {
    cfg.validate();
    const Dense WH = W.to_dense() * H.to_dense();
    Dense N = Dense::Zero(WH.rows(), WH.cols());
    if (cfg.noise_level == 0.0) {
        return DataMatrix(std::move(N));
    }
    if (cfg.noise_kind == NoiseKind::gaussian_scaled) {
        for (Eigen::Index j = 0; j < N.cols(); ++j) {
            for (Eigen::Index i = 0; i < N.rows(); ++i) {
                N(i, j) = rng.normal();
            }
        }
        N *= cfg.noise_level * WH.norm() / N.norm();
    } else {
        const Dense Hd = H.to_dense();
        const Vector wbar = W.to_dense().rowwise().mean();
        for (Eigen::Index j = 0; j < N.cols(); ++j) {
            // vertex columns are the ones with a unit entry
            if (Hd.col(j).maxCoeff() < 1.0) {
                N.col(j) = cfg.noise_level * (WH.col(j) - wbar);
            }
        }
    }
    return DataMatrix(std::move(N));
}

GroundTruthInstance gen_instance(const ExperimentConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    DataMatrix W = gen_W(cfg, rng);
    auto [H, truth] = gen_H(cfg, rng);
    DataMatrix N = gen_noise(cfg, W, H, rng);
    const Dense Nd = N.to_dense();
    DataMatrix X(Dense(W.to_dense() * H.to_dense() + Nd));
    const double eps = Nd.colwise().norm().maxCoeff();
    return {cfg, std::move(W), std::move(H), std::move(N), std::move(X), std::move(truth), eps};
}

void export_instance(const GroundTruthInstance& inst, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    }
    io::write_csv(dir / "W.csv", inst.W.to_dense());
    io::write_csv(dir / "H.csv", inst.H.to_dense());
    io::write_csv(dir / "N.csv", inst.N.to_dense());
    io::write_csv(dir / "X.csv", inst.X.to_dense());

    const ExperimentConfig& c = inst.cfg;
    nlohmann::ordered_json meta;
    meta["exp_id"] = c.exp_id;
    meta["m"] = c.m;
    meta["n"] = c.n;
    meta["r"] = c.r;
    meta["w_kind"] = to_string(c.w_kind);
    meta["h_kind"] = to_string(c.h_kind);
    meta["noise_kind"] = to_string(c.noise_kind);
    meta["noise_level"] = c.noise_level;
    meta["seed"] = c.seed;
    meta["true_vertex_indices"] = inst.true_vertex_indices;
    meta["epsilon_col"] = inst.epsilon_col;
    std::ofstream out(dir / "meta.json");
    if (!out) {
        throw IoError(fmt::format("cannot write {}", (dir / "meta.json").string()));
    }
    out << meta.dump(2) << '\n';
    if (!out) {
        throw IoError(fmt::format("write failed: {}", (dir / "meta.json").string()));
    }
}

}  // namespace spakit
