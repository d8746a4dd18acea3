#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "spakit/error.hpp"
#include "spakit/io.hpp"
#include "spakit/synthgen.hpp"

using namespace spakit;

namespace {

ExperimentConfig cfg(int exp, double level, std::uint64_t seed) {
    ExperimentConfig c = ExperimentConfig::preset(exp);
    c.noise_level = level;
    c.seed = seed;
    return c;
}

void check_invariants(const GroundTruthInstance& g) {
    const Dense H = g.H.to_dense();
    CHECK((H.array() >= 0.0).all());
    CHECK((H.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    for (std::size_t k = 0; k < g.true_vertex_indices.size(); ++k) {
        Vector e = Vector::Zero(H.rows());
        e(static_cast<Eigen::Index>(k)) = 1.0;
        CHECK(H.col(static_cast<Eigen::Index>(g.true_vertex_indices[k])) == e);
    }
    const Dense X = g.X.to_dense();
    const Dense R = g.W.to_dense() * H + g.N.to_dense();
    CHECK((R - X).norm() <= 1e-13 * X.norm());
    CHECK(g.epsilon_col == doctest::Approx(g.N.to_dense().colwise().norm().maxCoeff()).epsilon(1e-15));
}

}  // namespace

TEST_CASE("rng is reproducible and in range") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 100; ++i) CHECK(a.index(7) < 7);
    const auto p = a.permutation(20);
    std::set<std::size_t> s(p.begin(), p.end());
    CHECK(s.size() == 20);
    CHECK(*s.rbegin() == 19);
    CHECK_THROWS_AS(a.gamma(0.0), InvalidArgument);
    CHECK_THROWS_AS(a.index(0), InvalidArgument);
}

TEST_CASE("rng moments") {
    Rng g(7);
    const int n = 200000;
    double m1 = 0, m2 = 0, gm = 0, gv = 0;
    for (int i = 0; i < n; ++i) {
        const double z = g.normal();
        m1 += z;
        m2 += z * z;
        const double x = g.gamma(0.5);
        gm += x;
        gv += (x - 0.5) * (x - 0.5);
    }
    CHECK(std::abs(m1 / n) < 0.01);
    CHECK(std::abs(m2 / n - 1.0) < 0.02);
    // Gamma(0.5, 1): mean 0.5, variance 0.5
    CHECK(std::abs(gm / n - 0.5) < 0.01);
    CHECK(std::abs(gv / n - 0.5) < 0.03);
}

TEST_CASE("derive_seed separates cells") {
    std::set<std::uint64_t> seen;
    for (int e = 1; e <= 4; ++e)
        for (std::size_t t = 0; t < 10; ++t)
            for (std::size_t l = 0; l < 10; ++l) seen.insert(derive_seed(1, e, t, l));
    CHECK(seen.size() == 400);
    CHECK(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(2, 2, 3, 4));
}

TEST_CASE("experiment config shapes") {
    CHECK(ExperimentConfig::preset(1).m == 40);
    CHECK(ExperimentConfig::preset(2).n == 110);
    CHECK(ExperimentConfig::preset(3).n == 55);
    const GroundTruthInstance g = gen_instance(cfg(4, 0.1, 3));
    CHECK(g.X.rows() == 9);
    CHECK(g.X.cols() == 55);
    CHECK_THROWS_AS(ExperimentConfig::preset(5), InvalidArgument);

    ExperimentConfig bad = ExperimentConfig::preset(3);
    bad.n = 60;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = ExperimentConfig::preset(4);
    bad.m = 10;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = ExperimentConfig::preset(1);
    bad.noise_level = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("gen_W kinds") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        Rng rng(s);
        const Dense W = gen_W(cfg(1, 0, s), rng).dense();
        CHECK((W.array() >= 0.0).all());
        CHECK((W.array() < 1.0).all());
        const Vector sv = singular_values(W);
        CHECK(sv(0) / sv(9) < 1e3);
    }
    Rng rng(5);
    const Vector sv = singular_values(gen_W(cfg(2, 0, 5), rng).dense());
    for (Eigen::Index k = 0; k < 10; ++k) {
        CHECK(sv(k) == doctest::Approx(std::pow(10.0, -6.0 * static_cast<double>(k) / 9.0)).epsilon(1e-9));
    }
    Rng rng4(6);
    const Dense W4 = gen_W(cfg(4, 0, 6), rng4).dense();
    CHECK(W4.rows() == 9);
    CHECK(W4.cols() == 10);
}

TEST_CASE("gen_H") {
    Rng rng(11);
    const auto [H, truth] = gen_H(cfg(3, 0, 11), rng);
    const Dense Hd = H.dense();
    std::set<std::size_t> t(truth.begin(), truth.end());
    for (Eigen::Index j = 0; j < Hd.cols(); ++j) {
        if (t.count(static_cast<std::size_t>(j))) continue;
        int halves = 0;
        for (Eigen::Index i = 0; i < Hd.rows(); ++i) halves += Hd(i, j) == 0.5;
        CHECK(halves == 2);
        CHECK(Hd.col(j).sum() == 1.0);
    }

    ExperimentConfig two = ExperimentConfig::preset(3);
    two.r = 2;
    two.n = 3;
    two.m = 4;
    Rng r2(1);
    const auto [H2, t2] = gen_H(two, r2);
    std::set<std::size_t> ts(t2.begin(), t2.end());
    for (Eigen::Index j = 0; j < 3; ++j)
        if (!ts.count(static_cast<std::size_t>(j))) CHECK(H2.dense().col(j) == Vector::Constant(2, 0.5));

    Rng r3(12);
    const auto [Hd3, t3] = gen_H(cfg(1, 0, 12), r3);
    CHECK((Hd3.dense().colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("dirichlet marginal means") {
    ExperimentConfig c = ExperimentConfig::preset(1);
    c.n = c.r + 10000;
    Rng rng(2024);
    const auto [H, truth] = gen_H(c, rng);
    const Dense Hd = H.dense();
    std::set<std::size_t> t(truth.begin(), truth.end());
    Vector sum = Vector::Zero(10), sq = Vector::Zero(10);
    int cnt = 0;
    for (Eigen::Index j = 0; j < Hd.cols(); ++j) {
        if (t.count(static_cast<std::size_t>(j))) continue;
        sum += Hd.col(j);
        sq += Hd.col(j).cwiseAbs2();
        ++cnt;
    }
    for (Eigen::Index i = 0; i < 10; ++i) {
        const double mean = sum(i) / cnt;
        const double se = std::sqrt((sq(i) / cnt - mean * mean) / cnt);
        CHECK(std::abs(mean - 0.1) <= 3.0 * se);
    }
}

TEST_CASE("noise models") {
    const GroundTruthInstance zero = gen_instance(cfg(1, 0.0, 1));
    CHECK(zero.N.dense().isZero(0.0));
    CHECK(zero.epsilon_col == 0.0);
    for (std::size_t k = 0; k < 10; ++k)
        CHECK(zero.X.col(zero.true_vertex_indices[k]) == zero.W.col(k));

    const GroundTruthInstance g = gen_instance(cfg(1, 0.3, 1));
    const Dense WH = g.W.dense() * g.H.dense();
    CHECK(g.N.dense().norm() / WH.norm() == doctest::Approx(0.3).epsilon(1e-12));

    const GroundTruthInstance a = gen_instance(cfg(3, 0.2, 2));
    const Vector wbar = a.W.dense().rowwise().mean();
    std::set<std::size_t> t(a.true_vertex_indices.begin(), a.true_vertex_indices.end());
    const Dense WHa = a.W.dense() * a.H.dense();
    for (Eigen::Index j = 0; j < 55; ++j) {
        if (t.count(static_cast<std::size_t>(j))) {
            CHECK(a.N.dense().col(j).isZero(0.0));
        } else {
            CHECK((a.N.dense().col(j) - 0.2 * (WHa.col(j) - wbar)).norm() <= 1e-15);
        }
    }
}

TEST_CASE("instances satisfy invariants and are deterministic") {
    for (int e = 1; e <= 4; ++e) {
        for (double d : {0.0, 0.01, 0.5}) {
            const GroundTruthInstance g = gen_instance(cfg(e, d, 100 + e));
            check_invariants(g);
            const GroundTruthInstance h = gen_instance(cfg(e, d, 100 + e));
            CHECK(g.X.dense() == h.X.dense());
            CHECK(g.true_vertex_indices == h.true_vertex_indices);
        }
    }
    CHECK(gen_instance(cfg(1, 0.1, 1)).X.dense() != gen_instance(cfg(1, 0.1, 2)).X.dense());
}

TEST_CASE("export instance") {
    const auto dir = std::filesystem::temp_directory_path() / "spakit_test_export";
    std::filesystem::remove_all(dir);
    const GroundTruthInstance g = gen_instance(cfg(3, 0.1, 9));
    export_instance(g, dir);
    for (const char* f : {"W.csv", "H.csv", "N.csv", "X.csv", "meta.json"}) CHECK(std::filesystem::exists(dir / f));
    CHECK(io::read_csv(dir / "X.csv").dense() == g.X.dense());
    std::ifstream in(dir / "meta.json");
    const auto meta = nlohmann::json::parse(in);
    CHECK(meta["seed"].get<std::uint64_t>() == 9);
    CHECK(meta["h_kind"] == "middle-points");
    CHECK(meta["true_vertex_indices"].get<std::vector<std::size_t>>() == g.true_vertex_indices);
    std::filesystem::remove_all(dir);
}
