#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/QR>

#include "spakit/error.hpp"
#include "spakit/spa.hpp"
#include "spakit/tightness.hpp"
#include "test_util.hpp"

using namespace spakit;
using Idx = std::vector<std::size_t>;

namespace {

DataMatrix triangle() {
    Dense T(2, 3);
    T << -1, 1, 0, -1, 0, 1;
    return DataMatrix(T);
}

DataMatrix eye(Eigen::Index n) { return DataMatrix(Dense(Dense::Identity(n, n))); }

// Separable X = W H + noise with the vertex columns shuffled into X.
struct Planted {
    Dense X;
    Dense W;
    Idx truth;
};

Planted planted(std::mt19937_64& g, Eigen::Index m, Eigen::Index r, Eigen::Index n, double noise) {
    Planted p;
    p.W = testutil::uniform(g, m, r);
    Dense H = testutil::separable_h(g, r, n);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g);
    Dense Hp(r, n);
    for (Eigen::Index j = 0; j < n; ++j) Hp.col(perm[static_cast<std::size_t>(j)]) = H.col(j);
    for (Eigen::Index k = 0; k < r; ++k) p.truth.push_back(static_cast<std::size_t>(perm[static_cast<std::size_t>(k)]));
    p.X = p.W * Hp + noise * testutil::gaussian(g, m, n);
    return p;
}

Idx sorted(Idx v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("spa identity") {
    const ExtractionResult res = spa(eye(3), 3);
    CHECK(res.indices == Idx{0, 1, 2});
    CHECK(res.algorithm == "spa");
    CHECK(spa(eye(3), 3, TieBreakRule::highest()).indices == Idx{2, 1, 0});
    CHECK(spa_naive(eye(3), 3).indices == Idx{0, 1, 2});
}

TEST_CASE("spa single column") {
    Dense x(2, 1);
    x << 1, 2;
    CHECK(spa_naive(DataMatrix(x), 1).indices == Idx{0});
    CHECK(spa(DataMatrix(x), 1).indices == Idx{0});
}

TEST_CASE("spa argument checks") {
    CHECK_THROWS_AS(spa(eye(3), 0), InvalidArgument);
    CHECK_THROWS_AS(spa(eye(3), 4), InvalidArgument);
    CHECK_THROWS_AS(tspa(eye(3), 4), InvalidArgument);
}

TEST_CASE("spa on the SPA2 worst case picks (0, 1)") {
    const WorstCaseInstance inst = build_spa2_worstcase(1.0, 0.4, 0.01);
    CHECK(spa(inst.X, 2).indices == Idx{0, 1});
}

TEST_CASE("spa stops on rank deficiency with partial indices") {
    try {
        spa(triangle(), 3);
        FAIL("expected RankDeficientError");
    } catch (const RankDeficientError& e) {
        CHECK(e.partial_indices().size() == 2);
        CHECK(e.algorithm() == "spa");
    }
    CHECK_THROWS_AS(spa_naive(triangle(), 3), RankDeficientError);
}

TEST_CASE("tspa triangle") {
    const ExtractionResult res = tspa(triangle(), 3);
    CHECK(res.indices.front() == 0);
    CHECK(sorted(res.indices) == Idx{0, 1, 2});
    CHECK(res.step_norms.front() == doctest::Approx(std::sqrt(2.0)));
    CHECK(tspa(triangle(), 1).indices == Idx{0});
}

TEST_CASE("tlspa triangle and identity") {
    CHECK(sorted(tlspa(triangle(), 3).indices) == Idx{0, 1, 2});
    CHECK(sorted(tlspa(eye(3), 3).indices) == Idx{0, 1, 2});
}

TEST_CASE("compute_lift_shift") {
    const LiftShiftParams p = compute_lift_shift(eye(3), 3);
    CHECK((p.v - Vector::Constant(3, 1.0 / 3.0)).cwiseAbs().maxCoeff() <= 1e-15);
    const double expect = 0.5 * (std::sqrt(2.0 / 3.0) / std::sqrt(3.0) + std::sqrt(2.0) / std::sqrt(3.0));
    CHECK(p.c == doctest::Approx(expect).epsilon(1e-14));
    CHECK(expect == doctest::Approx(0.64395).epsilon(1e-5));

    const LiftShiftParams p2 = compute_lift_shift(eye(3), 3, 2.0);
    CHECK(p2.c == doctest::Approx(2.0 * p.c).epsilon(1e-15));

    const DataMatrix same(Dense(Dense::Constant(3, 4, 0.7)));
    CHECK_THROWS_AS(compute_lift_shift(same, 2), InvalidArgument);
    CHECK_THROWS_AS(compute_lift_shift(eye(3), 3, 0.0), InvalidArgument);
}

TEST_CASE("lift_shift layout") {
    const DataMatrix Z(Dense(Dense::Zero(2, 3)));
    const Dense L = lift_shift(Z, {Vector::Zero(2), 1.0}).dense();
    CHECK(L.rows() == 3);
    CHECK(L.topRows(2).isZero());
    CHECK(L.row(2).isOnes());

    std::mt19937_64 g(3);
    const Dense X = testutil::uniform(g, 4, 6);
    const LiftShiftParams p = compute_lift_shift(DataMatrix(X), 3);
    const Dense Y = lift_shift(DataMatrix(X), p).dense();
    for (Eigen::Index j = 0; j < 6; ++j) {
        CHECK(Y.col(j).norm() == doctest::Approx(std::sqrt((X.col(j) - p.v).squaredNorm() + p.c * p.c)));
    }
}

TEST_CASE("lift commutes with stochastic H") {
    std::mt19937_64 g(11);
    for (int t = 0; t < 20; ++t) {
        const Dense W = testutil::uniform(g, 5, 4);
        const Dense H = testutil::separable_h(g, 4, 12);
        const DataMatrix X(Dense(W * H));
        const LiftShiftParams p = compute_lift_shift(X, 4);
        const Dense lhs = lift_shift(X, p).dense();
        const Dense rhs = lift_shift(DataMatrix(W), p).dense() * H;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("fast spa equals naive spa") {
    std::mt19937_64 g(200);
    int mismatches = 0;
    for (int t = 0; t < 200; ++t) {
        const Eigen::Index m = 3 + t % 12;
        const Eigen::Index n = 4 + (t * 5) % 40;
        const std::size_t r = 1 + static_cast<std::size_t>(t % std::min<Eigen::Index>(m, n));
        Dense A = testutil::gaussian(g, m, n);
        A += 1e-9 * testutil::gaussian(g, m, n);
        ExtractionResult fast;
        if (t % 2 == 0) {
            fast = spa(DataMatrix(A), r);
        } else {
            Sparse S = A.sparseView();
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index i = 0; i < m; ++i)
                    if ((i + j + t) % 3 == 0) A(i, j) = 0.0;
            S = A.sparseView();
            fast = spa(DataMatrix(S), r);
        }
        const ExtractionResult naive = spa_naive(DataMatrix(A), r);
        if (fast.indices != naive.indices) ++mismatches;
        for (std::size_t k = 0; k < r; ++k) {
            CHECK(fast.step_norms[k] == doctest::Approx(naive.step_norms[k]).epsilon(1e-8));
        }
    }
    CHECK(mismatches == 0);
}

TEST_CASE("spa matches naive on the SPA worst case for every tie rule") {
    const WorstCaseInstance inst = build_spa_worstcase(1.0, 0.1, 0.01 / 6.0);
    CHECK(spa(inst.X, 3).indices == spa_naive(inst.X, 3).indices);
    CHECK(spa(inst.X, 3, TieBreakRule::highest()).indices == spa_naive(inst.X, 3, TieBreakRule::highest()).indices);
    const TieBreakRule adv = TieBreakRule::prefer(1, 3);
    CHECK(spa(inst.X, 3, adv).indices == spa_naive(inst.X, 3, adv).indices);
}

TEST_CASE("spa orthogonal invariance and permutation equivariance") {
    std::mt19937_64 g(77);
    for (int t = 0; t < 30; ++t) {
        const Eigen::Index m = 6, n = 15;
        const Dense X = testutil::gaussian(g, m, n);
        const Idx base = spa(DataMatrix(X), 5).indices;

        const Dense Q = Eigen::HouseholderQR<Dense>(testutil::gaussian(g, m, m)).householderQ();
        CHECK(spa(DataMatrix(Dense(Q * X)), 5).indices == base);

        std::vector<std::size_t> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), g);
        Dense XP(m, n);
        for (Eigen::Index j = 0; j < n; ++j) XP.col(j) = X.col(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
        const Idx moved = spa(DataMatrix(XP), 5).indices;
        Idx back;
        for (std::size_t j : moved) back.push_back(perm[j]);
        CHECK(back == base);
    }
}

TEST_CASE("noiseless separable recovery") {
    std::mt19937_64 g(5);
    for (int t = 0; t < 20; ++t) {
        const Planted p = planted(g, 8, 5, 30, 0.0);
        const DataMatrix X(p.X);
        CHECK(sorted(spa(X, 5).indices) == sorted(p.truth));
        CHECK(sorted(tspa(X, 5).indices) == sorted(p.truth));
        CHECK(sorted(tlspa(X, 5).indices) == sorted(p.truth));
    }
}

TEST_CASE("tspa and tlspa recover r = m + 1 vertices") {
    std::mt19937_64 g(9);
    for (int t = 0; t < 20; ++t) {
        const Planted p = planted(g, 4, 5, 30, 0.0);
        const DataMatrix X(p.X);
        CHECK(sorted(tspa(X, 5).indices) == sorted(p.truth));
        CHECK(sorted(tlspa(X, 5).indices) == sorted(p.truth));
        CHECK_THROWS_AS(spa(X, 5), RankDeficientError);
    }
}

TEST_CASE("lazy lift on sparse input equals explicit lift") {
    std::mt19937_64 g(31);
    for (int t = 0; t < 20; ++t) {
        Dense A = testutil::uniform(g, 12, 25);
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            for (Eigen::Index i = 0; i < A.rows(); ++i)
                if ((i * 7 + j * 3 + t) % 4 != 0) A(i, j) = 0.0;
        const Sparse S = A.sparseView();
        const DataMatrix X(S);
        const LiftShiftParams p = compute_lift_shift(X, 6);
        const LiftShiftParams pd = compute_lift_shift(DataMatrix(A), 6);
        CHECK(p.c == doctest::Approx(pd.c).epsilon(1e-13));
        CHECK(tlspa(X, 6).indices == spa(lift_shift(DataMatrix(A), pd), 6).indices);
        CHECK(tlspa(X, 6).algorithm == "tlspa");
    }
}

TEST_CASE("adversarial tie-break contract") {
    const TieBreakRule bad = TieBreakRule::adversarial([](std::size_t, std::span<const std::size_t>) {
        return std::size_t{99};
    });
    CHECK_THROWS_AS(spa(eye(3), 1, bad), InvalidArgument);
    const TieBreakRule last = TieBreakRule::adversarial([](std::size_t, std::span<const std::size_t> c) {
        return c.back();
    });
    CHECK(spa(eye(3), 3, last).indices == Idx{2, 1, 0});
    CHECK(spa(eye(3), 3, TieBreakRule::prefer(0, 1)).indices == Idx{1, 0, 2});
}

TEST_CASE("step norms are nonnegative") {
    std::mt19937_64 g(8);
    const Planted p = planted(g, 6, 4, 20, 0.01);
    for (const auto& res : {spa(DataMatrix(p.X), 4), tspa(DataMatrix(p.X), 4), tlspa(DataMatrix(p.X), 4)}) {
        CHECK(res.step_norms.size() == 4);
        for (double s : res.step_norms) CHECK(s >= 0.0);
        const Idx s = sorted(res.indices);
        CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
    }
}
