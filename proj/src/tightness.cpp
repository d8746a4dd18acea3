#include "spakit/tightness.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "spakit/error.hpp"
#include "spakit/precondition.hpp"
#include "spakit/spa.hpp"

namespace spakit {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw InvalidArgument(what);
    }
}

void check_reconstruction(const WorstCaseInstance& inst) {
    const Dense X = inst.X.to_dense();
    const Dense R = inst.W.to_dense() * inst.H.to_dense() + inst.N.to_dense();
    if ((R - X).norm() > 1e-14 * X.norm() * 4.0) {
        throw CertificationError(fmt::format("{} worst case: X != WH + N (residual {:.3e})",
                                             family_name(inst.family), (R - X).norm()));
    }
}

Dense pick_cols(const DataMatrix& X, const std::vector<std::size_t>& J) {
    return X.select_cols(J).to_dense();
}

double final_error(const WorstCaseInstance& inst, const std::vector<std::size_t>& J) {
    return match_error(inst.W.to_dense(), pick_cols(inst.X, J)).bottleneck_error;
}

CertificationRecord base_record(const WorstCaseInstance& inst) {
    CertificationRecord rec;
    rec.family = family_name(inst.family);
    rec.params = inst.params;
    rec.kappa = conditioning(inst.W, "W").kappa;
    return rec;
}

void require_family(const WorstCaseInstance& inst, WorstCaseFamily f) {
    if (inst.family != f) {
        throw InvalidArgument(fmt::format("certify_{}_tightness: instance belongs to the {} family", family_name(f),
                                          family_name(inst.family)));
    }
}

}  // namespace

std::string family_name(WorstCaseFamily f) {
    switch (f) {
        case WorstCaseFamily::spa:
            return "spa";
        case WorstCaseFamily::spa2:
            return "spa2";
        case WorstCaseFamily::mve:
            return "mve";
    }
    return "?";
}

double WorstCaseInstance::param(const std::string& name) const {
    for (const auto& [k, v] : params) {
        if (k == name) {
            return v;
        }
    }
    throw InvalidArgument(fmt::format("worst-case instance has no parameter '{}'", name));
}

WorstCaseInstance build_spa_worstcase(double K, double delta, double eps) {
    require(K > 0.0 && std::isfinite(K), "build_spa_worstcase: K must be positive");
    require(delta > 0.0 && delta < 0.25, "build_spa_worstcase: delta must lie in (0, 1/4)");
    require(eps > 0.0 && eps < K * delta * delta / 3.0, "build_spa_worstcase: eps must lie in (0, K delta^2 / 3)");

    const double rd = std::sqrt(0.25 + delta * delta);
    const double t = rd - 2.0 * eps / K;
    const double g2 = t * t - 0.25;
    if (!(g2 > 0.0)) {
        throw InvalidArgument("build_spa_worstcase: gamma^2 <= 0");
    }
    const double gamma = std::sqrt(g2);
    const double rg = std::sqrt(0.25 + gamma * gamma);
    const double a = 0.5 * (1.0 - gamma / delta);

    Dense W(3, 3);
    W << 1.0, 0.0, 0.5,
         0.0, 0.5, 0.5,
         0.0, -delta, delta;
    W *= K;

    const double s = K - eps / rd;
    Dense X(3, 4);
    X.col(0) << K, 0.0, 0.0;
    X.col(1) << 0.0, 0.5 * s, -delta * s;
    X.col(2) << 0.5 * K, 0.5 * s, delta * s;
    X.col(3) << 0.25 * K * (1.0 - gamma / delta), 0.5 * K + 0.5 * eps / rg, -K * gamma - gamma * eps / rg;

    Dense H = Dense::Zero(3, 4);
    H.leftCols(3).setIdentity();
    H(1, 3) = 1.0 - a;
    H(2, 3) = a;

    Dense N = Dense::Zero(3, 4);
    N.col(1) << 0.0, -0.5 * eps / rd, delta * eps / rd;
    N.col(2) << 0.0, -0.5 * eps / rd, -delta * eps / rd;
    N.col(3) << 0.0, 0.5 * eps / rg, -gamma * eps / rg;

    WorstCaseInstance inst{DataMatrix(W), DataMatrix(H), DataMatrix(N), DataMatrix(X),
                           {{"K", K}, {"delta", delta}, {"eps", eps}, {"gamma", gamma}},
                           WorstCaseFamily::spa, {1.0 / (8.0 * delta), 8.0 / delta}};
    check_reconstruction(inst);
    return inst;
}

CertificationRecord certify_spa_tightness(const WorstCaseInstance& inst) {
    require_family(inst, WorstCaseFamily::spa);
    const double delta = inst.param("delta");
    const double eps = inst.param("eps");
    CertificationRecord rec = base_record(inst);

    const ExtractionResult adv = spa(inst.X, 3, TieBreakRule::prefer(1, 3));
    if (adv.indices.size() < 2 || adv.indices[0] != 0 || adv.indices[1] != 3) {
        throw CertificationError("certify_spa_tightness: the tie-break did not reach the interior column at step 2");
    }
    rec.indices = adv.indices;

    const Dense W = inst.W.to_dense();
    const Vector v = inst.X.col(3);
    rec.measured_error = (W.colwise() - v).colwise().norm().minCoeff();

    const double b1 = eps / (4.0 * delta * delta) - eps;
    const double b2 = 3.0 * eps / (16.0 * delta * delta);
    const double b3 = 3.0 * eps / 16.0 * rec.kappa * rec.kappa / 64.0;
    rec.bounds = {{"eps/(4delta^2)-eps", b1}, {"3eps/(16delta^2)", b2}, {"(3eps/16)kappa^2/64", b3}};
    rec.analytic_bound = b1;
    rec.pass = rec.measured_error >= b1 && b1 >= b2 && b2 >= b3;

    const ExtractionResult low = spa(inst.X, 3);
    rec.lowest_index_indices = low.indices;
    rec.lowest_index_error = final_error(inst, low.indices);
    return rec;
}

WorstCaseInstance build_spa2_worstcase(double M, double delta, double eps) {
    require(M > 0.0 && std::isfinite(M), "build_spa2_worstcase: M must be positive");
    require(delta > 0.0 && delta < 0.5, "build_spa2_worstcase: delta must lie in (0, 1/2)");
    require(eps > 0.0 && eps < delta * M / 6.0, "build_spa2_worstcase: eps must lie in (0, delta M / 6)");

    const double alpha = eps * eps / (6.0 * delta * M);
    const double z = (2.0 * eps + alpha) / (delta * M);

    Dense W(2, 2);
    W << M, 0.0,
         0.0, delta * M;
    Dense X(2, 3);
    X << M, 0.0, (2.0 * eps + alpha) / delta,
         0.0, delta * M - eps, delta * M - eps - alpha;
    Dense H(2, 3);
    H << 1.0, 0.0, z,
         0.0, 1.0, 1.0 - z;
    Dense N(2, 3);
    N << 0.0, 0.0, 0.0,
         0.0, -eps, eps;

    WorstCaseInstance inst{DataMatrix(W), DataMatrix(H), DataMatrix(N), DataMatrix(X),
                           {{"M", M}, {"delta", delta}, {"eps", eps}, {"alpha", alpha}, {"z", z}},
                           WorstCaseFamily::spa2, {1.0 / delta, 1.0 / delta}};
    check_reconstruction(inst);
    return inst;
}

CertificationRecord certify_spa2_tightness(const WorstCaseInstance& inst) {
    require_family(inst, WorstCaseFamily::spa2);
    const double delta = inst.param("delta");
    const double eps = inst.param("eps");
    CertificationRecord rec = base_record(inst);

    const Spa2Trace t = spa2_trace(inst.X, 2, TieBreakRule::prefer(0, 2));
    if (t.phase1.indices != std::vector<std::size_t>{0, 1}) {
        throw CertificationError("certify_spa2_tightness: first phase did not return (0, 1)");
    }
    if (t.phase2.indices.front() != 2) {
        throw CertificationError("certify_spa2_tightness: second phase did not start with the third column");
    }
    rec.indices = t.phase2.indices;
    rec.measured_error = final_error(inst, rec.indices);
    rec.analytic_bound = 2.0 * eps / delta;
    rec.bounds = {{"2eps/delta", rec.analytic_bound}, {"2kappa*eps", 2.0 * rec.kappa * eps}};
    rec.pass = rec.measured_error >= rec.analytic_bound && rec.measured_error >= 2.0 * rec.kappa * eps * (1.0 - 1e-12);

    const ExtractionResult low = spa2(inst.X, 2);
    rec.lowest_index_indices = low.indices;
    rec.lowest_index_error = final_error(inst, low.indices);
    return rec;
}

WorstCaseInstance build_mve_worstcase(double M, double delta, double eps) {
    require(M > 0.0 && std::isfinite(M), "build_mve_worstcase: M must be positive");
    require(delta > 0.0 && delta < 1.0, "build_mve_worstcase: delta must lie in (0, 1)");
    require(eps > 0.0 && eps < delta * M / 4.0, "build_mve_worstcase: eps must lie in (0, delta M / 4)");

    const double z = 2.0 * eps / (M * delta);

    Dense W(2, 2);
    W << M, 0.0,
         0.0, delta * M;
    Dense X(2, 3);
    X << M, 0.0, 2.0 * eps / delta,
         0.0, delta * M - eps, delta * M - eps;
    Dense H(2, 3);
    H << 1.0, 0.0, z,
         0.0, 1.0, 1.0 - z;
    Dense N(2, 3);
    N << 0.0, 0.0, 0.0,
         0.0, -eps, eps;

    WorstCaseInstance inst{DataMatrix(W), DataMatrix(H), DataMatrix(N), DataMatrix(X),
                           {{"M", M}, {"delta", delta}, {"eps", eps}, {"z", z}},
                           WorstCaseFamily::mve, {1.0 / delta, 1.0 / delta}};
    check_reconstruction(inst);
    return inst;
}

CertificationRecord certify_mve_tightness(const WorstCaseInstance& inst, double mve_tol) {
    require_family(inst, WorstCaseFamily::mve);
    const double delta = inst.param("delta");
    const double eps = inst.param("eps");
    CertificationRecord rec = base_record(inst);

    const MvePreconditioning pre = mve_precondition(inst.X, 2, mve_tol);
    const Vector p3 = pre.reduced.col(2);
    const double level = p3.dot(pre.ellipsoid.A * p3);
    const Vector norms = pre.preconditioned.colwise().norm().transpose();
    const double norm_dev = (norms.array() - 1.0).abs().maxCoeff();

    const ExtractionResult adv = spa(DataMatrix(pre.preconditioned), 2, TieBreakRule::prefer(0, 2));
    if (adv.indices.front() != 2) {
        throw CertificationError("certify_mve_tightness: the tie-break did not reach the third column at step 1");
    }
    rec.indices = adv.indices;
    rec.measured_error = final_error(inst, rec.indices);
    rec.analytic_bound = 2.0 * eps / delta;
    rec.bounds = {{"2eps/delta", rec.analytic_bound},
                  {"2kappa*eps", 2.0 * rec.kappa * eps},
                  {"x3'Ax3", level},
                  {"max|norm-1|", norm_dev}};
    rec.pass = std::abs(level - 1.0) <= 1e-6 && norm_dev <= 1e-6 && rec.measured_error >= rec.analytic_bound &&
               rec.measured_error >= 2.0 * rec.kappa * eps * (1.0 - 1e-12);

    const ExtractionResult low = mve_spa(inst.X, 2, TieBreakRule::lowest(), mve_tol);
    rec.lowest_index_indices = low.indices;
    rec.lowest_index_error = final_error(inst, low.indices);
    return rec;
}

CertificationRecord certify(const WorstCaseInstance& inst) {
    switch (inst.family) {
        case WorstCaseFamily::spa:
            return certify_spa_tightness(inst);
        case WorstCaseFamily::spa2:
            return certify_spa2_tightness(inst);
        case WorstCaseFamily::mve:
            return certify_mve_tightness(inst);
    }
    throw InvalidArgument("certify: unknown family");
}

std::pair<double, double> check_lift_conditioning(const DataMatrix& Wt, double c) {
    const Dense T = Wt.to_dense();
    const auto m = T.rows();
    const auto r = T.cols();
    if (r < 2 || m < r - 1) {
        throw InvalidArgument("check_lift_conditioning: need r >= 2 and m >= r - 1");
    }
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw InvalidArgument("check_lift_conditioning: c must be positive");
    }
    const double scale = std::max(1.0, T.colwise().norm().sum());
    if (T.rowwise().sum().norm() > 1e-12 * scale) {
        throw InvalidArgument("check_lift_conditioning: columns of Wt must average to zero");
    }

    const Vector s = singular_values(T);
    const double top = s(0);
    const double low = s(r - 2);
    const double cr = c * std::sqrt(static_cast<double>(r));
    const double inf = std::numeric_limits<double>::infinity();
    double formula;
    if (cr >= top) {
        formula = low > 0.0 ? cr / low : inf;
    } else if (cr >= low) {
        formula = low > 0.0 ? top / low : inf;
    } else {
        formula = top / cr;
    }

    Dense L(m + 1, r);
    L.topRows(m) = T;
    L.row(m).setConstant(c);
    const Vector sl = singular_values(L);
    const double direct = sl(r - 1) > 0.0 ? sl(0) / sl(r - 1) : inf;
    return {formula, direct};
}

void write_certifications_csv(std::ostream& os, std::span<const CertificationRecord> records) {
    os << "family,params,measured_error,analytic_bound,kappa,pass\n";
    for (const auto& rec : records) {
        std::string params;
        for (const auto& [k, v] : rec.params) {
            if (!params.empty()) {
                params += ';';
            }
            params += fmt::format("{}={:.17g}", k, v);
        }
        os << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{}\n", rec.family, params, rec.measured_error,
                          rec.analytic_bound, rec.kappa, rec.pass ? "true" : "false");
    }
}

}  // namespace spakit
