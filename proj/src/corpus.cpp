#include "dsm/corpus.hpp"

#include <Eigen/LU>

#include <cmath>

namespace dsm::corpus {

namespace {

Vector scalar(double x) {
    Vector v(1);
    v(0) = x;
    return v;
}

Vector vec2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

Matrix mat1(double x) {
    Matrix m(1, 1);
    m(0, 0) = x;
    return m;
}

ProblemSpec affine_1d() {
    ProblemSpec p;
    p.name = "affine-1d";
    p.dim = 1;
    p.F = [](const Vector& u) { return scalar(u(0) - 1.0); };
    p.jacobian = [](const Vector&) { return mat1(1.0); };
    p.oracle_root = scalar(1.0);
    return p;
}

ProblemSpec scaled_affine() {
    ProblemSpec p;
    p.name = "scaled-affine";
    p.dim = 1;
    p.F = [](const Vector& u) { return scalar(2.0 * u(0) - 2.0); };
    p.jacobian = [](const Vector&) { return mat1(2.0); };
    p.oracle_root = scalar(1.0);
    return p;
}

ProblemSpec cubic_monotone() {
    ProblemSpec p;
    p.name = "cubic-monotone";
    p.dim = 1;
    p.F = [](const Vector& u) { return scalar(u(0) + u(0) * u(0) * u(0) - 2.0); };
    p.jacobian = [](const Vector& u) { return mat1(1.0 + 3.0 * u(0) * u(0)); };
    p.oracle_root = scalar(1.0);
    return p;
}

ProblemSpec twobytwo() {
    ProblemSpec p;
    p.name = "twobytwo";
    p.dim = 2;
    p.F = [](const Vector& u) { return vec2(u(0) * u(0) + u(1) - 3.0, u(0) - u(1)); };
    p.jacobian = [](const Vector& u) {
        Matrix m(2, 2);
        m << 2.0 * u(0), 1.0, 1.0, -1.0;
        return m;
    };
    const double root = (std::sqrt(13.0) - 1.0) / 2.0;
    p.oracle_root = vec2(root, root);
    return p;
}

// Newton field normalized to unit residual speed; the floor keeps the field
// Lipschitz through the finite-time contact with the root.
fields::PhiField normalized_newton_field(const ProblemSpec& problem, double floor) {
    fields::PhiField field;
    field.kind = fields::Kind::Custom;
    field.evaluate = [problem, floor](double, const Vector& u) -> Vector {
        const Vector Fu = problem.evaluate(u);
        const Matrix jac = problem.jacobian_at(u);
        Eigen::PartialPivLU<Matrix> lu(jac);
        return -lu.solve(Fu) / std::max(Fu.norm(), floor);
    };
    return field;
}

// Scalar flow u' = -u|u| whose residual ||u|| obeys g' = -g^3 exactly.
fields::PhiField cubic_decay_field() {
    fields::PhiField field;
    field.kind = fields::Kind::Custom;
    field.evaluate = [](double, const Vector& u) -> Vector { return -u * u.norm(); };
    return field;
}

std::vector<CorpusEntry> build_corpus() {
    std::vector<CorpusEntry> entries;

    {
        CorpusEntry e;
        e.name = "affine-1d";
        e.notes = "F(u) = u - 1; Newton flow has the closed form u(t) = 1 - e^{-t} from u0 = 0";
        e.problem = affine_1d();
        e.recommended_ball = Ball{scalar(0.0), 2.0};
        e.recommended_fields = {fields::Kind::Newton, fields::Kind::SimpleIteration,
                                fields::Kind::Gradient, fields::Kind::GaussNewton,
                                fields::Kind::Descent};
        e.oracle_root = e.problem->oracle_root;
        entries.push_back(std::move(e));
    }
    {
        CorpusEntry e;
        e.name = "scaled-affine";
        e.notes = "F(u) = 2u - 2; simple-iteration flow is u(t) = 1 + e^{-2t} from u0 = 2";
        e.problem = scaled_affine();
        e.recommended_ball = Ball{scalar(2.0), 1.5};
        e.recommended_fields = {fields::Kind::Newton, fields::Kind::SimpleIteration,
                                fields::Kind::Gradient, fields::Kind::GaussNewton,
                                fields::Kind::Descent};
        e.oracle_root = e.problem->oracle_root;
        entries.push_back(std::move(e));
    }
    {
        CorpusEntry e;
        e.name = "cubic-monotone";
        e.notes = "F(u) = u + u^3 - 2, root 1; strongly monotone, F' >= 1 everywhere";
        e.problem = cubic_monotone();
        e.recommended_ball = Ball{scalar(1.5), 3.2};
        e.recommended_fields = {fields::Kind::Newton, fields::Kind::SimpleIteration,
                                fields::Kind::Descent};
        e.oracle_root = e.problem->oracle_root;

        monotone::MonotoneProblem mp;
        mp.name = "cubic-monotone";
        mp.dim = 1;
        mp.A = [](const Vector& u) { return scalar(u(0) + u(0) * u(0) * u(0)); };
        mp.jacobian = [](const Vector& u) { return mat1(1.0 + 3.0 * u(0) * u(0)); };
        mp.f = scalar(2.0);
        mp.oracle_root = scalar(1.0);
        e.monotone_problem = std::move(mp);
        entries.push_back(std::move(e));
    }
    {
        CorpusEntry e;
        e.name = "cubic-modified-newton";
        e.notes = "cubic-monotone started at u0 = 1.1, ball sized for the frozen-Jacobian flow";
        e.problem = cubic_monotone();
        e.recommended_ball = Ball{scalar(1.1), 0.30};
        e.recommended_fields = {fields::Kind::ModifiedNewton};
        e.oracle_root = e.problem->oracle_root;
        entries.push_back(std::move(e));
    }
    {
        CorpusEntry e;
        e.name = "twobytwo";
        e.notes = "F(u) = (u1^2 + u2 - 3, u1 - u2); root at ((sqrt(13)-1)/2, (sqrt(13)-1)/2)";
        e.problem = twobytwo();
        e.recommended_ball = Ball{vec2(1.35, 1.35), 1.0};
        e.recommended_fields = {fields::Kind::Newton, fields::Kind::Gradient,
                                fields::Kind::GaussNewton, fields::Kind::Descent};
        e.oracle_root = e.problem->oracle_root;
        entries.push_back(std::move(e));
    }
    {
        CorpusEntry e;
        e.name = "psd-linear";
        e.notes = "A = diag(1,0), f = (1,0), u0 = (0,3); null component is frozen when alpha = 0";
        linreg::SpectralOperator op;
        op.eigenvalues = vec2(1.0, 0.0);
        e.spectral = SpectralSetup{op, vec2(1.0, 0.0), vec2(0.0, 3.0)};
        e.recommended_ball = Ball{vec2(0.0, 3.0), 5.0};

        // The same operator as a monotone problem with a nontrivial null
        // direction; regularized flow selects the minimal-norm solution (1,0).
        monotone::MonotoneProblem mp;
        mp.name = "psd-linear";
        mp.dim = 2;
        mp.A = [](const Vector& u) { return vec2(u(0), 0.0); };
        mp.jacobian = [](const Vector&) {
            Matrix m(2, 2);
            m << 1.0, 0.0, 0.0, 0.0;
            return m;
        };
        mp.f = vec2(1.0, 0.0);
        mp.oracle_root = vec2(1.0, 0.0);
        e.monotone_problem = std::move(mp);
        e.oracle_root = vec2(1.0, 0.0);
        entries.push_back(std::move(e));
    }
    {
        CorpusEntry e;
        e.name = "scaled-newton-a1";
        e.notes = "Newton field on affine-1d normalized by ||F||, so the decay condition holds "
                  "with a = 1 and the residual hits zero at the finite horizon T = ||F(u0)||";
        e.problem = affine_1d();
        e.problem->name = "scaled-newton-a1";
        e.recommended_ball = Ball{scalar(3.0), 5.0};
        e.rates = make_rates(NamedRate{NamedRate::Kind::Constant, 1.0, 0.0},
                             NamedRate{NamedRate::Kind::Constant, 1.0, 0.0}, /*a=*/1.0);
        const ProblemSpec p = *e.problem;
        e.custom_field = [p]() { return normalized_newton_field(p, 1e-4); };
        e.oracle_root = scalar(1.0);
        entries.push_back(std::move(e));
    }
    {
        CorpusEntry e;
        e.name = "synthetic-a3";
        e.notes = "F(u) = u with field Phi = -u||u||: the decay condition holds with a = 3 and "
                  "the residual follows the algebraic envelope (1+t)^{-1} exactly from g0 = 1";
        ProblemSpec p;
        p.name = "synthetic-a3";
        p.dim = 1;
        p.F = [](const Vector& u) { return u; };
        p.jacobian = [](const Vector&) { return mat1(1.0); };
        p.oracle_root = scalar(0.0);
        e.problem = std::move(p);
        e.recommended_ball = Ball{scalar(1.0), 2.0};
        e.rates = make_rates(NamedRate{NamedRate::Kind::Constant, 1.0, 0.0},
                             NamedRate{NamedRate::Kind::PowerLaw, 1.0, -1.0}, /*a=*/3.0);
        e.custom_field = []() { return cubic_decay_field(); };
        e.oracle_root = scalar(0.0);
        entries.push_back(std::move(e));
    }
    {
        CorpusEntry e;
        e.name = "modified-newton-fail";
        e.notes = "cubic-monotone from u0 = 1.5: the frozen-Jacobian smallness condition fails "
                  "(negative certificate control)";
        e.problem = cubic_monotone();
        e.recommended_ball = Ball{scalar(1.5), 0.35};
        e.recommended_fields = {fields::Kind::ModifiedNewton};
        e.oracle_root = e.problem->oracle_root;
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace

const std::vector<CorpusEntry>& corpus() {
    static const std::vector<CorpusEntry> entries = build_corpus();
    return entries;
}

const CorpusEntry* find(std::string_view name) {
    for (const auto& entry : corpus()) {
        if (entry.name == name) return &entry;
    }
    return nullptr;
}

}  // namespace dsm::corpus
