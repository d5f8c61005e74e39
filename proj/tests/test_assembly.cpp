#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "fd_support.hpp"
#include "pfrac/assembly.hpp"

using namespace pfrac;

namespace {

MaterialParams unit_material(double Gc = 1.0, double ell = 0.25) {
    // K = mu = 1
    MaterialParams m = MaterialParams::plane_strain(2.25, 0.125, Gc, ell, 0.0);
    return m;
}

Mesh unit_right_triangle() {
    Mesh mesh;
    mesh.nodes = {{0, 0}, {1, 0}, {0, 1}};
    mesh.triangles = {{0, 1, 2}};
    mesh.h = 1.0;
    return mesh;
}

}  // namespace

TEST_CASE("residual u vanishes for zero and rigid-translation states") {
    const Mesh mesh = testing::jittered_square(1.0, 0.25, 42);
    const MaterialParams mat = unit_material();
    const AssemblyContext ctx(mesh, mat.kind);

    FieldState state = FieldState::zero(mesh, mat.kind);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < state.d.size(); ++i) state.d[i] = u(rng);

    CHECK(assemble_residual_u(ctx, state, mat).cwiseAbs().maxCoeff() == 0.0);

    for (int i = 0; i < mesh.num_nodes(); ++i) {
        state.u[2 * i] = 0.37;
        state.u[2 * i + 1] = -0.21;
    }
    CHECK(assemble_residual_u(ctx, state, mat).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("one-element residual matches the hand computation") {
    const Mesh mesh = unit_right_triangle();
    const MaterialParams mat = unit_material();
    const AssemblyContext ctx(mesh, mat.kind);

    // uniform uniaxial strain eps = (e, 0, 0) imposed nodally
    const double e = 0.2;
    FieldState state = FieldState::zero(mesh, mat.kind);
    state.u[2 * 1] = e;  // u_x = e * x

    // sigma = (7e/3, e/3, 0) for K = mu = 1, d = 0; R_i = area * B_i^T sigma
    const VecX r = assemble_residual_u(ctx, state, mat);
    CHECK(r[0] == Catch::Approx(-7.0 * e / 6.0).epsilon(1e-13));
    CHECK(r[1] == Catch::Approx(-e / 6.0).epsilon(1e-13));
    CHECK(r[2] == Catch::Approx(7.0 * e / 6.0).epsilon(1e-13));
    CHECK(r[3] == Catch::Approx(0.0).margin(1e-15));
    CHECK(r[4] == Catch::Approx(0.0).margin(1e-15));
    CHECK(r[5] == Catch::Approx(e / 6.0).epsilon(1e-13));
}

TEST_CASE("one-element tangent matches B^T C B * area") {
    const Mesh mesh = unit_right_triangle();
    const MaterialParams mat = unit_material();
    const AssemblyContext ctx(mesh, mat.kind);

    FieldState state = FieldState::zero(mesh, mat.kind);
    state.u[2 * 1] = 0.2;  // tensile trace

    Eigen::Matrix<double, 3, 6> B;
    B << -1, 0, 1, 0, 0, 0,
          0, -1, 0, 0, 0, 1,
         -1, -1, 0, 1, 1, 0;
    Eigen::Matrix3d C;
    C << 7.0 / 3.0, 1.0 / 3.0, 0,
         1.0 / 3.0, 7.0 / 3.0, 0,
         0, 0, 1;
    const Eigen::MatrixXd expected = 0.5 * B.transpose() * C * B;

    const SparseSym K = assemble_K_u(ctx, state, mat);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(K.mat.coeff(i, j) == Catch::Approx(expected(i, j)).margin(1e-13));
}

TEST_CASE("residual d for constant phase field matches the lumped integral") {
    const Mesh mesh = generate_square(2.0, 0.5);
    const MaterialParams mat = unit_material(3.0, 0.2);
    const AssemblyContext ctx(mesh, mat.kind);

    SECTION("zero everywhere") {
        const FieldState state = FieldState::zero(mesh, mat.kind);
        CHECK(assemble_residual_d(ctx, state, mat).cwiseAbs().maxCoeff() == 0.0);
    }

    SECTION("constant d = c > 0, u = 0") {
        const double c = 0.35;
        FieldState state = FieldState::zero(mesh, mat.kind);
        state.d.setConstant(c);
        const VecX r = assemble_residual_d(ctx, state, mat);

        // independent oracle: Gc c / ell * (support area / 3) per node
        VecX lumped = VecX::Zero(mesh.num_nodes());
        for (int t = 0; t < mesh.num_triangles(); ++t)
            for (int k = 0; k < 3; ++k)
                lumped[mesh.triangles[t][k]] += triangle_area(mesh, t) / 3.0;
        for (int i = 0; i < mesh.num_nodes(); ++i) {
            CHECK(r[i] > 0.0);
            CHECK(r[i] == Catch::Approx(mat.Gc0 * c / mat.ell * lumped[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("finite differences of the energy match both residuals") {
    const Mesh mesh = testing::jittered_square(1.0, 0.25, 7);
    const MaterialParams mat = unit_material(2.0, 0.3);
    const AssemblyContext ctx(mesh, mat.kind);

    for (unsigned seed : {11u, 12u, 13u}) {
        const FieldState state = testing::random_state(mesh, mat.kind, seed);
        const auto ru = testing::fd_check_residual_u(ctx, state, mat);
        CHECK(ru.tested > 30);
        CHECK(ru.max_rel_err < 1e-5);
        const auto rd = testing::fd_check_residual_d(ctx, state, mat);
        CHECK(rd.max_rel_err < 1e-6);
    }

    // 2-element mesh, FD w.r.t. a single nodal d (spec oracle case)
    const Mesh two = generate_square(1.0, 0.5);
    REQUIRE(two.num_triangles() == 8);
}

TEST_CASE("finite differences of the u-residual match K_u; K_d is exact") {
    const Mesh mesh = testing::jittered_square(1.0, 0.25, 9);
    const MaterialParams mat = unit_material(2.0, 0.3);
    const AssemblyContext ctx(mesh, mat.kind);
    const FieldState state = testing::random_state(mesh, mat.kind, 21);

    const auto rep = testing::fd_check_K_u(ctx, state, mat, 5, 8);
    CHECK(rep.tested >= 4);
    CHECK(rep.max_rel_err < 1e-6);

    // R_d is affine in d, so K_d reproduces differences to round-off
    const SparseSym Kd = assemble_K_d(ctx, state, mat);
    std::mt19937 rng(33);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VecX dir(state.d.size());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = u(rng);
    const double t = 0.37;
    FieldState hi = state;
    hi.d += t * dir;
    const VecX diff = assemble_residual_d(ctx, hi, mat) - assemble_residual_d(ctx, state, mat);
    const VecX pred = t * (Kd.mat * dir);
    CHECK((diff - pred).cwiseAbs().maxCoeff() <= 1e-12 * pred.cwiseAbs().maxCoeff());
}

TEST_CASE("assembled matrices are symmetric and K_d annihilates constants") {
    const Mesh mesh = testing::jittered_square(1.0, 0.25, 15);
    const MaterialParams mat = unit_material(2.0, 0.3);
    const AssemblyContext ctx(mesh, mat.kind);
    const FieldState state = testing::random_state(mesh, mat.kind, 55);

    const SparseSym Ku = assemble_K_u(ctx, state, mat);
    const SparseSym Kd = assemble_K_d(ctx, state, mat);
    CHECK((SpMat(Ku.mat.transpose()) - Ku.mat).coeffs().cwiseAbs().maxCoeff() <
          1e-12 * Ku.mat.coeffs().cwiseAbs().maxCoeff());
    CHECK((SpMat(Kd.mat.transpose()) - Kd.mat).coeffs().cwiseAbs().maxCoeff() <
          1e-12 * Kd.mat.coeffs().cwiseAbs().maxCoeff());

    // the gradient part of K_d maps constant vectors to the mass response only
    VecX ones = VecX::Ones(mesh.num_nodes());
    VecX mass_only = VecX::Zero(mesh.num_nodes());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        double psi_plus;
        const auto& g = ctx.elements[t];
        psi_plus = psi_split(detail::element_strain(g, state.u), mat).first;
        for (int k = 0; k < 3; ++k)
            mass_only[mesh.triangles[t][k]] +=
                (2.0 * psi_plus + mat.Gc0 / mat.ell) * triangle_area(mesh, t) / 3.0;
    }
    const VecX applied = Kd.mat * ones;
    CHECK((applied - mass_only).cwiseAbs().maxCoeff() <=
          1e-12 * mass_only.cwiseAbs().maxCoeff());
}

TEST_CASE("assembly is element-order independent up to round-off") {
    const Mesh mesh = testing::jittered_square(1.0, 0.25, 19);
    Mesh permuted = mesh;
    std::mt19937 rng(4);
    std::shuffle(permuted.triangles.begin(), permuted.triangles.end(), rng);

    const MaterialParams mat = unit_material(2.0, 0.3);
    const FieldState state = testing::random_state(mesh, mat.kind, 77);
    const AssemblyContext a(mesh, mat.kind), b(permuted, mat.kind);

    const VecX ra = assemble_residual_u(a, state, mat);
    const VecX rb = assemble_residual_u(b, state, mat);
    CHECK((ra - rb).cwiseAbs().maxCoeff() <= 1e-12 * ra.cwiseAbs().maxCoeff());

    const EnergyPair ea = total_energy(a, state, mat);
    const EnergyPair eb = total_energy(b, state, mat);
    CHECK(ea.total() == Catch::Approx(eb.total()).epsilon(1e-13));
}

TEST_CASE("total energy reference values") {
    const MaterialParams mat = unit_material(100.0, 0.1);
    const Mesh mesh = generate_square(1.0, 0.25);
    const AssemblyContext ctx(mesh, mat.kind);

    FieldState state = FieldState::zero(mesh, mat.kind);
    EnergyPair e = total_energy(ctx, state, mat);
    CHECK(e.elastic == 0.0);
    CHECK(e.surface == 0.0);

    state.d.setOnes();  // d = 1, grad d = 0, unit area
    e = total_energy(ctx, state, mat);
    CHECK(e.elastic == 0.0);
    CHECK(e.surface == Catch::Approx(500.0).epsilon(1e-12));
}

TEST_CASE("max principal stress") {
    const MaterialParams mat = unit_material();
    const Mesh mesh = testing::jittered_square(1.0, 0.25, 23);
    const AssemblyContext ctx(mesh, mat.kind);

    FieldState state = FieldState::zero(mesh, mat.kind);
    CHECK(max_principal_stress(ctx, state, mat) == 0.0);

    SECTION("uniform uniaxial stress (s, 0, 0) gives s") {
        // strain that produces sigma_yy = 0 for K = mu = 1
        const double s = 0.8;
        const double exx = 7.0 * s / 16.0, eyy = -s / 16.0;
        for (int i = 0; i < mesh.num_nodes(); ++i) {
            state.u[2 * i] = exx * mesh.nodes[i].x;
            state.u[2 * i + 1] = eyy * mesh.nodes[i].y;
        }
        CHECK(max_principal_stress(ctx, state, mat) == Catch::Approx(s).epsilon(1e-12));
    }

    SECTION("pure shear (0, 0, s) gives s") {
        const double s = 0.6;  // gamma = s / mu
        for (int i = 0; i < mesh.num_nodes(); ++i) {
            state.u[2 * i] = s * mesh.nodes[i].y;
            state.u[2 * i + 1] = 0.0;
        }
        CHECK(max_principal_stress(ctx, state, mat) == Catch::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("solve_spd contract") {
    SECTION("diagonal system") {
        SparseSym K;
        K.mat.resize(3, 3);
        std::vector<Eigen::Triplet<double>> t{{0, 0, 2.0}, {1, 1, 3.0}, {2, 2, 4.0}};
        K.mat.setFromTriplets(t.begin(), t.end());
        VecX rhs(3);
        rhs << 2.0, 3.0, 4.0;
        const VecX x = solve_spd(K, rhs);
        CHECK(x[0] == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(x[1] == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(x[2] == Catch::Approx(1.0).epsilon(1e-12));
    }

    SECTION("2x2 SPD hand solve") {
        SparseSym K;
        K.mat.resize(2, 2);
        std::vector<Eigen::Triplet<double>> t{{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}};
        K.mat.setFromTriplets(t.begin(), t.end());
        VecX rhs(2);
        rhs << 1.0, 1.0;
        const VecX x = solve_spd(K, rhs);
        CHECK(x[0] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(x[1] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    }

    SECTION("constrained dofs are eliminated") {
        SparseSym K;
        K.mat.resize(2, 2);
        std::vector<Eigen::Triplet<double>> t{{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}};
        K.mat.setFromTriplets(t.begin(), t.end());
        K.constrained = {0, 1};
        VecX rhs(2);
        rhs << 3.0, 99.0;
        const VecX x = solve_spd(K, rhs);
        CHECK(x[0] == Catch::Approx(1.5).epsilon(1e-12));
        CHECK(x[1] == 0.0);
    }

    SECTION("singular system (free rigid mode) fails") {
        SparseSym K;
        K.mat.resize(2, 2);
        std::vector<Eigen::Triplet<double>> t{
            {0, 0, 1.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 1.0}};
        K.mat.setFromTriplets(t.begin(), t.end());
        VecX rhs(2);
        rhs << 1.0, 0.0;
        CHECK_THROWS_AS(solve_spd(K, rhs), SolveError);
    }

    SECTION("relative residual contract on an assembled K_d") {
        const Mesh mesh = testing::jittered_square(1.0, 0.25, 29);
        const MaterialParams mat = unit_material(2.0, 0.3);
        const AssemblyContext ctx(mesh, mat.kind);
        const FieldState state = testing::random_state(mesh, mat.kind, 91);
        const SparseSym Kd = assemble_K_d(ctx, state, mat);
        VecX rhs(mesh.num_nodes());
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (Eigen::Index i = 0; i < rhs.size(); ++i) rhs[i] = u(rng);
        const VecX x = solve_spd(Kd, rhs);
        CHECK((Kd.mat * x - rhs).norm() <= 1e-8 * rhs.norm());
    }
}

TEST_CASE("state size mismatches are rejected") {
    const Mesh mesh = generate_square(1.0, 0.5);
    const MaterialParams mat = unit_material();
    const AssemblyContext ctx(mesh, mat.kind);
    FieldState bad = FieldState::zero(mesh, mat.kind);
    bad.d.resize(bad.d.size() + 1);
    CHECK_THROWS_AS(total_energy(ctx, bad, mat), AssemblyError);
    CHECK_THROWS_AS(assemble_residual_u(ctx, bad, mat), AssemblyError);
}
