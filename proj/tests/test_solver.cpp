#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Sparse>
#include <cmath>
#include <sstream>

#include "grushin/solver.hpp"

using namespace grushin;

namespace {

const GrushinParams g0 = GrushinParams::make(2, 1, 0.0);
const GrushinParams g1 = GrushinParams::make(2, 1, 1.0);

double interior_residual_max(const GrushinParams& gp, double kappa, const Grid2D& grid,
                             const AnalyticField& field) {
    const AssembledOperator op = assemble_operator(gp, kappa, grid);
    GridField u;
    u.grid = grid;
    u.values.resize(static_cast<std::size_t>(grid.n_t) * grid.n_phi);
    for (int i = 0; i < grid.n_t; ++i)
        for (int j = 0; j < grid.n_phi; ++j)
            u.at(i, j) = field.value(from_gauge_coords(gp, {grid.t_node(i), grid.phi_node(j)}));
    return op.apply(u).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("assembly annihilates constants and is second order on exact solutions") {
    SECTION("constant field, kappa = 0") {
        const Grid2D grid = Grid2D::make(1.0, 3.0, 32, 16);
        const double res = interior_residual_max(g1, 0.0, grid, make_constant(g1, 4.0));
        CHECK(res <= 1e-11);
    }
    SECTION("fundamental solution at alpha = 1, order 2") {
        const double r1 = interior_residual_max(g1, 0.0, Grid2D::make(1.0, 3.0, 49, 16),
                                                make_fundamental_solution(g1));
        const double r2 = interior_residual_max(g1, 0.0, Grid2D::make(1.0, 3.0, 97, 32),
                                                make_fundamental_solution(g1));
        const double order = std::log2(r1 / r2);
        CHECK(order == Catch::Approx(2.0).margin(0.4));
    }
    SECTION("bessel3 at alpha = 0, kappa = 1, order 2") {
        const double r1 =
            interior_residual_max(g0, 1.0, Grid2D::make(2.0, 8.0, 49, 16), make_bessel3(1.0));
        const double r2 =
            interior_residual_max(g0, 1.0, Grid2D::make(2.0, 8.0, 97, 32), make_bessel3(1.0));
        CHECK(std::log2(r1 / r2) == Catch::Approx(2.0).margin(0.4));
    }
}

TEST_CASE("Helmholtz solve reproduces bessel3 at second order") {
    const AnalyticField exact = make_bessel3(1.0);
    std::vector<double> errs;
    for (int level = 0; level < 3; ++level) {
        SolveConfig cfg;
        cfg.params = g0;
        cfg.kappa = 1.0;
        cfg.annulus = GaugeAnnulus(2.0, 20.0);
        cfg.n_t = 128 << level;
        cfg.n_phi = 16 << level;
        cfg.bc_inner = [&](double) { return std::sin(2.0) / 2.0; };
        cfg.bc_outer = [&](double) { return std::sin(20.0) / 20.0; };
        const GridField u = solve_helmholtz(cfg);
        double err = 0.0;
        for (int i = 0; i < u.grid.n_t; ++i)
            for (int j = 0; j < u.grid.n_phi; ++j) {
                const CylPoint p =
                    from_gauge_coords(g0, {u.grid.t_node(i), u.grid.phi_node(j)});
                err = std::max(err, std::abs(u.at(i, j) - exact.value(p)));
            }
        errs.push_back(err);
        // boundary rows carry the Dirichlet data exactly
        CHECK(u.at(0, 3) == std::sin(2.0) / 2.0);
        CHECK(u.at(u.grid.n_t - 1, 5) == std::sin(20.0) / 20.0);
    }
    CHECK(std::log2(errs[0] / errs[1]) == Catch::Approx(2.0).margin(0.35));
    CHECK(std::log2(errs[1] / errs[2]) == Catch::Approx(2.0).margin(0.35));
}

TEST_CASE("zero boundary data away from resonance gives the zero field") {
    SolveConfig cfg;
    cfg.params = g1;
    cfg.kappa = 1.0;
    cfg.annulus = GaugeAnnulus(4.0, 9.0);
    cfg.n_t = 64;
    cfg.n_phi = 16;
    const GridField u = solve_helmholtz(cfg);
    for (double v : u.values) CHECK(v == 0.0);
}

TEST_CASE("solved alpha = 1 cavity field: small discrete residual, sane magnitude") {
    SolveConfig cfg;
    cfg.params = g1;
    cfg.kappa = 1.0;
    cfg.annulus = GaugeAnnulus(4.0, 40.0);
    cfg.n_t = 384;
    cfg.n_phi = 32;
    cfg.bc_inner = [](double) { return 1.0; };
    cfg.bc_outer = [](double) { return 0.0; };
    const GridField u = solve_helmholtz(cfg);
    const AssembledOperator op = assemble_operator(cfg);
    CHECK(op.apply(u).cwiseAbs().maxCoeff() <= 1e-9);
    double umax = 0.0;
    for (double v : u.values) umax = std::max(umax, std::abs(v));
    CHECK(umax < 50.0); // not resonant at this configuration

    SECTION("a tightened blowup threshold trips the resonance detector") {
        cfg.resonance_threshold = 1e-3;
        CHECK_THROWS_AS(solve_helmholtz(cfg), ResonanceError);
    }
}

TEST_CASE("phi-traversal reversal leaves the solution unchanged") {
    SolveConfig cfg;
    cfg.params = g1;
    cfg.kappa = 1.0;
    cfg.annulus = GaugeAnnulus(4.0, 12.0);
    cfg.n_t = 96;
    cfg.n_phi = 24;
    cfg.bc_inner = [](double) { return 1.0; };
    cfg.bc_outer = [](double) { return 0.0; };
    const GridField u = solve_helmholtz(cfg);

    // permute the assembled system by reversing the phi index and solve again
    const AssembledOperator op = assemble_operator(cfg);
    const int np = cfg.n_phi, ni = op.interior_rows();
    Eigen::VectorXi perm(ni);
    for (int b = 0; b < ni / np; ++b)
        for (int j = 0; j < np; ++j) perm(b * np + j) = b * np + (np - 1 - j);
    Eigen::PermutationMatrix<Eigen::Dynamic> P(ni);
    for (int i = 0; i < ni; ++i) P.indices()(i) = perm(i);
    Eigen::SparseMatrix<double> A2 = P.transpose() * op.A * P;
    Eigen::VectorXd ub = Eigen::VectorXd::Zero(2 * np);
    for (int j = 0; j < np; ++j) ub(j) = 1.0;
    Eigen::VectorXd rhs = P.transpose() * (-(op.B * ub));
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A2);
    REQUIRE(lu.info() == Eigen::Success);
    const Eigen::VectorXd y = lu.solve(rhs);
    double worst = 0.0;
    for (int i = 0; i < ni; ++i) {
        const int b = i / np, j = i % np;
        worst = std::max(worst, std::abs(y(b * np + (np - 1 - j)) - u.at(b + 1, j)));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("manufactured-solution convergence") {
    SECTION("gaussian, alpha = 1, kappa = 1") {
        const MmsReport rep = mms_convergence(g1, 1.0, make_gaussian(g1), GaugeAnnulus(0.8, 2.4),
                                              {{33, 12}, {65, 24}, {129, 48}});
        CHECK(rep.slope == Catch::Approx(2.0).margin(0.3));
    }
    SECTION("gaussian, alpha = 0") {
        const MmsReport rep = mms_convergence(g0, 1.0, make_gaussian(g0), GaugeAnnulus(0.8, 2.4),
                                              {{33, 12}, {65, 24}, {129, 48}});
        CHECK(rep.slope == Catch::Approx(2.0).margin(0.3));
    }
    SECTION("fundamental solution with zero source, alpha = 1") {
        const MmsReport rep = mms_convergence(g1, 0.0, make_fundamental_solution(g1),
                                              GaugeAnnulus(0.8, 2.4),
                                              {{33, 12}, {65, 24}, {129, 48}});
        CHECK(rep.slope == Catch::Approx(2.0).margin(0.3));
    }
    SECTION("discrete right-hand side is reproduced to solver precision") {
        const Grid2D grid = Grid2D::make(1.0, 4.0, 48, 16);
        const AssembledOperator op = assemble_operator(g1, 1.0, grid);
        GridField gstar;
        gstar.grid = grid;
        gstar.values.resize(static_cast<std::size_t>(grid.n_t) * grid.n_phi);
        const AnalyticField field = make_gaussian(g1);
        for (int i = 0; i < grid.n_t; ++i)
            for (int j = 0; j < grid.n_phi; ++j)
                gstar.at(i, j) =
                    field.value(from_gauge_coords(g1, {grid.t_node(i), grid.phi_node(j)}));
        const Eigen::VectorXd h = op.apply(gstar);
        const GridField u = detail::solve_dirichlet(
            op,
            [&](double phi) {
                return field.value(from_gauge_coords(g1, {grid.t_min, phi}));
            },
            [&](double phi) {
                return field.value(from_gauge_coords(g1, {grid.t_max, phi}));
            },
            &h, 1e-8, 1e12);
        double worst = 0.0;
        for (int i = 0; i < grid.n_t; ++i)
            for (int j = 0; j < grid.n_phi; ++j)
                worst = std::max(worst, std::abs(u.at(i, j) - gstar.at(i, j)));
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("grid field CSV round trip and sampler accuracy") {
    SECTION("CSV round trip is value-exact") {
        GridField f;
        f.grid = Grid2D::make(1.0, 2.0, 8, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                f.values.push_back(std::sin(3.0 * i) * std::cos(2.0 * j) * 1e-3);
        std::stringstream ss;
        write_csv(f, ss);
        const GridField g = read_csv(ss);
        REQUIRE(g.values.size() == f.values.size());
        for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(g.values[i] == f.values[i]);
        CHECK(g.grid.n_t == 8);
        CHECK(g.grid.n_phi == 8);

        std::stringstream bad("nope\n1,2,3\n");
        CHECK_THROWS_AS(read_csv(bad), Error);
    }
    SECTION("sampler reproduces a smooth function and its derivatives") {
        GridField f;
        f.grid = Grid2D::make(2.0, 6.0, 129, 64);
        auto fn = [](double t, double phi) { return std::sin(t) * std::cos(2.0 * phi); };
        for (int i = 0; i < f.grid.n_t; ++i)
            for (int j = 0; j < f.grid.n_phi; ++j)
                f.values.push_back(fn(f.grid.t_node(i), f.grid.phi_node(j)));
        const GridSampler sampler(std::make_shared<GridField>(f));
        for (double t : {2.3, 3.7, 5.9}) {
            for (double phi : {0.05, 0.7, 1.5}) {
                const SphereSample s = sampler.eval(t, phi);
                CHECK(s.f == Catch::Approx(fn(t, phi)).margin(2e-6));
                CHECK(s.ft == Catch::Approx(std::cos(t) * std::cos(2.0 * phi)).margin(2e-4));
                CHECK(s.fphi ==
                      Catch::Approx(-2.0 * std::sin(t) * std::sin(2.0 * phi)).margin(2e-4));
            }
        }
    }
}
