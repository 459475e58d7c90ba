#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ard/eigen.hpp"
#include "ard/grid.hpp"

using namespace ard;

namespace {

// Discrete eigenvalue of tridiag(-1,2,-1)/h^2 for the lowest mode.
double tridiagonal_ground_eigenvalue(double L, int cells) {
    const double h = L / cells;
    return (2.0 / (h * h)) * (1.0 - std::cos(M_PI * h / L));
}

}  // namespace

TEST_CASE("analytic Dirichlet eigenpair on the unit interval", "[eigen]") {
    auto g = std::make_shared<Grid>(Grid::interval(1.0, 256));
    EigenPair ep = dirichlet_first_analytic(g);

    CHECK(ep.mu == Catch::Approx(M_PI * M_PI).epsilon(1e-14));
    CHECK(ep.normalization == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(integrate(ep.phi) == Catch::Approx(1.0).epsilon(1e-12));

    // Midpoint value tends to pi/2; discrete renormalization perturbs it O(h^2).
    CHECK(ep.phi[128] == Catch::Approx(M_PI / 2.0).margin(1e-4));

    // Oracle: the sampled mode satisfies -phi'' = mu phi to O(h^2) pointwise.
    const double h = g->spacing();
    for (std::size_t i = 1; i + 1 < g->size(); ++i) {
        const double lap = (-ep.phi[i - 1] + 2.0 * ep.phi[i] - ep.phi[i + 1]) / (h * h);
        CHECK(lap == Catch::Approx(ep.mu * ep.phi[i]).margin(2e-3));
    }

    // Interior positivity and boundary zeros.
    CHECK(ep.phi[0] == 0.0);
    CHECK(ep.phi[g->size() - 1] == 0.0);
    for (std::size_t i = 1; i + 1 < g->size(); ++i) CHECK(ep.phi[i] > 0.0);

    EigenPair ep2 = dirichlet_first_analytic(std::make_shared<Grid>(Grid::interval(2.0, 128)));
    CHECK(ep2.mu == Catch::Approx(M_PI * M_PI / 4.0).epsilon(1e-14));
}

TEST_CASE("analytic Dirichlet eigenpair on a rectangle", "[eigen]") {
    auto g = std::make_shared<Grid>(Grid::rectangle(1.0, 2.0, 32, 64));
    EigenPair ep = dirichlet_first_analytic(g);
    CHECK(ep.mu == Catch::Approx(M_PI * M_PI * 1.25).epsilon(1e-14));
    CHECK(integrate(ep.phi) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(ep.phi[g->idx(16, 32)] > 0.0);
}

TEST_CASE("numeric Dirichlet eigenpair matches the discrete closed form", "[eigen]") {
    auto g = std::make_shared<Grid>(Grid::interval(1.0, 256));
    // Relative residual cannot drop below ~eps*||A||/mu (about 6e-12 here),
    // so ask for 1e-10.
    EigenPair ep = dirichlet_first_numeric(g, 1e-10);

    CHECK(std::abs(ep.mu - M_PI * M_PI) < 1e-3);
    CHECK(ep.mu == Catch::Approx(tridiagonal_ground_eigenvalue(1.0, 256)).epsilon(1e-10));
    CHECK(integrate(ep.phi) == Catch::Approx(1.0).epsilon(1e-12));

    // Symmetry about the domain center.
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(std::abs(ep.phi[i] - ep.phi[g->size() - 1 - i]) < 1e-9);
    }

    // Rayleigh quotient of the returned mode reproduces mu.
    const double h = g->spacing();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i + 1 < g->size(); ++i) {
        const double lap = (-ep.phi[i - 1] + 2.0 * ep.phi[i] - ep.phi[i + 1]) / (h * h);
        num += ep.phi[i] * lap;
        den += ep.phi[i] * ep.phi[i];
    }
    CHECK(num / den == Catch::Approx(ep.mu).epsilon(1e-10));
}

TEST_CASE("numeric eigenvalue converges at second order", "[eigen]") {
    const double exact = M_PI * M_PI;
    const double e64 =
        std::abs(dirichlet_first_numeric(std::make_shared<Grid>(Grid::interval(1.0, 64))).mu - exact);
    const double e128 =
        std::abs(dirichlet_first_numeric(std::make_shared<Grid>(Grid::interval(1.0, 128))).mu - exact);
    const double ratio = e64 / e128;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("numeric Dirichlet eigenpair on a rectangle", "[eigen]") {
    auto g = std::make_shared<Grid>(Grid::rectangle(1.0, 1.0, 24, 24));
    EigenPair ep = dirichlet_first_numeric(g, 1e-10);
    // Separable stencil: lowest discrete eigenvalue is the sum of the two
    // axis closed forms.
    const double expected = 2.0 * tridiagonal_ground_eigenvalue(1.0, 24);
    CHECK(ep.mu == Catch::Approx(expected).epsilon(1e-8));
    CHECK(integrate(ep.phi) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(ep.phi[g->idx(12, 12)] > 0.0);
}

TEST_CASE("eigen rejects unsupported inputs", "[eigen]") {
    auto radial = std::make_shared<Grid>(Grid::radial(1.0, 32, 2));
    CHECK_THROWS_AS(dirichlet_first_analytic(radial), std::invalid_argument);
    CHECK_THROWS_AS(dirichlet_first_numeric(radial), std::invalid_argument);

    auto tiny = std::make_shared<Grid>(Grid::interval(1.0, 4));
    CHECK_THROWS_AS(dirichlet_first_numeric(tiny), std::invalid_argument);
}

TEST_CASE("Neumann spectrum closed forms", "[eigen]") {
    Grid g = Grid::interval(1.0, 16);
    NeumannSpectrum s = neumann_spectrum_analytic(g, 3);
    REQUIRE(s.lambdas.size() == 3);
    CHECK(s.lambdas[0] == 0.0);
    CHECK(s.lambdas[1] == Catch::Approx(M_PI * M_PI).epsilon(1e-14));
    CHECK(s.lambdas[2] == Catch::Approx(4.0 * M_PI * M_PI).epsilon(1e-14));

    Grid g2 = Grid::interval(2.0, 16);
    NeumannSpectrum s2 = neumann_spectrum_analytic(g2, 2);
    CHECK(s2.lambdas[1] == Catch::Approx(M_PI * M_PI / 4.0).epsilon(1e-14));

    Grid rect = Grid::rectangle(1.0, 1.0, 8, 8);
    NeumannSpectrum sr = neumann_spectrum_analytic(rect, 4);
    CHECK(sr.lambdas[0] == 0.0);
    CHECK(sr.lambdas[1] == Catch::Approx(M_PI * M_PI));
    CHECK(sr.lambdas[2] == Catch::Approx(M_PI * M_PI));
    CHECK(sr.lambdas[3] == Catch::Approx(2.0 * M_PI * M_PI));
    for (std::size_t k = 1; k < sr.lambdas.size(); ++k)
        CHECK(sr.lambdas[k] >= sr.lambdas[k - 1]);
}
