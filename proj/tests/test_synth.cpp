#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "dicke/protocol.hpp"
#include "dicke/synth.hpp"
#include "doctest.h"

using namespace dicke;
using namespace dicke::cvstate;
using namespace dicke::synth;

namespace {

FockVector make_coeffs(std::initializer_list<cplx> amps) {
    FockVector f;
    f.amps = amps;
    return f;
}

// Target amplitudes whose wavefunction polynomial has exactly these roots.
FockVector coeffs_from_roots(const std::vector<double>& roots) {
    std::vector<cplx> poly{cplx{1.0}};
    for (double r : roots) {
        std::vector<cplx> next(poly.size() + 1, cplx{0.0});
        for (size_t k = 0; k < poly.size(); ++k) {
            next[k + 1] += poly[k];
            next[k] -= r * poly[k];
        }
        poly = std::move(next);
    }
    return to_fock(PolyGaussian(std::move(poly), 1.0, 0.0), static_cast<int>(roots.size()));
}

ThetaParams base_params(double epsilon) {
    ThetaParams base;
    base.kappa = 0.5;
    base.r = 1.0;
    base.epsilon_override = epsilon;
    return base;
}

double executed_fidelity(const Schedule& schedule, const FockVector& target) {
    const auto res = protocol::execute(schedule, std::vector<double>(schedule.steps.size(), 0.0));
    const PolyGaussian out = schedule.rescale_factor != 1.0
                                 ? rescale_quadrature(res.state, schedule.rescale_factor)
                                 : res.state;
    return fidelity_pure(out, target);
}

}  // namespace

TEST_CASE("target polynomial: known low-degree cases") {
    const auto p1 = target_polynomial(make_coeffs({0.0, 1.0}));
    REQUIRE(p1.size() == 2);
    CHECK(std::abs(p1[0]) < 1e-14);
    CHECK(std::abs(p1[1] - cplx{2.0}) < 1e-14);

    // Second excited state: quadratic with ratio c2/c0 = -4, roots at +-1/2.
    const auto p2 = target_polynomial(make_coeffs({0.0, 0.0, 1.0}));
    REQUIRE(p2.size() == 3);
    CHECK(std::abs(p2[1]) < 1e-14);
    CHECK(std::abs(p2[2] / p2[0] - cplx{-4.0}) < 1e-12);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const auto p01 = target_polynomial(make_coeffs({inv_sqrt2, inv_sqrt2}));
    REQUIRE(p01.size() == 2);
    // Single real root at -1/2.
    CHECK(std::abs(-p01[0] / p01[1] - cplx{-0.5}) < 1e-12);

    CHECK_THROWS_AS(target_polynomial(make_coeffs({0.0, 0.0})), dicke::error);
}

TEST_CASE("root finding: exact, clustered, and planted cases") {
    auto roots = find_roots({cplx{-2.0}, cplx{0.0}, cplx{8.0}});
    REQUIRE(roots.size() == 2);
    std::sort(roots.begin(), roots.end(),
              [](cplx a, cplx b) { return a.real() < b.real(); });
    CHECK(std::abs(roots[0] - cplx{-0.5}) < 1e-12);
    CHECK(std::abs(roots[1] - cplx{0.5}) < 1e-12);

    const auto triple = find_roots({cplx{0.0}, cplx{0.0}, cplx{0.0}, cplx{1.0}});
    REQUIRE(triple.size() == 3);
    for (cplx z : triple) CHECK(std::abs(z) < 1e-4);

    const std::vector<cplx> planted = {{-1.3, 0.0}, {0.2, 0.0}, {0.9, 0.0}, {2.0, 0.0}, {-0.4, 0.0}};
    std::vector<cplx> poly{cplx{1.0}};
    for (cplx r : planted) {
        std::vector<cplx> next(poly.size() + 1, cplx{0.0});
        for (size_t k = 0; k < poly.size(); ++k) {
            next[k + 1] += poly[k];
            next[k] -= r * poly[k];
        }
        poly = std::move(next);
    }
    auto found = find_roots(poly);
    REQUIRE(found.size() == planted.size());
    std::sort(found.begin(), found.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    std::vector<cplx> expected = planted;
    std::sort(expected.begin(), expected.end(),
              [](cplx a, cplx b) { return a.real() < b.real(); });
    for (size_t k = 0; k < found.size(); ++k) CHECK(std::abs(found[k] - expected[k]) < 1e-8);

    CHECK_THROWS_AS(find_roots({cplx{1.0}}), dicke::error);
}

TEST_CASE("real-root schedule reproduces the simplest targets") {
    // First excited state: the single root sits at the origin, so every
    // displacement vanishes.
    const TargetSpec t1 = make_target(make_coeffs({0.0, 1.0}));
    const Schedule s1 = schedule_real(t1, base_params(0.0));
    REQUIRE(s1.steps.size() == 1);
    CHECK(std::abs(s1.steps[0].pre.alpha) < 1e-12);
    CHECK(std::abs(s1.final_displacement.alpha) < 1e-12);
    CHECK(executed_fidelity(s1, t1.coeffs) == doctest::Approx(1.0).epsilon(1e-12));

    // Second excited state at epsilon = 0: displacements 1/2, -1, 1/2.
    const TargetSpec t2 = make_target(make_coeffs({0.0, 0.0, 1.0}));
    const Schedule s2 = schedule_real(t2, base_params(0.0));
    REQUIRE(s2.steps.size() == 2);
    CHECK(s2.steps[0].pre.alpha.real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s2.steps[1].pre.alpha.real() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(s2.final_displacement.alpha.real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s2.rescale_factor == doctest::Approx(1.0).epsilon(1e-15));

    const auto res = protocol::execute(s2, {0.0, 0.0});
    const FockVector amps = to_fock(res.state, 2).normalized();
    CHECK(std::abs(amps.amps[0]) < 1e-10);
    CHECK(std::abs(amps.amps[1]) < 1e-10);
    CHECK(std::abs(std::abs(amps.amps[2]) - 1.0) < 1e-10);
}

TEST_CASE("single-step schedule at finite epsilon: closure relation") {
    const double eps = 0.0338338;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const TargetSpec t = make_target(make_coeffs({inv_sqrt2, inv_sqrt2}));
    const Schedule s = schedule_real(t, base_params(eps));
    REQUIRE(s.steps.size() == 1);
    const double a1 = s.steps[0].pre.alpha.real();
    const double a2 = s.final_displacement.alpha.real();
    // a1 = -(1 + eps) a2: the opening displacement pre-compensates what the
    // conditioning Gaussian pulls back.
    CHECK(a1 == doctest::Approx(-(1.0 + eps) * a2).epsilon(1e-12));
    CHECK(s.rescale_factor == doctest::Approx(std::sqrt(1.0 + eps)).epsilon(1e-14));
    CHECK(executed_fidelity(s, t.coeffs) >= 1.0 - 1e-10);
}

TEST_CASE("schedules are exact for real-rooted targets across sizes and epsilon") {
    std::mt19937 rng(314159);
    std::uniform_real_distribution<double> root(-1.2, 1.2);
    for (double eps : {0.0, 0.01, 0.0338338}) {
        for (int n = 1; n <= 5; ++n) {
            std::vector<double> roots(static_cast<size_t>(n));
            for (double& r : roots) r = root(rng);
            const FockVector coeffs = coeffs_from_roots(roots);
            const TargetSpec target = make_target(coeffs);
            const Schedule schedule = schedule_real(target, base_params(eps));
            CHECK(executed_fidelity(schedule, coeffs) >= 1.0 - 1e-10);
        }
    }
}

TEST_CASE("permuting the roots leaves the prepared state unchanged") {
    const FockVector coeffs = coeffs_from_roots({-0.8, 0.1, 0.9});
    TargetSpec target = make_target(coeffs);
    const Schedule a = schedule_real(target, base_params(0.02));

    std::rotate(target.roots.begin(), target.roots.begin() + 1, target.roots.end());
    const Schedule b = schedule_real(target, base_params(0.02));

    // Compare the executed states as wavefunctions; the unrescaled state at
    // finite epsilon has Fock weight beyond the polynomial degree, so a
    // truncated comparison would be lossy.
    const auto ra = protocol::execute(a, {0.0, 0.0, 0.0});
    const auto rb = protocol::execute(b, {0.0, 0.0, 0.0});
    const double fid = std::norm(overlap(ra.state, rb.state)) /
                       (norm2(ra.state) * norm2(rb.state));
    CHECK(fid >= 1.0 - 1e-10);
}

TEST_CASE("presqueezed variant: narrowed start, no closing rescale") {
    const double eps = 0.0338338;
    const TargetSpec t2 = make_target(make_coeffs({0.0, 0.0, 1.0}));
    const Schedule s = schedule_real(t2, base_params(eps), true);
    CHECK(s.presqueezed);
    CHECK(s.rescale_factor == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(executed_fidelity(s, t2.coeffs) >= 1.0 - 1e-10);

    // At epsilon = 0 both variants produce identical displacement chains.
    const Schedule plain0 = schedule_real(t2, base_params(0.0), false);
    const Schedule pre0 = schedule_real(t2, base_params(0.0), true);
    for (size_t j = 0; j < plain0.steps.size(); ++j) {
        CHECK(std::abs(plain0.steps[j].pre.alpha - pre0.steps[j].pre.alpha) < 1e-14);
    }
    CHECK(std::abs(plain0.final_displacement.alpha - pre0.final_displacement.alpha) < 1e-14);

    CHECK_THROWS_AS(schedule_real(t2, base_params(0.6), true), presqueeze_infeasible_error);
}

TEST_CASE("complex-rooted targets are routed away from the real scheme") {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const TargetSpec t = make_target(make_coeffs({inv_sqrt2, 0.0, inv_sqrt2}));
    CHECK(!t.roots.empty());
    CHECK(!is_real_root(t.roots[0]));
    CHECK_THROWS_AS(schedule_real(t, base_params(0.0)), complex_roots_error);
}

TEST_CASE("two-angle solver: pure second excited state") {
    const auto sols = solve_complex_n2(cplx{0.0}, cplx{0.0});
    REQUIRE(!sols.empty());
    const ComplexSolution& sol = sols.front();
    CHECK(std::abs(sol.alpha1 + sol.alpha2 + sol.alpha3) < 1e-12);
    CHECK(sol.y >= 1.0 - 1e-9);
    CHECK(sol.planned_fidelity >= 1.0 - 1e-9);

    const Schedule schedule = to_schedule(sol, base_params(0.0));
    FockVector target = make_coeffs({0.0, 0.0, 1.0});
    CHECK(executed_fidelity(schedule, target) >= 1.0 - 1e-8);

    // Same state the real-root chain prepares.
    const TargetSpec t2 = make_target(target);
    const Schedule reference = schedule_real(t2, base_params(0.0));
    CHECK(executed_fidelity(reference, target) >= 1.0 - 1e-10);
}

TEST_CASE("two-angle solver: vacuum admixture with no first excitation") {
    const cplx c0{1.0 / std::sqrt(2.0), 0.0};
    const auto sols = solve_complex_n2(c0, cplx{0.0});
    REQUIRE(!sols.empty());
    const Schedule schedule = to_schedule(sols.front(), base_params(0.0));
    FockVector target = make_coeffs({c0, 0.0, 1.0});
    CHECK(executed_fidelity(schedule, target) >= 1.0 - 1e-8);
}

TEST_CASE("two-angle solver: random targets execute to design fidelity") {
    std::mt19937 rng(8675309);
    std::uniform_real_distribution<double> amp(-2.0, 2.0);
    int produced = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const cplx c0{amp(rng), amp(rng)};
        const cplx c1{amp(rng), amp(rng)};
        const auto sols = solve_complex_n2(c0, c1);
        REQUIRE(!sols.empty());
        ++produced;
        // Best-first by total displacement magnitude.
        for (size_t k = 1; k < sols.size(); ++k) {
            CHECK(sols[k - 1].total_displacement2() <=
                  sols[k].total_displacement2() + 1e-12);
        }
        const ComplexSolution& sol = sols.front();
        CHECK(std::abs(sol.alpha1 + sol.alpha2 + sol.alpha3) < 1e-12);
        CHECK(sol.y >= 1.0 - 1e-9);
        const Schedule schedule = to_schedule(sol, base_params(0.0));
        FockVector target = make_coeffs({c0, c1, 1.0});
        CHECK(executed_fidelity(schedule, target) >= 1.0 - 1e-8);
    }
    CHECK(produced == 25);
}

TEST_CASE("direct-mapping light state: second excited state closed form") {
    for (double kappa : {0.3, 0.5, 1.0}) {
        const FockVector u = direct_mapping_light(make_coeffs({0.0, 0.0, 1.0}), kappa, 6);
        REQUIRE(u.dim() == 7);
        const cplx ratio = u.amps[2] / u.amps[0];
        CHECK(std::abs(ratio - cplx{-std::sqrt(2.0) * (1.0 + kappa * kappa)}) < 1e-10);
        CHECK(std::abs(u.amps[1]) < 1e-10);
        for (int m = 3; m <= 6; ++m) CHECK(std::abs(u.amps[m]) < 1e-10);
    }
}

TEST_CASE("direct-mapping schedules recover their targets after rescale") {
    const double kappa = 0.5;
    const struct {
        FockVector coeffs;
    } cases[] = {
        {make_coeffs({1.0})},
        {make_coeffs({0.0, 1.0})},
        {make_coeffs({0.0, 0.0, 1.0})},
    };
    for (const auto& c : cases) {
        const Schedule schedule = make_direct_schedule(c.coeffs, kappa);
        REQUIRE(schedule.steps.size() == 1);
        REQUIRE(schedule.steps[0].light.has_value());
        CHECK(schedule.rescale_factor ==
              doctest::Approx(std::sqrt(1.0 + kappa * kappa)).epsilon(1e-14));
        CHECK(executed_fidelity(schedule, c.coeffs) >= 1.0 - 1e-10);
    }

    // Vacuum target maps to a bare vacuum light state.
    const FockVector u0 = direct_mapping_light(make_coeffs({1.0}), kappa, 4);
    CHECK(std::abs(std::abs(u0.amps[0]) - 1.0) < 1e-12);
    for (int m = 1; m <= 4; ++m) CHECK(std::abs(u0.amps[m]) < 1e-12);

    // Odd target excites only odd light components.
    const FockVector u1 = direct_mapping_light(make_coeffs({0.0, 1.0}), kappa, 5);
    CHECK(std::abs(u1.amps[1]) > 0.1);
    for (int m : {0, 2, 4}) CHECK(std::abs(u1.amps[m]) < 1e-12);
}
