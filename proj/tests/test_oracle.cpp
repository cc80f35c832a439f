#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "dicke/oracle.hpp"
#include "dicke/protocol.hpp"
#include "dicke/synth.hpp"
#include "doctest.h"

using namespace dicke;
using namespace dicke::cvstate;
using namespace dicke::oracle;

namespace {

double fock_fidelity(const FockVector& a, const FockVector& b) {
    cplx ip = 0.0;
    const int n = std::min(a.dim(), b.dim());
    for (int k = 0; k < n; ++k) ip += std::conj(a.amps[k]) * b.amps[k];
    return std::norm(ip) / (a.norm2() * b.norm2());
}

FockVector basis_vector(int n, int dim) {
    FockVector f;
    f.amps.assign(static_cast<size_t>(dim), cplx{0.0});
    f.amps[static_cast<size_t>(n)] = 1.0;
    return f;
}

}  // namespace

TEST_CASE("quadrature matrices: hermiticity and the canonical commutator") {
    const int dim = 24;
    const TruncatedOperator x = position(dim);
    const TruncatedOperator p = momentum(dim);
    CHECK((x.matrix - x.matrix.adjoint()).norm() < 1e-12);
    CHECK((p.matrix - p.matrix.adjoint()).norm() < 1e-12);

    const Eigen::MatrixXcd comm = x.matrix * p.matrix - p.matrix * x.matrix;
    // [x, p] = i/2 away from the truncation edge.
    for (int i = 0; i < dim - 2; ++i) {
        for (int j = 0; j < dim - 2; ++j) {
            const cplx expected = (i == j) ? cplx{0.0, 0.5} : cplx{0.0};
            CHECK(std::abs(comm(i, j) - expected) < 1e-12);
        }
    }
}

TEST_CASE("squeeze matrix reproduces the closed-form subtracted state") {
    // The matrix exponential inherits the state's own Fock tail as its error
    // floor, so the working dimension must sit well past the compared block.
    for (double r : {0.8, -0.8}) {
        const FockVector mat = pssv_fock(r, 128);
        const FockVector closed = to_fock(ops::light_pssv(r), 127);
        for (int n = 0; n < 30; ++n) {
            CHECK(std::abs(mat.amps[n] - closed.amps[n]) < 1e-10);
        }
        CHECK(mat.norm2() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("displacement matrix reproduces the closed-form displacement") {
    const cplx alpha{0.4, -0.3};
    const int dim = 40;
    const TruncatedOperator d = displacement(dim, alpha);
    const Eigen::VectorXcd moved = d.matrix.col(0);  // D(alpha)|0>
    const FockVector closed =
        to_fock(ops::displace(Displacement{alpha}, vacuum()), dim - 1);
    for (int n = 0; n < 20; ++n) {
        CHECK(std::abs(moved(n) - closed.amps[n]) < 1e-9);
    }
    // Unitarity.
    CHECK((d.matrix.adjoint() * d.matrix - Eigen::MatrixXcd::Identity(dim, dim)).norm() <
          1e-9);
}

TEST_CASE("joint evolution: identity at zero coupling, unitary otherwise") {
    const int dim = 40;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    Eigen::MatrixXcd amps(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) amps(i, j) = cplx{c(rng), c(rng)};
    }
    amps /= amps.norm();
    JointState state{amps};

    const JointState frozen = qnd_evolve(state, 0.0);
    CHECK((frozen.amps - state.amps).norm() < 1e-12);

    const JointState evolved = qnd_evolve(state, 0.5);
    CHECK(evolved.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((evolved.amps - state.amps).norm() > 1e-3);
}

TEST_CASE("homodyne on uncoupled vacuum reproduces Gaussian statistics") {
    const int dim = 30;
    const JointState state = product_state(basis_vector(0, 1), basis_vector(0, 1), dim);
    for (double p : {0.0, 0.5, -1.2}) {
        const HomodyneResult res = homodyne_project(state, p);
        const double expected = std::sqrt(2.0 / kPi) * std::exp(-2.0 * p * p);
        CHECK(res.density == doctest::Approx(expected).epsilon(1e-10));
        // Atoms untouched.
        CHECK(std::abs(std::norm(res.atoms.amps[0]) / res.density - 1.0) < 1e-10);
    }
    CHECK(homodyne_reliable(dim, 2.0));
    CHECK(!homodyne_reliable(dim, 4.0));
}

TEST_CASE("homodyne densities integrate to one") {
    const int dim = 50;
    const FockVector light = pssv_fock(1.0, dim);
    const JointState state = product_state(basis_vector(0, 1), light, dim);
    const JointState evolved = qnd_evolve(state, 0.5);
    // The antisqueezed mode is wide in p, so the window must be generous.
    double integral = 0.0;
    const double h = 0.01;
    for (double p = -9.0; p <= 9.0 + 1e-12; p += h) {
        double w = h;
        if (std::abs(std::abs(p) - 9.0) < 1e-9) w = h / 2.0;
        integral += w * homodyne_project(evolved, p).density;
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("single conditioned step agrees with the closed form") {
    const int dim = 128;
    const FockVector light = pssv_fock(1.0, dim);
    const JointState state = product_state(basis_vector(0, 1), light, dim);
    const JointState evolved = qnd_evolve(state, 0.5);
    const HomodyneResult res = homodyne_project(evolved, 0.0);

    ThetaParams params;
    params.kappa = 0.5;
    params.r = 1.0;
    const PolyGaussian closed = ops::theta_s(params, vacuum());
    const FockVector closed_amps = to_fock(closed, dim - 1);

    CHECK(1.0 - fock_fidelity(res.atoms, closed_amps) < 1e-6);
    CHECK(std::abs(res.density - norm2(closed)) / res.density < 1e-6);
}

TEST_CASE("conditioned-step density at a displaced outcome matches the oracle") {
    ThetaParams params;
    params.kappa = 0.5;
    params.r = -1.0;
    params.p_L = 0.3;
    const double closed_density = norm2(ops::theta_s(params, vacuum()));

    const int dim = 128;
    const JointState state =
        product_state(basis_vector(0, 1), pssv_fock(-1.0, dim), dim);
    const HomodyneResult res = homodyne_project(qnd_evolve(state, 0.5), 0.3);
    CHECK(std::abs(res.density - closed_density) / res.density < 1e-6);
}

TEST_CASE("two-step schedule: oracle chain matches the protocol executor") {
    const int dim = 128;
    const double kappa = 0.5;
    const double r = -1.0;

    FockVector target;
    target.amps = {cplx{0.0}, cplx{0.0}, cplx{1.0}};
    ThetaParams base;
    base.kappa = kappa;
    base.r = r;
    const synth::TargetSpec spec_t = synth::make_target(target);
    const synth::Schedule schedule = synth::schedule_real(spec_t, base);
    const std::vector<double> outcomes = {0.4, -0.2};

    // Closed-form path.
    const auto closed = protocol::execute(schedule, outcomes);

    // Matrix path: displace, couple to a fresh light mode, project, repeat.
    Eigen::VectorXcd atoms = Eigen::VectorXcd::Zero(dim);
    atoms(0) = 1.0;
    const FockVector light = pssv_fock(r, dim);
    for (size_t j = 0; j < schedule.steps.size(); ++j) {
        atoms = displacement(dim, schedule.steps[j].pre.alpha).matrix * atoms;
        FockVector atom_vec;
        atom_vec.amps.assign(atoms.data(), atoms.data() + dim);
        const JointState joint = product_state(atom_vec, light, dim);
        const HomodyneResult res = homodyne_project(qnd_evolve(joint, kappa), outcomes[j]);
        for (int n = 0; n < dim; ++n) atoms(n) = res.atoms.amps[n];
    }
    atoms = displacement(dim, schedule.final_displacement.alpha).matrix * atoms;
    const double oracle_density = atoms.squaredNorm();

    CHECK(std::abs(oracle_density - closed.density) / oracle_density < 1e-5);

    FockVector oracle_amps;
    oracle_amps.amps.assign(atoms.data(), atoms.data() + dim);
    const FockVector closed_amps = to_fock(closed.state, dim - 1);
    CHECK(1.0 - fock_fidelity(oracle_amps, closed_amps) < 1e-5);
}

TEST_CASE("agreement grid passes at the standard truncation") {
    const AgreementReport report = run_agreement_grid();
    CHECK(report.cases.size() == 2 * 3 * 3);
    CHECK(report.max_fidelity_deficit <= 1e-6);
    CHECK(report.max_density_rel_error <= 1e-5);
    CHECK(report.pass());
}

TEST_CASE("densities are converged in the truncation dimension") {
    // The wide r = -1 mode is the stress case: its quadrature support runs
    // past what 60 levels can represent, so convergence is probed from the
    // working default upward.
    const auto density_at = [](int dim, double r, double kappa, double p) {
        const JointState state =
            product_state(basis_vector(0, 1), pssv_fock(r, dim), dim);
        return homodyne_project(qnd_evolve(state, kappa), p).density;
    };
    CHECK(std::abs(density_at(128, 1.0, 0.5, 0.5) - density_at(256, 1.0, 0.5, 0.5)) <
          1e-6);
    CHECK(std::abs(density_at(128, -1.0, 0.2, -1.0) - density_at(256, -1.0, 0.2, -1.0)) <
          1e-6);
}
