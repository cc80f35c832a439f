#include "dicke/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

namespace dicke::protocol {

using cvstate::fidelity_pure;
using cvstate::norm2;
using cvstate::rescale_quadrature;
using cvstate::vacuum;
using ops::displace;
using ops::theta_from_light;
using ops::theta_s;

OutcomeGrid::OutcomeGrid(double half_width_, double spacing_)
    : half_width(half_width_), spacing(spacing_) {
    // half_width = 0 is the degenerate single-point grid {0}.
    if (!(half_width >= 0.0) || !(spacing > 0.0) ||
        (half_width > 0.0 && spacing > 2.0 * half_width)) {
        throw error("OutcomeGrid: need 0 < spacing <= 2 * half_width");
    }
}

namespace {

size_t grid_size(double half_width, double spacing) {
    return static_cast<size_t>(std::llround(2.0 * half_width / spacing)) + 1;
}

}  // namespace

std::vector<double> OutcomeGrid::points() const {
    const size_t n = grid_size(half_width, spacing);
    if (n == 1) return {0.0};
    const double h = 2.0 * half_width / static_cast<double>(n - 1);
    std::vector<double> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = -half_width + static_cast<double>(i) * h;
    return p;
}

std::vector<double> OutcomeGrid::weights() const {
    const size_t n = grid_size(half_width, spacing);
    if (n == 1) return {2.0 * half_width};
    const double h = 2.0 * half_width / static_cast<double>(n - 1);
    std::vector<double> w(n, h);
    w.front() = w.back() = h / 2.0;
    return w;
}

namespace {

PolyGaussian initial_state(const synth::Schedule& schedule) {
    if (!schedule.presqueezed || schedule.steps.empty()) return vacuum();
    const double n = static_cast<double>(schedule.steps.size());
    const double g = 1.0 - n * schedule.steps.front().theta.epsilon();
    if (!(g > 0.0)) {
        throw error("execute: presqueezed initial state needs N*epsilon < 1");
    }
    return PolyGaussian({std::pow(2.0 * g / kPi, 0.25)}, g, 0.0);
}

// Runs fn(i) for i in [0, n), splitting across threads when worthwhile.
// Each index writes only its own output slot, so results are identical to
// the serial order.
void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned nthreads = std::min<unsigned>(std::min<size_t>(hw, 32), (n + 255) / 256);
    if (nthreads <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const size_t chunk = (n + nthreads - 1) / nthreads;
    for (unsigned t = 0; t < nthreads; ++t) {
        const size_t begin = t * chunk;
        const size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

ExecResult execute(const synth::Schedule& schedule, const std::vector<double>& outcomes) {
    if (outcomes.size() != schedule.steps.size()) {
        throw error("execute: got " + std::to_string(outcomes.size()) + " outcomes for " +
                    std::to_string(schedule.steps.size()) + " steps");
    }
    PolyGaussian state = initial_state(schedule);
    for (size_t j = 0; j < schedule.steps.size(); ++j) {
        const synth::ScheduleStep& step = schedule.steps[j];
        state = displace(step.pre, state);
        if (step.light) {
            state = multiply(theta_from_light(*step.light, step.theta.kappa, outcomes[j]),
                             state);
        } else {
            ThetaParams params = step.theta;
            params.p_L = outcomes[j];
            state = theta_s(params, state);
        }
    }
    state = displace(schedule.final_displacement, state);
    return {state, norm2(state)};
}

double completeness_check(const synth::Schedule& schedule, const OutcomeGrid& grid) {
    const size_t dims = schedule.steps.size();
    if (dims == 0) return execute(schedule, {}).density;

    const std::vector<double> pts = grid.points();
    const std::vector<double> wts = grid.weights();
    const size_t npts = pts.size();
    size_t total = 1;
    for (size_t d = 0; d < dims; ++d) total *= npts;

    std::vector<double> contributions(total);
    parallel_for(total, [&](size_t flat) {
        std::vector<double> outcomes(dims);
        double weight = 1.0;
        size_t rest = flat;
        for (size_t d = dims; d-- > 0;) {
            const size_t idx = rest % npts;
            rest /= npts;
            outcomes[d] = pts[idx];
            weight *= wts[idx];
        }
        contributions[flat] = weight * execute(schedule, outcomes).density;
    });

    double integral = 0.0;
    for (double c : contributions) integral += c;
    return integral;
}

FeedbackResult feedback_displacement(const PolyGaussian& state, const FockVector& target,
                                     bool real_only) {
    const auto score = [&](cplx delta) {
        // A far-displaced state can pick up e^{2|delta||beta|}-sized norm
        // swings; a trial that drives the norm out of double range is just a
        // worthless move for the search, not an error worth surfacing.
        try {
            const double f = fidelity_pure(displace(Displacement{delta}, state), target);
            return std::isfinite(f) ? f : 0.0;
        } catch (const degenerate_state_error&) {
            return 0.0;
        }
    };

    std::vector<cplx> starts = {cplx{0.0}, cplx{0.5}, cplx{-0.5}};
    if (!real_only) {
        starts.push_back(cplx{0.0, 0.5});
        starts.push_back(cplx{0.0, -0.5});
    }

    FeedbackResult best{Displacement{cplx{0.0}}, score(0.0)};
    for (cplx start : starts) {
        cplx delta = start;
        double f = score(delta);
        double step = 0.5;
        while (step >= 1e-6) {
            cplx dirs[4] = {cplx{step}, cplx{-step}, cplx{0.0, step}, cplx{0.0, -step}};
            const int ndirs = real_only ? 2 : 4;
            cplx best_move = delta;
            double best_f = f;
            for (int k = 0; k < ndirs; ++k) {
                const double cand = score(delta + dirs[k]);
                if (cand > best_f) {
                    best_f = cand;
                    best_move = delta + dirs[k];
                }
            }
            if (best_f > f) {
                f = best_f;
                delta = best_move;
            } else {
                step *= 0.5;
            }
        }
        if (f > best.fidelity) best = {Displacement{delta}, f};
    }
    return best;
}

std::vector<PointEval> evaluate_grid(const synth::Schedule& schedule,
                                     const FockVector& target, const OutcomeGrid& grid,
                                     bool feedback, bool feedback_real,
                                     bool apply_rescale) {
    const size_t dims = schedule.steps.size();
    const std::vector<double> pts = grid.points();
    const size_t npts = pts.size();
    size_t total = 1;
    for (size_t d = 0; d < dims; ++d) total *= npts;

    std::vector<PointEval> evals(total);
    parallel_for(total, [&](size_t flat) {
        std::vector<double> outcomes(dims);
        size_t rest = flat;
        for (size_t d = dims; d-- > 0;) {
            outcomes[d] = pts[rest % npts];
            rest /= npts;
        }
        ExecResult res = execute(schedule, outcomes);
        PointEval pe;
        pe.density = res.density;
        // Below ~1e-250 the fidelity numerator underflows before the ratio is
        // formed, and the point carries no measurable weight in any average;
        // leave its fidelity at zero instead of evaluating noise.
        if (res.density > 1e-250 && std::isfinite(res.density)) {
            PolyGaussian state = (apply_rescale && schedule.rescale_factor != 1.0)
                                     ? rescale_quadrature(res.state, schedule.rescale_factor)
                                     : res.state;
            // The feedback search costs hundreds of fidelity evaluations per
            // point; where the density is below 1e-12 the point contributes
            // less than ~1e-14 to any curve quantity, so the plain fidelity
            // stands in for the optimized one.
            pe.fidelity = (feedback && res.density > 1e-12)
                              ? feedback_displacement(state, target, feedback_real).fidelity
                              : fidelity_pure(state, target);
        }
        evals[flat] = pe;
    });
    return evals;
}

TradeoffCurve tradeoff(const synth::Schedule& schedule, const FockVector& target,
                       const AcceptanceStrategy& strategy, const OutcomeGrid& grid,
                       const std::vector<double>& sweep, bool apply_rescale) {
    const size_t dims = schedule.steps.size();
    if (dims == 0) throw error("tradeoff: schedule has no steps");
    const std::vector<double> pts = grid.points();
    const std::vector<double> wts = grid.weights();
    const size_t npts = pts.size();

    const std::vector<PointEval> evals = evaluate_grid(
        schedule, target, grid, strategy.feedback, strategy.feedback_real, apply_rescale);

    // |p_j| < eta for every axis needs per-axis indices back from the flat one.
    const auto in_basic_window = [&](size_t flat, double eta) {
        for (size_t d = 0; d < dims; ++d) {
            if (std::abs(pts[flat % npts]) >= eta) return false;
            flat /= npts;
        }
        return true;
    };
    const auto joint_weight = [&](size_t flat) {
        double w = 1.0;
        for (size_t d = 0; d < dims; ++d) {
            w *= wts[flat % npts];
            flat /= npts;
        }
        return w;
    };

    TradeoffCurve curve;
    for (double parameter : sweep) {
        double mass = 0.0;
        double weighted_fidelity = 0.0;
        bool any = false;
        for (size_t flat = 0; flat < evals.size(); ++flat) {
            const bool accepted = strategy.kind == AcceptanceStrategy::Kind::basic
                                      ? in_basic_window(flat, parameter)
                                      : evals[flat].fidelity >= parameter;
            if (!accepted) continue;
            any = true;
            const double w = joint_weight(flat) * evals[flat].density;
            mass += w;
            weighted_fidelity += w * evals[flat].fidelity;
        }
        if (!any || !(mass > 0.0)) {
            curve.skipped.push_back(parameter);
            continue;
        }
        TradeoffPoint point;
        point.parameter = parameter;
        point.success_probability = std::clamp(mass, 0.0, 1.0);
        point.average_fidelity = weighted_fidelity / mass;
        curve.points.push_back(point);
    }
    std::sort(curve.points.begin(), curve.points.end(),
              [](const TradeoffPoint& a, const TradeoffPoint& b) {
                  return a.success_probability < b.success_probability;
              });
    return curve;
}

std::vector<MapRow> fidelity_map(const synth::Schedule& schedule, const FockVector& target,
                                 const OutcomeGrid& grid, bool feedback,
                                 bool apply_rescale) {
    if (schedule.steps.size() != 2) {
        throw error("fidelity_map: schedule must have exactly 2 steps, has " +
                    std::to_string(schedule.steps.size()));
    }
    const std::vector<double> pts = grid.points();
    const size_t npts = pts.size();
    const std::vector<PointEval> evals =
        evaluate_grid(schedule, target, grid, feedback, false, apply_rescale);

    std::vector<MapRow> rows(evals.size());
    for (size_t i1 = 0; i1 < npts; ++i1) {
        for (size_t i2 = 0; i2 < npts; ++i2) {
            const size_t flat = i1 * npts + i2;
            rows[flat] = {pts[i1], pts[i2], evals[flat].density, evals[flat].fidelity};
        }
    }
    return rows;
}

}  // namespace dicke::protocol
