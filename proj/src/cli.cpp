#include "dicke/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dicke/oracle.hpp"

namespace dicke::cli {

namespace {

using nlohmann::json;

std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

std::string canonical(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& text) {
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw error("cannot parse number: '" + text + "'");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw error("trailing characters in number: '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace

std::vector<cplx> parse_complex_list(const std::string& text) {
    std::vector<cplx> values;
    for (const std::string& part : split(text, ';')) {
        const std::vector<std::string> comps = split(part, ',');
        if (comps.size() == 1) {
            values.emplace_back(parse_double(comps[0]), 0.0);
        } else if (comps.size() == 2) {
            values.emplace_back(parse_double(comps[0]), parse_double(comps[1]));
        } else {
            throw error("complex component needs 're' or 're,im', got '" + part + "'");
        }
    }
    if (values.empty()) throw error("empty target list");
    return values;
}

unsigned long long config_hash(const RunConfig& config, const std::string& subcommand) {
    std::ostringstream ss;
    ss << subcommand;
    for (cplx c : config.target) ss << '|' << canonical(c.real()) << ',' << canonical(c.imag());
    ss << '|' << canonical(config.kappa) << '|' << canonical(config.r);
    for (double p : config.phi) ss << "|phi" << canonical(p);
    if (config.epsilon_override) ss << "|eps" << canonical(*config.epsilon_override);
    ss << '|' << config.presqueezed << '|' << config.use_complex_solver;
    ss << '|' << config.strategy << '|' << config.feedback << '|' << config.feedback_real;
    ss << '|' << config.no_rescale;
    for (double s : config.sweep) ss << "|s" << canonical(s);
    ss << '|' << canonical(config.grid_half_width);
    if (config.grid_spacing) ss << '|' << canonical(*config.grid_spacing);
    ss << '|' << config.oracle_dim;
    for (double o : config.outcomes) ss << "|o" << canonical(o);
    ss << '|' << config.n_max << '|' << config.seed;

    unsigned long long h = 14695981039346656037ULL;
    for (unsigned char c : ss.str()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

// ---------------------------------------------------------------------------
// planning shared by the subcommands

struct Plan {
    synth::Schedule schedule;
    FockVector target;
    std::vector<cplx> roots;
    std::vector<synth::ComplexSolution> solutions;  // complex path only
    FockVector light;                               // direct path only
    bool complex_path = false;
    bool direct_path = false;
};

ThetaParams base_params(const RunConfig& config) {
    ThetaParams base;
    base.kappa = config.kappa;
    base.r = config.r;
    base.epsilon_override = config.epsilon_override;
    return base;
}

Plan build_plan(const RunConfig& config, bool direct) {
    Plan plan;
    plan.target.amps = config.target;
    if (direct) {
        plan.direct_path = true;
        const int deg = static_cast<int>(synth::target_polynomial(plan.target).size()) - 1;
        const int n_max = config.n_max < 0 ? deg : config.n_max;
        plan.light = synth::direct_mapping_light(plan.target, config.kappa, n_max);
        plan.schedule = synth::make_direct_schedule(plan.target, config.kappa, n_max);
    } else if (config.use_complex_solver) {
        plan.complex_path = true;
        const TargetSpec spec = synth::make_target(plan.target);
        plan.roots = spec.roots;
        if (spec.roots.size() != 2) {
            throw error("the complex solver handles degree-2 targets, got degree " +
                        std::to_string(spec.roots.size()));
        }
        const cplx lead = plan.target.amps[2];
        plan.solutions = synth::solve_complex_n2(plan.target.amps[0] / lead,
                                                 plan.target.amps[1] / lead);
        plan.schedule = synth::to_schedule(plan.solutions.front(), base_params(config));
    } else {
        const TargetSpec spec = synth::make_target(plan.target);
        plan.roots = spec.roots;
        plan.schedule = synth::schedule_real(spec, base_params(config), config.presqueezed);
    }
    if (!config.phi.empty()) {
        if (config.phi.size() != plan.schedule.steps.size()) {
            throw error("got " + std::to_string(config.phi.size()) + " phi values for " +
                        std::to_string(plan.schedule.steps.size()) + " steps");
        }
        for (size_t j = 0; j < config.phi.size(); ++j) {
            plan.schedule.steps[j].theta.phi = config.phi[j];
        }
    }
    return plan;
}

PolyGaussian finished_state(const RunConfig& config, const synth::Schedule& schedule,
                            const PolyGaussian& raw) {
    if (config.no_rescale || schedule.rescale_factor == 1.0) return raw;
    return cvstate::rescale_quadrature(raw, schedule.rescale_factor);
}

protocol::OutcomeGrid make_grid(const RunConfig& config, size_t dims) {
    const double fallback = dims >= 2 ? 0.05 : 0.02;
    return protocol::OutcomeGrid(config.grid_half_width,
                                 config.grid_spacing.value_or(fallback));
}

std::string metadata_header(const RunConfig& config, const std::string& subcommand) {
    std::ostringstream ss;
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx", config_hash(config, subcommand));
    ss << "# tool=dicke-synth version=" << kVersion << "\n";
    ss << "# subcommand=" << subcommand << " config-hash=" << hash << " seed=" << config.seed
       << "\n";
    ss << "# rescale=" << (config.no_rescale ? "off" : "on")
       << " feedback=" << (config.feedback ? "on" : "off")
       << " feedback-real=" << (config.feedback_real ? "on" : "off")
       << " strategy=" << config.strategy << "\n";
    return ss.str();
}

// Writes to the --out path when given, otherwise to the console stream.
void emit(const RunConfig& config, std::ostream& console, const std::string& payload) {
    if (config.out_path.empty()) {
        console << payload;
        return;
    }
    std::ofstream file(config.out_path, std::ios::binary);
    if (!file) throw error("cannot open output file: " + config.out_path);
    file << payload;
}

json complex_json(cplx v) { return json::array({v.real(), v.imag()}); }

json schedule_json(const synth::Schedule& schedule) {
    json steps = json::array();
    for (const synth::ScheduleStep& step : schedule.steps) {
        json j;
        j["alpha"] = complex_json(step.pre.alpha);
        j["phi"] = step.theta.phi;
        j["kappa"] = step.theta.kappa;
        j["r"] = step.theta.r;
        j["epsilon"] = step.theta.epsilon();
        j["light_override"] = step.light.has_value();
        steps.push_back(j);
    }
    json out;
    out["steps"] = steps;
    out["final_alpha"] = complex_json(schedule.final_displacement.alpha);
    out["presqueezed"] = schedule.presqueezed;
    out["rescale_factor"] = schedule.rescale_factor;
    return out;
}

double design_fidelity(const RunConfig& config, const Plan& plan) {
    const std::vector<double> zeros(plan.schedule.steps.size(), 0.0);
    const protocol::ExecResult res = protocol::execute(plan.schedule, zeros);
    return cvstate::fidelity_pure(finished_state(config, plan.schedule, res.state),
                                  plan.target);
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_plan(const RunConfig& config, std::ostream& out) {
    const Plan plan = build_plan(config, false);
    const double fid = design_fidelity(config, plan);

    std::ostringstream report;
    report << "schedule: " << plan.schedule.steps.size() << " step(s)"
           << (plan.schedule.presqueezed ? ", presqueezed" : "") << "\n";
    report << "roots:";
    for (cplx root : plan.roots) {
        report << " (" << canonical(root.real()) << "," << canonical(root.imag()) << ")";
    }
    report << "\n";
    for (size_t j = 0; j < plan.schedule.steps.size(); ++j) {
        const synth::ScheduleStep& step = plan.schedule.steps[j];
        report << "step " << j + 1 << ": alpha=(" << canonical(step.pre.alpha.real()) << ","
               << canonical(step.pre.alpha.imag()) << ") phi=" << canonical(step.theta.phi)
               << " epsilon=" << canonical(step.theta.epsilon()) << "\n";
    }
    report << "final displacement: (" << canonical(plan.schedule.final_displacement.alpha.real())
           << "," << canonical(plan.schedule.final_displacement.alpha.imag()) << ")\n";
    report << "rescale factor: " << canonical(plan.schedule.rescale_factor) << "\n";
    if (plan.complex_path) {
        const synth::ComplexSolution& sol = plan.solutions.front();
        report << "quartic root y: " << canonical(sol.y)
               << " (of " << plan.solutions.size() << " admissible solution(s))\n";
        report << "planned fidelity: " << canonical(sol.planned_fidelity) << "\n";
    }
    report << "design fidelity: " << canonical(fid) << "\n";

    if (config.emit_json) {
        json j;
        j["schedule"] = schedule_json(plan.schedule);
        j["design_fidelity"] = fid;
        json roots = json::array();
        for (cplx root : plan.roots) roots.push_back(complex_json(root));
        j["roots"] = roots;
        if (plan.complex_path) {
            j["quartic_root_y"] = plan.solutions.front().y;
            j["planned_fidelity"] = plan.solutions.front().planned_fidelity;
        }
        emit(config, out, j.dump(2) + "\n");
        if (!config.out_path.empty()) out << report.str();
        return 0;
    }
    emit(config, out, report.str());
    if (!config.out_path.empty()) out << report.str();
    return 0;
}

int cmd_run(const RunConfig& config, std::ostream& out) {
    const Plan plan = build_plan(config, false);
    std::vector<double> outcomes = config.outcomes;
    if (outcomes.empty()) outcomes.assign(plan.schedule.steps.size(), 0.0);
    if (outcomes.size() != plan.schedule.steps.size()) {
        throw error("got " + std::to_string(outcomes.size()) + " outcomes for " +
                    std::to_string(plan.schedule.steps.size()) + " steps");
    }

    const protocol::ExecResult res = protocol::execute(plan.schedule, outcomes);
    const PolyGaussian state = finished_state(config, plan.schedule, res.state);
    double fidelity = cvstate::fidelity_pure(state, plan.target);
    cplx feedback_shift = 0.0;
    if (config.feedback) {
        const protocol::FeedbackResult fb =
            protocol::feedback_displacement(state, plan.target, config.feedback_real);
        fidelity = fb.fidelity;
        feedback_shift = fb.shift.alpha;
    }

    std::ostringstream report;
    report << "outcomes:";
    for (double o : outcomes) report << " " << canonical(o);
    report << "\n";
    report << "density: " << sci(res.density) << "\n";
    if (config.feedback) {
        report << "feedback: (" << canonical(feedback_shift.real()) << ","
               << canonical(feedback_shift.imag()) << ")\n";
    }
    report << "fidelity: " << canonical(fidelity) << "\n";

    if (config.emit_json) {
        json j;
        j["outcomes"] = outcomes;
        j["density"] = res.density;
        j["fidelity"] = fidelity;
        if (config.feedback) j["feedback"] = complex_json(feedback_shift);
        j["schedule"] = schedule_json(plan.schedule);
        emit(config, out, j.dump(2) + "\n");
        if (!config.out_path.empty()) out << report.str();
        return 0;
    }
    emit(config, out, report.str());
    if (!config.out_path.empty()) out << report.str();
    return 0;
}

std::vector<double> default_sweep(const std::string& strategy) {
    std::vector<double> sweep;
    if (strategy == "basic") {
        for (int k = 1; k <= 60; ++k) sweep.push_back(0.1 * k);
    } else {
        for (int k = 30; k <= 98; k += 2) sweep.push_back(0.01 * k);
        for (double v : {0.985, 0.99, 0.995, 0.999, 0.9995, 0.9999}) sweep.push_back(v);
    }
    return sweep;
}

// Linear interpolation of average fidelity at a given success probability.
std::optional<double> fidelity_at_success(const protocol::TradeoffCurve& curve,
                                          double success) {
    const auto& pts = curve.points;
    if (pts.empty()) return std::nullopt;
    if (success < pts.front().success_probability || success > pts.back().success_probability) {
        return std::nullopt;
    }
    for (size_t i = 1; i < pts.size(); ++i) {
        if (success <= pts[i].success_probability) {
            const double s0 = pts[i - 1].success_probability;
            const double s1 = pts[i].success_probability;
            const double f0 = pts[i - 1].average_fidelity;
            const double f1 = pts[i].average_fidelity;
            if (s1 == s0) return f0;
            return f0 + (f1 - f0) * (success - s0) / (s1 - s0);
        }
    }
    return pts.back().average_fidelity;
}

int cmd_tradeoff(const RunConfig& config, std::ostream& out) {
    const Plan plan = build_plan(config, false);
    protocol::AcceptanceStrategy strategy;
    if (config.strategy == "basic") {
        strategy.kind = protocol::AcceptanceStrategy::Kind::basic;
    } else if (config.strategy == "advanced") {
        strategy.kind = protocol::AcceptanceStrategy::Kind::advanced;
    } else {
        throw error("strategy must be 'basic' or 'advanced', got '" + config.strategy + "'");
    }
    strategy.feedback = config.feedback;
    strategy.feedback_real = config.feedback_real;

    const protocol::OutcomeGrid grid = make_grid(config, plan.schedule.steps.size());
    const std::vector<double> sweep =
        config.sweep.empty() ? default_sweep(config.strategy) : config.sweep;
    const protocol::TradeoffCurve curve = protocol::tradeoff(
        plan.schedule, plan.target, strategy, grid, sweep, !config.no_rescale);

    std::ostringstream csv;
    csv << metadata_header(config, "tradeoff");
    csv << "parameter,success_probability,average_fidelity\n";
    for (const protocol::TradeoffPoint& p : curve.points) {
        csv << sci(p.parameter) << "," << sci(p.success_probability) << ","
            << sci(p.average_fidelity) << "\n";
    }
    for (double v : curve.skipped) csv << "# skipped parameter=" << sci(v) << "\n";
    emit(config, out, csv.str());

    json summary;
    summary["points"] = curve.points.size();
    summary["skipped"] = curve.skipped;
    json interp;
    for (double s : {0.1, 0.25, 0.5}) {
        const std::optional<double> f = fidelity_at_success(curve, s);
        interp[canonical(s)] = f ? json(*f) : json(nullptr);
    }
    summary["fidelity_at_success"] = interp;
    out << summary.dump(2) << "\n";
    return 0;
}

int cmd_heatmap(const RunConfig& config, std::ostream& out) {
    const Plan plan = build_plan(config, false);
    if (plan.schedule.steps.size() != 2) {
        throw error("heatmap needs a two-step schedule, target gives " +
                    std::to_string(plan.schedule.steps.size()));
    }
    const protocol::OutcomeGrid grid = make_grid(config, 2);
    const std::vector<protocol::MapRow> rows = protocol::fidelity_map(
        plan.schedule, plan.target, grid, config.feedback, !config.no_rescale);

    std::ostringstream csv;
    csv << metadata_header(config, "heatmap");
    csv << "p1,p2,density,fidelity\n";
    for (const protocol::MapRow& row : rows) {
        csv << sci(row.p1) << "," << sci(row.p2) << "," << sci(row.density) << ","
            << sci(row.fidelity) << "\n";
    }
    emit(config, out, csv.str());
    return 0;
}

int cmd_direct_map(const RunConfig& config, std::ostream& out) {
    const Plan plan = build_plan(config, true);
    std::vector<double> outcomes = config.outcomes;
    if (outcomes.empty()) outcomes.assign(1, 0.0);
    const protocol::ExecResult res = protocol::execute(plan.schedule, outcomes);
    const double fidelity =
        cvstate::fidelity_pure(finished_state(config, plan.schedule, res.state), plan.target);

    std::ostringstream report;
    report << "light amplitudes:\n";
    for (int n = 0; n < plan.light.dim(); ++n) {
        report << "  u[" << n << "] = (" << canonical(plan.light.amps[n].real()) << ","
               << canonical(plan.light.amps[n].imag()) << ")\n";
    }
    report << "rescale factor: " << canonical(plan.schedule.rescale_factor) << "\n";
    report << "density: " << sci(res.density) << "\n";
    report << "fidelity: " << canonical(fidelity) << "\n";

    if (config.emit_json) {
        json j;
        json amps = json::array();
        for (const cplx& a : plan.light.amps) amps.push_back(complex_json(a));
        j["light"] = amps;
        j["rescale_factor"] = plan.schedule.rescale_factor;
        j["density"] = res.density;
        j["fidelity"] = fidelity;
        emit(config, out, j.dump(2) + "\n");
        if (!config.out_path.empty()) out << report.str();
        return 0;
    }
    emit(config, out, report.str());
    if (!config.out_path.empty()) out << report.str();
    return 0;
}

int cmd_oracle_check(const RunConfig& config, std::ostream& out) {
    const oracle::AgreementReport report = oracle::run_agreement_grid(config.oracle_dim);
    out << "oracle agreement over " << report.cases.size() << " configurations (dim "
        << config.oracle_dim << ")\n";
    for (const oracle::AgreementCase& c : report.cases) {
        out << "  kappa=" << canonical(c.kappa) << " r=" << canonical(c.r)
            << " p_L=" << canonical(c.p_L) << " fidelity_deficit=" << sci(c.fidelity_deficit)
            << " density_rel_error=" << sci(c.density_rel_error) << "\n";
    }
    out << "max fidelity deficit: " << sci(report.max_fidelity_deficit) << "\n";
    out << "max density relative error: " << sci(report.max_density_rel_error) << "\n";
    const bool ok = report.pass();
    out << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 4;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig config;
    std::string target_text;

    CLI::App app{"Conditional preparation of collective-excitation superpositions: "
                 "planning, simulation, and verification"};
    app.require_subcommand(1);

    const auto add_common = [&](CLI::App* sub, bool needs_target) {
        CLI::Option* target = sub->add_option("--target", target_text,
                                              "target amplitudes 're[,im]' separated by ';'");
        if (needs_target) target->required();
        sub->add_option("--kappa", config.kappa, "QND coupling")->capture_default_str();
        sub->add_option("--r", config.r, "light squeezing parameter")->capture_default_str();
        sub->add_option("--phi", config.phi, "per-step quadrature angle overrides");
        sub->add_option("--epsilon", config.epsilon_override,
                        "override the derived epsilon = kappa^2 exp(-2r)");
        sub->add_flag("--presqueezed", config.presqueezed,
                      "absorb the squeezing correction into the initial state");
        sub->add_flag("--complex", config.use_complex_solver,
                      "route degree-2 targets through the complex-roots solver");
        sub->add_flag("--no-rescale", config.no_rescale,
                      "score raw outputs without the antisqueezing rescale");
        sub->add_option("--seed", config.seed, "seed recorded in output metadata")
            ->capture_default_str();
        sub->add_option("--out", config.out_path, "write the main payload to this file");
        sub->add_flag("--json", config.emit_json, "emit JSON instead of text");
    };
    const auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--grid-l", config.grid_half_width, "outcome grid half-width")
            ->capture_default_str();
        sub->add_option("--grid-h", config.grid_spacing,
                        "outcome grid spacing (default 0.02 for 1-D sweeps, 0.05 for maps)");
    };

    CLI::App* plan = app.add_subcommand("plan", "synthesize and report a schedule");
    add_common(plan, true);

    CLI::App* run = app.add_subcommand("run", "synthesize, then execute at given outcomes");
    add_common(run, true);
    run->add_option("--outcomes", config.outcomes, "homodyne outcomes, one per step");
    run->add_flag("--feedback", config.feedback, "apply the optimal feedback displacement");
    run->add_flag("--feedback-real", config.feedback_real,
                  "restrict feedback to real displacements");

    CLI::App* tradeoff = app.add_subcommand(
        "tradeoff", "success probability vs average fidelity curve");
    add_common(tradeoff, true);
    add_grid(tradeoff);
    tradeoff->add_option("--strategy", config.strategy, "basic | advanced")
        ->capture_default_str();
    tradeoff->add_flag("--feedback", config.feedback, "optimize feedback per outcome");
    tradeoff->add_flag("--feedback-real", config.feedback_real,
                       "restrict feedback to real displacements");
    tradeoff->add_option("--sweep", config.sweep,
                         "window parameters (eta or fidelity threshold)");

    CLI::App* heatmap = app.add_subcommand("heatmap", "joint density/fidelity grid (2 steps)");
    add_common(heatmap, true);
    add_grid(heatmap);
    heatmap->add_flag("--feedback,!--no-feedback", config.feedback,
                      "feedback-optimize per-outcome fidelities (default on)");

    CLI::App* direct = app.add_subcommand(
        "direct-map", "engineer the light state for a single-pass mapping and execute it");
    add_common(direct, true);
    direct->add_option("--n-max", config.n_max, "highest light component (default: degree)");
    direct->add_option("--outcomes", config.outcomes, "homodyne outcome for the single pass");

    CLI::App* oracle_check = app.add_subcommand(
        "oracle-check", "closed form vs truncated-basis simulation agreement grid");
    oracle_check->add_option("--oracle-dim", config.oracle_dim, "truncation dimension")
        ->capture_default_str();
    oracle_check->add_option("--seed", config.seed, "seed recorded in output metadata");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (!target_text.empty()) config.target = parse_complex_list(target_text);
        if (heatmap->parsed() && heatmap->count("--feedback") == 0) {
            config.feedback = true;  // heatmaps default to feedback-optimized fidelities
        }
        if (plan->parsed()) return cmd_plan(config, out);
        if (run->parsed()) return cmd_run(config, out);
        if (tradeoff->parsed()) return cmd_tradeoff(config, out);
        if (heatmap->parsed()) return cmd_heatmap(config, out);
        if (direct->parsed()) return cmd_direct_map(config, out);
        if (oracle_check->parsed()) return cmd_oracle_check(config, out);
        err << "error: no subcommand\n";
        return 2;
    } catch (const synth::complex_roots_error& e) {
        err << "synthesis error: " << e.what() << "\n";
        return 3;
    } catch (const synth::no_admissible_root_error& e) {
        err << "synthesis error: " << e.what() << "\n";
        return 3;
    } catch (const synth::presqueeze_infeasible_error& e) {
        err << "synthesis error: " << e.what() << "\n";
        return 3;
    } catch (const ops::rotated_epsilon_error& e) {
        err << "synthesis error: " << e.what() << "\n";
        return 3;
    } catch (const non_normalizable_error& e) {
        err << "synthesis error: " << e.what() << "\n";
        return 3;
    } catch (const degenerate_state_error& e) {
        err << "synthesis error: " << e.what() << "\n";
        return 3;
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace dicke::cli
