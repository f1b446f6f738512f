#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "g2flow/checkpoint.hpp"
#include "g2flow/config.hpp"
#include "g2flow/flow.hpp"
#include "g2flow/initial_data.hpp"

namespace g2flow {

inline constexpr double kBlowupFactor = 1e3;

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string csv_header() {
    return "step,t,E,Lambda_sup,sup_divT,G,inf_f_sq,norm_drift,dEdt_residual,Z,F,W";
}

inline std::string csv_row(const DiagnosticsRecord& r) {
    std::ostringstream os;
    os << r.step << ',' << detail::format_double(r.t) << ',' << detail::format_double(r.energy)
       << ',' << detail::format_double(r.lambda_sup) << ','
       << detail::format_double(r.sup_div_torsion) << ',' << detail::format_double(r.g_l1) << ','
       << detail::format_double(r.inf_f_sq) << ',' << detail::format_double(r.norm_drift) << ','
       << detail::format_double(r.dedt_residual);
    os << ',' << (r.z ? detail::format_double(*r.z) : "");
    os << ',' << (r.f_functional ? detail::format_double(*r.f_functional) : "");
    os << ',' << (r.w ? detail::format_double(*r.w) : "");
    return os.str();
}

inline BackgroundData build_background(const RunConfig& cfg) {
    switch (cfg.background.kind) {
        case BackgroundConfig::Kind::TorsionFree:
            return BackgroundData::flat(cfg.lattice);
        case BackgroundConfig::Kind::SigmaU: {
            if (!cfg.lattice.axis_active(cfg.background.axis))
                throw ConfigError("background.axis must be an active lattice axis");
            OctonionField u = winding_section(cfg.lattice, cfg.background.axis, cfg.background.twists);
            return BackgroundData::from_section(u);
        }
        case BackgroundConfig::Kind::File: {
            LoadedCheckpoint ck = load_checkpoint(cfg.background.path);
            if (ck.field.spec != cfg.lattice)
                throw ConfigError("background file lattice (axes=" +
                                  std::to_string(ck.field.spec.dim()) + "d, n=" +
                                  std::to_string(ck.field.spec.points_per_axis()) + ", L=" +
                                  detail::format_double(ck.field.spec.length()) +
                                  ") does not match config lattice (n=" +
                                  std::to_string(cfg.lattice.points_per_axis()) + ", L=" +
                                  detail::format_double(cfg.lattice.length()) + ")");
            if (max_unit_defect(ck.field) > 1e-6)
                throw ConfigError("background file does not hold a unit section");
            renormalize(ck.field);
            return BackgroundData::from_section(ck.field);
        }
    }
    throw ConfigError("unreachable background kind");
}

inline OctonionField build_initial(const RunConfig& cfg) {
    switch (cfg.init.kind) {
        case InitConfig::Kind::Constant:
            return constant_section(cfg.lattice);
        case InitConfig::Kind::Winding:
            if (!cfg.lattice.axis_active(cfg.init.axis))
                throw ConfigError("init.axis must be an active lattice axis");
            return winding_section(cfg.lattice, cfg.init.axis, cfg.init.twists);
        case InitConfig::Kind::Perturbation:
            return perturbation_section(cfg.lattice, cfg.init.amplitude, cfg.init.seed);
        case InitConfig::Kind::File: {
            LoadedCheckpoint ck = load_checkpoint(cfg.init.path);
            if (ck.field.spec != cfg.lattice)
                throw ConfigError("init file lattice (n=" +
                                  std::to_string(ck.field.spec.points_per_axis()) + ", L=" +
                                  detail::format_double(ck.field.spec.length()) +
                                  ") does not match config lattice (n=" +
                                  std::to_string(cfg.lattice.points_per_axis()) + ", L=" +
                                  detail::format_double(cfg.lattice.length()) + ")");
            if (max_unit_defect(ck.field) > 1e-6)
                throw ConfigError("init file does not hold a unit section");
            renormalize(ck.field);
            return ck.field;
        }
    }
    throw ConfigError("unreachable init kind");
}

struct RunOutcome {
    int exit_code = 0;
    std::string message;
    std::optional<BlowupReport> blowup;
    std::vector<DiagnosticsRecord> records;
};

/// Execute the flow described by the config: step to t_end or blow-up,
/// emitting one CSV row per diagnostics stride and checkpoints on their own
/// stride. Blow-up (lambda exceeding 1000x its initial value, or a
/// non-finite state) fits the hyperbolic signature and reports exit code 3.
inline RunOutcome run_flow(const RunConfig& cfg, std::ostream* log = nullptr) {
    RunOutcome outcome;

    BackgroundData bg = build_background(cfg);
    OctonionField init = build_initial(cfg);
    FlowState state = make_state(std::move(init), std::move(bg));

    StepSettings settings;
    settings.integrator = cfg.flow.integrator;
    settings.cfl_factor = cfg.flow.cfl_factor;
    settings.renormalize_stride = cfg.flow.renormalize_stride;

    const double dt = cfg.resolved_dt();
    const long n_steps = static_cast<long>(std::ceil(cfg.flow.t_end / dt - 1e-9));

    std::ofstream csv;
    if (!cfg.output.csv.empty()) {
        csv.open(cfg.output.csv, std::ios::trunc);
        if (!csv) throw ConfigError("cannot open CSV output: " + cfg.output.csv);
        csv << csv_header() << '\n';
    }

    std::optional<MonotonicityProbe> probe;
    if (cfg.diagnostics.monotonicity.enabled)
        probe = MonotonicityProbe{
            KernelSpec{cfg.diagnostics.monotonicity.x0, cfg.diagnostics.monotonicity.t0, 1e-12}};

    std::vector<std::pair<double, double>> lambda_trace;
    double lambda0 = -1.0;
    std::optional<DiagnosticsRecord> prev;
    bool blew_up = false;
    double t_detect = 0.0;

    auto emit = [&](const FlowState& st, const double* pre_step_energy) {
        DiagnosticsRecord rec = compute_diagnostics(st, prev ? &*prev : nullptr,
                                                    probe ? &*probe : nullptr, pre_step_energy, dt);
        if (csv.is_open()) csv << csv_row(rec) << '\n';
        outcome.records.push_back(rec);
        if (std::isfinite(rec.lambda_sup)) lambda_trace.emplace_back(rec.t, rec.lambda_sup);
        if (lambda0 < 0.0) lambda0 = rec.lambda_sup;
        prev = rec;
        if (!std::isfinite(rec.lambda_sup) ||
            (lambda0 > 0.0 && rec.lambda_sup > kBlowupFactor * lambda0)) {
            blew_up = true;
            t_detect = st.time;
        }
    };

    emit(state, nullptr);

    for (long k = 1; k <= n_steps && !blew_up; ++k) {
        bool record_step = (k % cfg.diagnostics.stride == 0) || k == n_steps;
        double pre_energy = 0.0;
        if (record_step) pre_energy = energy(state.section, *state.background);
        try {
            state = step(state, dt, settings);
        } catch (const NanError& e) {
            blew_up = true;
            t_detect = e.time;
            break;
        }
        if (record_step) emit(state, &pre_energy);
        if (!blew_up && cfg.output.checkpoint_stride > 0 && !cfg.output.checkpoint.empty() &&
            state.step_index % cfg.output.checkpoint_stride == 0)
            save_checkpoint(cfg.output.checkpoint, state.section, state.time, state.step_index);
    }

    if (blew_up) {
        BlowupReport rep = fit_blowup(lambda_trace, t_detect);
        outcome.blowup = rep;
        outcome.exit_code = 3;
        std::ostringstream os;
        os << "blow-up detected at t = " << detail::format_double(t_detect)
           << "; fitted Lambda(t) ~ C/(t_max - t) with C = " << detail::format_double(rep.constant)
           << ", t_max = " << detail::format_double(rep.t_max_fit)
           << ", R^2 = " << detail::format_double(rep.r_squared) << " over " << rep.samples_used
           << " samples";
        outcome.message = os.str();
        if (log) *log << outcome.message << '\n';
        return outcome;
    }

    if (!cfg.output.checkpoint.empty())
        save_checkpoint(cfg.output.checkpoint, state.section, state.time, state.step_index);

    outcome.message = "completed " + std::to_string(state.step_index) + " steps to t = " +
                      detail::format_double(state.time);
    if (log) *log << outcome.message << '\n';
    return outcome;
}

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    std::string note;
};

/// The identity and invariant suite behind `verify`: algebra laws, orbit
/// laws, decomposition round-trip, discrete summation-by-parts, convergence
/// ratios, checkpoint round-trip. `inject_phi_fault` corrupts a copy of the
/// structure tensors to prove the contraction check can fail.
inline std::vector<CheckResult> verify_suite(const LatticeSpec& spec, bool inject_phi_fault = false,
                                             std::string scratch_dir = "") {
    if (scratch_dir.empty()) scratch_dir = std::filesystem::temp_directory_path().string();
    std::vector<CheckResult> results;
    SplitMix64 rng(0x5eedULL);
    auto rand_oct = [&rng]() {
        Octonion o;
        o.re = rng.uniform();
        for (auto& x : o.im) x = rng.uniform();
        return o;
    };
    auto rand_unit = [&]() {
        Octonion o = rand_oct();
        return o * (1.0 / norm(o));
    };

    {
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            Octonion a = rand_oct(), b = rand_oct();
            double lhs = norm_sq(a * b), rhs = norm_sq(a) * norm_sq(b);
            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        }
        results.push_back({"octonion_norm_multiplicativity", worst <= 1e-12, worst, "rel"});
    }
    {
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            Octonion a = rand_oct(), b = rand_oct(), c = rand_oct();
            double scale = norm(a) * norm(b) * norm(c);
            worst = std::max(worst, norm(associator(a, a, b)) / scale);
            worst = std::max(worst, norm(associator(Octonion::real(1.0), b, c)) / scale);
            Octonion asc = associator(a, b, c);
            worst = std::max(worst, std::abs(asc.re) / scale);
            worst = std::max(worst, norm(asc + associator(b, a, c)) / scale);
        }
        results.push_back({"associator_alternating_imaginary", worst <= 1e-12, worst, "rel"});
    }
    {
        const auto& st = StructureTensors::standard();
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            Octonion a = rand_oct(), b = rand_oct(), c = rand_oct();
            Octonion asc = associator(a, b, c);
            Octonion expect;
            for (int d = 0; d < 7; ++d) {
                double s = 0.0;
                for (int i = 0; i < 7; ++i)
                    for (int jj = 0; jj < 7; ++jj)
                        for (int kk = 0; kk < 7; ++kk)
                            s += st.psi(d, i, jj, kk) * a.im[static_cast<std::size_t>(i)] *
                                 b.im[static_cast<std::size_t>(jj)] * c.im[static_cast<std::size_t>(kk)];
                expect.im[static_cast<std::size_t>(d)] = 2.0 * s;
            }
            worst = std::max(worst, norm(asc - expect) / (norm(a) * norm(b) * norm(c)));
        }
        results.push_back({"associator_psi_identity", worst <= 1e-12, worst, "rel"});
    }
    {
        double residual;
        if (inject_phi_fault) {
            ThreeForm corrupted = StructureTensors::standard_form();
            corrupted.set(0, 1, 2, 0.5);  // deliberate fault
            residual = StructureTensors(corrupted).contraction_identity_residual();
        } else {
            residual = StructureTensors::standard().contraction_identity_residual();
        }
        results.push_back({"phi_contraction_identity", residual <= 1e-12, residual,
                           inject_phi_fault ? "fault injected" : "abs"});
    }
    {
        double worst_comp = 0.0, worst_metric = 0.0;
        for (int k = 0; k < 100; ++k) {
            Octonion v = rand_unit(), u = rand_unit();
            ThreeForm sv = sigma_transform(v);
            ThreeForm lhs = sigma_transform(u, sv, hodge_dual(sv));
            ThreeForm rhs = sigma_transform(u * v);
            for (std::size_t i = 0; i < 35; ++i)
                worst_comp = std::max(worst_comp, std::abs(lhs.canonical[i] - rhs.canonical[i]));
            MetricResult m = metric_from_phi(sv);
            for (int r = 0; r < 7; ++r)
                for (int c = 0; c < 7; ++c)
                    worst_metric =
                        std::max(worst_metric, std::abs(m.metric(r, c) - (r == c ? 1.0 : 0.0)));
        }
        results.push_back({"sigma_composition", worst_comp <= 1e-12, worst_comp, "abs"});
        results.push_back({"sigma_metric_invariance", worst_metric <= 1e-12, worst_metric, "abs"});
    }
    {
        double worst = 0.0, worst_proj = 0.0;
        for (int k = 0; k < 1000; ++k) {
            Mat7 T;
            for (auto& x : T.a) x = rng.uniform();
            Mat7 back = torsion_reconstruct(torsion_decompose(T));
            worst = std::max(worst, max_abs(back - T) / std::max(1.0, max_abs(T)));
            if (k < 50) {
                Mat7 beta;
                for (int i = 0; i < 7; ++i)
                    for (int j = i + 1; j < 7; ++j) {
                        double v = rng.uniform();
                        beta(i, j) = v;
                        beta(j, i) = -v;
                    }
                auto split = lambda2_project(beta);
                auto again7 = lambda2_project(split.part7);
                auto again14 = lambda2_project(split.part14);
                worst_proj = std::max(worst_proj, max_abs(again7.part7 - split.part7));
                worst_proj = std::max(worst_proj, max_abs(again7.part14));
                worst_proj = std::max(worst_proj, max_abs(again14.part14 - split.part14));
                worst_proj = std::max(worst_proj, max_abs(again14.part7));
                worst_proj = std::max(worst_proj, max_abs(split.part7 + split.part14 - beta));
            }
        }
        results.push_back({"torsion_decomposition_roundtrip", worst <= 1e-12, worst, "rel"});
        results.push_back({"lambda2_projector_idempotence", worst_proj <= 1e-12, worst_proj, "abs"});
    }
    {
        // Discrete summation by parts: sum <Delta F, F> h^d + sum |forward diff F|^2 h^d = 0.
        OctonionField f = random_smooth_field(spec, 0xabcdULL, /*imaginary_only=*/false);
        BackgroundData flat = BackgroundData::flat(spec);
        OctonionField lap = covariant_laplacian(f, flat);
        double pair_sum =
            lattice_integral(spec, [&](std::size_t p) { return inner(lap.values[p], f.values[p]); });
        const double invh = 1.0 / spec.spacing();
        double forward_sum = lattice_integral(spec, [&](std::size_t p) {
            double s = 0.0;
            for (int k = 0; k < spec.dim(); ++k) {
                std::size_t fp = spec.shifted(p, k, +1);
                s += norm_sq((f.values[fp] - f.values[p]) * invh);
            }
            return s;
        });
        double residual = std::abs(pair_sum + forward_sum) / std::max(1.0, forward_sum);
        results.push_back({"summation_by_parts_exactness", residual <= 1e-10, residual, "rel"});
    }
    {
        int n = spec.points_per_axis();
        LatticeSpec coarse({spec.active_axes().front()}, n, spec.length());
        LatticeSpec fine({spec.active_axes().front()}, 2 * n, spec.length());
        auto resid = [&](const LatticeSpec& s) {
            OctonionField u = winding_section(s, s.active_axes().front(), 1);
            OctonionField a = random_smooth_field(s, 0x77ULL, /*imaginary_only=*/false);
            return covariance_residual(a, u);
        };
        double ratio = resid(coarse) / resid(fine);
        results.push_back(
            {"covariance_convergence_ratio", ratio >= 3.5 && ratio <= 4.5, ratio, "expect ~4"});
    }
    {
        OctonionField f = random_smooth_field(spec, 0x99ULL, /*imaginary_only=*/false);
        std::string path = scratch_dir + "/g2flow_verify_ck.bin";
        save_checkpoint(path, f, 0.5, 42);
        LoadedCheckpoint back = load_checkpoint(path);
        bool same = back.field.spec == f.spec && back.time == 0.5 && back.step == 42;
        double worst = 0.0;
        if (same)
            for (std::size_t p = 0; p < f.spec.point_count(); ++p)
                worst = std::max(worst, norm(back.field.values[p] - f.values[p]));
        results.push_back({"checkpoint_roundtrip", same && worst == 0.0, worst, "bitwise"});
        std::remove(path.c_str());
    }
    return results;
}

inline std::string inspect_checkpoint(const std::string& path) {
    LoadedCheckpoint ck = load_checkpoint(path);
    std::ostringstream os;
    os << "checkpoint: " << path << '\n';
    os << "  active_axes:";
    for (int a : ck.field.spec.active_axes()) os << ' ' << a;
    os << '\n';
    os << "  n: " << ck.field.spec.points_per_axis() << '\n';
    os << "  L: " << detail::format_double(ck.field.spec.length()) << '\n';
    os << "  points: " << ck.field.spec.point_count() << '\n';
    os << "  time: " << detail::format_double(ck.time) << '\n';
    os << "  step: " << ck.step << '\n';
    os << "  max |norm^2 - 1|: " << detail::format_double(max_unit_defect(ck.field)) << '\n';
    return os.str();
}

}  // namespace g2flow
