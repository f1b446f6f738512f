#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "g2flow/field_ops.hpp"
#include "g2flow/g2_forms.hpp"
#include "g2flow/lattice.hpp"
#include "g2flow/monotonicity.hpp"

namespace g2flow {

struct CflError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NanError : std::runtime_error {
    long step;
    double time;
    NanError(long s, double t)
        : std::runtime_error("non-finite value detected at step " + std::to_string(s)),
          step(s),
          time(t) {}
};

enum class Integrator { Euler, Rk4 };

struct StepSettings {
    Integrator integrator = Integrator::Rk4;
    double cfl_factor = 0.25;
    int renormalize_stride = 1;
};

/// Evolving unit section plus clock. Background data is shared, never
/// mutated by the flow.
struct FlowState {
    OctonionField section;
    double time = 0.0;
    long step_index = 0;
    double last_norm_drift = 0.0;
    std::shared_ptr<const BackgroundData> background;
};

inline FlowState make_state(OctonionField initial, BackgroundData bg) {
    FlowState st;
    st.section = std::move(initial);
    st.background = std::make_shared<const BackgroundData>(std::move(bg));
    return st;
}

/// Tangent-projected right-hand side Delta_D V - <Delta_D V, V> V. Coincides
/// with Delta_D V + |DV|^2 V in the continuum and is pointwise orthogonal to
/// V by construction, which keeps the discrete flow on the unit sphere
/// bundle up to integrator drift.
inline OctonionField flow_rhs(const OctonionField& V, const BackgroundData& bg) {
    OctonionField lap = covariant_laplacian(V, bg);
    OctonionField out(V.spec);
    for (std::size_t p = 0; p < V.spec.point_count(); ++p) {
        double proj = inner(lap.values[p], V.values[p]);
        out.values[p] = lap.values[p] - proj * V.values[p];
    }
    return out;
}

inline OctonionField flow_rhs(const FlowState& state) {
    return flow_rhs(state.section, *state.background);
}

inline double cfl_limit(const LatticeSpec& spec, double cfl_factor) {
    double h = spec.spacing();
    return cfl_factor * h * h / (2.0 * spec.dim());
}

/// One explicit step (Euler or classical RK4) followed by renormalization on
/// the configured stride. Records the pre-renormalization unit-norm drift.
/// Refuses steps beyond the CFL bound and aborts on non-finite values.
inline FlowState step(const FlowState& state, double dt, const StepSettings& settings) {
    const LatticeSpec& spec = state.section.spec;
    double limit = cfl_limit(spec, settings.cfl_factor);
    if (dt > limit * (1.0 + 1e-12))
        throw CflError("step: dt = " + std::to_string(dt) + " exceeds CFL bound " +
                       std::to_string(limit) + " (cfl_factor " + std::to_string(settings.cfl_factor) +
                       ", h " + std::to_string(spec.spacing()) + ")");

    const BackgroundData& bg = *state.background;
    FlowState next = state;
    OctonionField& V = next.section;

    if (settings.integrator == Integrator::Euler) {
        OctonionField k1 = flow_rhs(state.section, bg);
        for (std::size_t p = 0; p < spec.point_count(); ++p) V.values[p] += dt * k1.values[p];
    } else {
        OctonionField k1 = flow_rhs(state.section, bg);
        OctonionField stage(spec);
        for (std::size_t p = 0; p < spec.point_count(); ++p)
            stage.values[p] = state.section.values[p] + (0.5 * dt) * k1.values[p];
        OctonionField k2 = flow_rhs(stage, bg);
        for (std::size_t p = 0; p < spec.point_count(); ++p)
            stage.values[p] = state.section.values[p] + (0.5 * dt) * k2.values[p];
        OctonionField k3 = flow_rhs(stage, bg);
        for (std::size_t p = 0; p < spec.point_count(); ++p)
            stage.values[p] = state.section.values[p] + dt * k3.values[p];
        OctonionField k4 = flow_rhs(stage, bg);
        for (std::size_t p = 0; p < spec.point_count(); ++p)
            V.values[p] = state.section.values[p] +
                          (dt / 6.0) * (k1.values[p] + 2.0 * k2.values[p] + 2.0 * k3.values[p] +
                                        k4.values[p]);
    }

    next.time = state.time + dt;
    next.step_index = state.step_index + 1;

    for (const Octonion& o : V.values)
        if (!is_finite(o)) throw NanError(next.step_index, next.time);

    next.last_norm_drift = max_unit_defect(V);
    if (settings.renormalize_stride > 0 && next.step_index % settings.renormalize_stride == 0)
        renormalize(V);
    return next;
}

/// Torsion energy through the forward-difference pairing, h^d sum |D+ V|^2.
/// The forward/backward pair makes the discrete energy identity with the
/// stencil Laplacian exact on periodic lattices.
inline double energy(const OctonionField& V, const BackgroundData& bg) {
    const LatticeSpec& spec = V.spec;
    const double invh = 1.0 / spec.spacing();
    return lattice_integral(spec, [&](std::size_t p) {
        double s = 0.0;
        std::array<Octonion, 7> dplus{};
        for (int k = 0; k < spec.dim(); ++k) {
            std::size_t fp = spec.shifted(p, k, +1);
            dplus[static_cast<std::size_t>(spec.axis(k) - 1)] = (V.values[fp] - V.values[p]) * invh;
        }
        if (!bg.torsion_free)
            for (std::size_t a = 0; a < 7; ++a)
                dplus[a] -= multiply(V.values[p], bg.torsion.values[p][a]);
        for (const auto& o : dplus) s += norm_sq(o);
        return s;
    });
}

struct LambdaDiagnostics {
    ScalarField field;
    double sup = 0.0;
};

/// Pointwise energy density |DV|^2 (centered) and its maximum.
inline LambdaDiagnostics lambda_diagnostics(const OctonionField& V, const BackgroundData& bg) {
    LambdaDiagnostics out{energy_density(V, bg), 0.0};
    for (double v : out.field.values) out.sup = std::max(out.sup, v);
    return out;
}

/// Flat-background sup bound Lambda0 / (1 - 2 Lambda0 t), the solution of
/// du/dt = 2u^2. Empty once the bound has expired (t >= 1/(2 Lambda0)).
inline std::optional<double> lambda_upper_bound(double t, double lambda0) {
    if (lambda0 < 0.0) throw std::domain_error("lambda_upper_bound: negative initial density");
    if (lambda0 == 0.0) return 0.0;
    double denom = 1.0 - 2.0 * lambda0 * t;
    if (denom <= 0.0) return std::nullopt;
    return lambda0 / denom;
}

struct DiagnosticsRecord {
    long step = 0;
    double t = 0.0;
    double energy = 0.0;
    double lambda_sup = 0.0;
    double sup_div_torsion = 0.0;
    double g_l1 = 0.0;
    double inf_f_sq = 0.0;
    double norm_drift = 0.0;
    double dedt_residual = 0.0;
    std::optional<double> z;
    std::optional<double> f_functional;
    std::optional<double> w;
};

struct MonotonicityProbe {
    KernelSpec kernel;
};

/// Per-sample scalar diagnostics. The energy-dissipation residual compares
/// an energy difference quotient against the matched discrete dissipation
/// rate 2 h^d sum |rhs|^2, which equals 2 integral |div T|^2 in the
/// continuum; it behaves as O(dt) on resolved runs. When the energy just
/// before the last step is supplied the quotient spans exactly one step;
/// otherwise it falls back to the gap since the previous record.
inline DiagnosticsRecord compute_diagnostics(const FlowState& state,
                                             const DiagnosticsRecord* prev = nullptr,
                                             const MonotonicityProbe* probe = nullptr,
                                             const double* pre_step_energy = nullptr,
                                             double step_dt = 0.0) {
    const BackgroundData& bg = *state.background;
    const OctonionField& V = state.section;
    DiagnosticsRecord rec;
    rec.step = state.step_index;
    rec.t = state.time;
    rec.energy = energy(V, bg);

    LambdaDiagnostics lam = lambda_diagnostics(V, bg);
    rec.lambda_sup = lam.sup;

    // Ungated form of the divergence so records stay available on runs that
    // deliberately let the unit norm drift (renormalization disabled).
    OctonionField divT = detail::torsion_divergence_impl(V, bg);
    rec.sup_div_torsion = sup_norm(divT);

    rec.g_l1 = lattice_integral(V.spec, [&](std::size_t p) { return std::abs(V.values[p].re); });
    rec.inf_f_sq = 1.0;
    for (const auto& o : V.values) rec.inf_f_sq = std::min(rec.inf_f_sq, o.re * o.re);
    rec.norm_drift = state.last_norm_drift;

    if ((pre_step_energy != nullptr && step_dt > 0.0) ||
        (prev != nullptr && state.time > prev->t)) {
        OctonionField rhs = flow_rhs(state);
        double dissipation =
            lattice_integral(V.spec, [&](std::size_t p) { return norm_sq(rhs.values[p]); });
        double rate = (pre_step_energy != nullptr && step_dt > 0.0)
                          ? (rec.energy - *pre_step_energy) / step_dt
                          : (rec.energy - prev->energy) / (state.time - prev->t);
        rec.dedt_residual = rate + 2.0 * dissipation;
    }

    if (probe != nullptr && state.time < probe->kernel.t0) {
        rec.z = z_functional(V, bg, probe->kernel, state.time);
        rec.f_functional = f_functional(V, bg, probe->kernel.center, probe->kernel.t0, state.time);
        rec.w = w_term(V, bg, probe->kernel, state.time);
    }
    return rec;
}

/// Higher-derivative monitor sup |D^m V|^2 for m = 2, built by applying the
/// covariant derivative to each slot of DV with repeated centered
/// differencing. Exposed as data; no bound is asserted on it.
inline double lambda_second_derivative_sup(const OctonionField& V, const BackgroundData& bg) {
    OneFormField dv = covariant_derivative(V, bg);
    std::array<OctonionField, 7> slots;
    for (std::size_t a = 0; a < 7; ++a) {
        slots[a] = OctonionField(V.spec);
        for (std::size_t p = 0; p < V.spec.point_count(); ++p)
            slots[a].values[p] = dv.values[p][a];
    }
    double sup = 0.0;
    std::vector<double> point_sum(V.spec.point_count(), 0.0);
    for (std::size_t a = 0; a < 7; ++a) {
        OneFormField dda = covariant_derivative(slots[a], bg);
        for (std::size_t p = 0; p < V.spec.point_count(); ++p)
            for (std::size_t b = 0; b < 7; ++b) point_sum[p] += norm_sq(dda.values[p][b]);
    }
    for (double s : point_sum) sup = std::max(sup, s);
    return sup;
}

/// Residual of the real-part evolution law with background torsion,
///   df/dt = Delta f + f |grad V|^2 + <v, div T> + 2 <grad_a V, (1 - f V) T^a>,
/// sampled between two consecutive states. An optional consistency
/// diagnostic; expected O(dt + h^2) on resolved runs.
inline double f_evolution_residual(const FlowState& before, const FlowState& after) {
    const BackgroundData& bg = *before.background;
    const LatticeSpec& spec = before.section.spec;
    double dt = after.time - before.time;
    if (!(dt > 0.0)) throw std::invalid_argument("f_evolution_residual: states must be ordered in time");

    const OctonionField& V = before.section;
    OneFormField grad = gradient(V);
    const double invh2 = 1.0 / (spec.spacing() * spec.spacing());

    double worst = 0.0;
    for (std::size_t p = 0; p < spec.point_count(); ++p) {
        double f = V.values[p].re;
        double lap_f = 0.0;
        double grad_sq = 0.0;
        for (int s = 0; s < spec.dim(); ++s) {
            std::size_t fp = spec.shifted(p, s, +1);
            std::size_t bp = spec.shifted(p, s, -1);
            lap_f += (V.values[fp].re - 2.0 * f + V.values[bp].re) * invh2;
        }
        for (const auto& g : grad.values[p]) grad_sq += norm_sq(g);

        double expect = lap_f + f * grad_sq;
        if (!bg.torsion_free) {
            const Octonion& div = bg.torsion_divergence.values[p];
            for (std::size_t i = 0; i < 7; ++i) expect += V.values[p].im[i] * div.im[i];
            Octonion one_minus_fv = Octonion::real(1.0) - f * V.values[p];
            for (std::size_t a = 0; a < 7; ++a)
                expect += 2.0 * inner(grad.values[p][a],
                                      multiply(one_minus_fv, bg.torsion.values[p][a]));
        }
        double rate = (after.section.values[p].re - f) / dt;
        worst = std::max(worst, std::abs(rate - expect));
    }
    return worst;
}

struct HessianResult {
    double value = 0.0;
    bool critical_warning = false;
};

/// Second variation 2 h^d sum (<DW1, DW2> - |DV|^2 <W1, W2>) at a critical
/// point. Sets a warning flag when V is not critical to the given tolerance
/// on sup |div T|.
inline HessianResult hessian_form(const OctonionField& V, const OctonionField& W1,
                                  const OctonionField& W2, const BackgroundData& bg,
                                  double criticality_tol = 0.1) {
    require_unit_field(V, "hessian_form");
    for (std::size_t p = 0; p < V.spec.point_count(); ++p) {
        if (std::abs(inner(W1.values[p], V.values[p])) > 1e-8 ||
            std::abs(inner(W2.values[p], V.values[p])) > 1e-8)
            throw std::domain_error("hessian_form: variation fields must be tangent to V");
    }
    HessianResult out;
    out.critical_warning = sup_norm(torsion_divergence(V, bg)) > criticality_tol;

    OneFormField d1 = covariant_derivative(W1, bg);
    OneFormField d2 = covariant_derivative(W2, bg);
    ScalarField lam = energy_density(V, bg);
    out.value = 2.0 * lattice_integral(V.spec, [&](std::size_t p) {
        double s = 0.0;
        for (std::size_t a = 0; a < 7; ++a) s += inner(d1.values[p][a], d2.values[p][a]);
        s -= lam.values[p] * inner(W1.values[p], W2.values[p]);
        return s;
    });
    return out;
}

/// Consistency residual of the 3-form evolution law
/// d(sigma_W phi)/dt = 2 (div T) . psi between two consecutive states,
/// where W = V U composes the section with the background generator so the
/// evolving 3-form is expressed over constant base tables. div T enters as
/// -(dW/dt) W^{-1} with dW/dt transported from the flow's own right-hand
/// side; that is the discretization the flow actually follows, so the
/// residual is governed by the time step alone.
inline double phi_evolution_residual(const FlowState& before, const FlowState& after) {
    const BackgroundData& bg = *before.background;
    const LatticeSpec& spec = before.section.spec;
    double dt = after.time - before.time;
    if (!(dt > 0.0)) throw std::invalid_argument("phi_evolution_residual: states must be ordered in time");

    OctonionField rhs = flow_rhs(before.section, bg);
    double worst = 0.0;
    for (std::size_t p = 0; p < spec.point_count(); ++p) {
        Octonion w_before = before.section.values[p];
        Octonion w_after = after.section.values[p];
        Octonion w_rate = rhs.values[p];
        if (bg.generator) {
            const Octonion& u = bg.generator->values[p];
            w_before = multiply(w_before, u);
            w_after = multiply(w_after, u);
            w_rate = multiply(w_rate, u);
        }
        ThreeForm phi_before = sigma_transform(w_before);
        ThreeForm phi_after = sigma_transform(w_after);
        FourForm psi_before = hodge_dual(phi_before);

        Vec7 q = multiply(-1.0 * w_rate, inverse(w_before)).im;
        ThreeForm rate = (phi_after - phi_before) * (1.0 / dt);
        for (int a = 0; a < 7; ++a)
            for (int b = a + 1; b < 7; ++b)
                for (int c = b + 1; c < 7; ++c) {
                    double hook = 0.0;
                    for (int d = 0; d < 7; ++d)
                        hook += q[static_cast<std::size_t>(d)] * psi_before(d, a, b, c);
                    double r = rate(a, b, c) - 2.0 * hook;
                    worst = std::max(worst, std::abs(r));
                }
    }
    return worst;
}

struct BlowupReport {
    double constant = 0.0;   // fitted C in Lambda(t) ~ C / (t_max - t)
    double t_max_fit = 0.0;  // blow-up time from the linearized fit
    double t_detected = 0.0;
    double r_squared = 0.0;
    int samples_used = 0;
};

/// Fit the blow-up signature over the last sampled decade before detection:
/// 1/Lambda is linearized in t (slope -1/C), then R^2 is evaluated on
/// Lambda against C / (t_max - t). Trailing samples from the unresolved
/// final surge (growth beyond 10x per sample) are discarded before the
/// window is taken; they sit past the point the integrator can follow.
inline BlowupReport fit_blowup(std::vector<std::pair<double, double>> samples, double t_detected) {
    BlowupReport rep;
    rep.t_detected = t_detected;

    while (samples.size() >= 2 &&
           (!(samples.back().second > 0.0) ||
            samples.back().second > 10.0 * samples[samples.size() - 2].second))
        samples.pop_back();
    if (samples.size() < 3) return rep;

    double d_min = t_detected - samples.back().first;
    if (!(d_min > 0.0)) d_min = 0.0;
    std::vector<std::pair<double, double>> window;
    for (const auto& s : samples) {
        if (s.second > 0.0 && t_detected - s.first <= 10.0 * d_min + 1e-300) window.push_back(s);
    }
    if (window.size() < 5) {
        std::size_t keep = std::min<std::size_t>(samples.size(), 12);
        window.assign(samples.end() - static_cast<std::ptrdiff_t>(keep), samples.end());
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [t, lam] : window) {
        double y = 1.0 / lam;
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    double m = static_cast<double>(window.size());
    double denom = m * sxx - sx * sx;
    if (denom == 0.0) return rep;
    double slope = (m * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / m;
    if (slope >= 0.0) return rep;

    rep.constant = -1.0 / slope;
    rep.t_max_fit = -intercept / slope;
    rep.samples_used = static_cast<int>(window.size());

    double mean = 0.0;
    for (const auto& s : window) mean += s.second;
    mean /= m;
    double ss_tot = 0.0, ss_res = 0.0;
    for (const auto& [t, lam] : window) {
        double model = rep.constant / (rep.t_max_fit - t);
        ss_tot += (lam - mean) * (lam - mean);
        ss_res += (lam - model) * (lam - model);
    }
    rep.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 0.0;
    return rep;
}

}  // namespace g2flow
