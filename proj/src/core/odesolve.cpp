#include "core/odesolve.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace opinn {

SolverMethod solver_method_from_name(const std::string& name) {
    if (name == "euler") return SolverMethod::euler;
    if (name == "rk4") return SolverMethod::rk4;
    if (name == "dopri5") return SolverMethod::dopri5;
    throw InvalidParameterError("unknown solver method '" + name + "'");
}

std::string solver_method_name(SolverMethod m) {
    switch (m) {
        case SolverMethod::euler: return "euler";
        case SolverMethod::rk4: return "rk4";
        case SolverMethod::dopri5: return "dopri5";
    }
    throw InvalidParameterError("unknown solver enum");
}

namespace {

Tensor axpy(const Tensor& z, double a, const Tensor& k) {
    Tensor out = z;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += a * k.data[i];
    return out;
}

bool all_finite(const Tensor& t) {
    for (double v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

Tensor euler_step(const Field& f, const Tensor& z, double h) {
    return axpy(z, h, f(z));
}

Tensor rk4_step(const Field& f, const Tensor& z, double h) {
    Tensor k1 = f(z);
    Tensor k2 = f(axpy(z, h / 2.0, k1));
    Tensor k3 = f(axpy(z, h / 2.0, k2));
    Tensor k4 = f(axpy(z, h, k3));
    Tensor out = z;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] += h / 6.0 * (k1.data[i] + 2.0 * k2.data[i] + 2.0 * k3.data[i] +
                                  k4.data[i]);
    return out;
}

Dopri5Result dopri5_substep(const Field& f, const Tensor& z, double h, double rtol,
                            double atol) {
    // Dormand-Prince 5(4) coefficients.
    static const double a21 = 1.0 / 5.0;
    static const double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static const double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static const double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static const double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                        a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
    static const double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                        b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static const double e1 = 5179.0 / 57600.0, e3 = 7571.0 / 16695.0,
                        e4 = 393.0 / 640.0, e5 = -92097.0 / 339200.0,
                        e6 = 187.0 / 2100.0, e7 = 1.0 / 40.0;

    Tensor k1 = f(z);
    Tensor k2 = f(axpy(z, h * a21, k1));

    auto combine = [&](std::initializer_list<std::pair<double, const Tensor*>> terms) {
        Tensor out = z;
        for (auto [c, k] : terms)
            for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += h * c * k->data[i];
        return out;
    };

    Tensor k3 = f(combine({{a31, &k1}, {a32, &k2}}));
    Tensor k4 = f(combine({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    Tensor k5 = f(combine({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    Tensor k6 = f(combine({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));

    Tensor z5 = combine({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    Tensor k7 = f(z5);

    double err = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double z4 = z.data[i] + h * (e1 * k1.data[i] + e3 * k3.data[i] + e4 * k4.data[i] +
                                     e5 * k5.data[i] + e6 * k6.data[i] + e7 * k7.data[i]);
        double scale = atol + rtol * std::max(std::abs(z.data[i]), std::abs(z5.data[i]));
        err = std::max(err, std::abs(z5.data[i] - z4) / scale);
    }
    return {std::move(z5), err};
}

namespace {

Tensor integrate_unit_dopri5(const Field& f, const Tensor& z0, const SolverConfig& cfg,
                             std::size_t& substeps_used) {
    Tensor z = z0;
    double t = 0.0;
    double h = 0.1;
    while (t < 1.0 - 1e-14) {
        if (substeps_used >= cfg.max_substeps)
            throw NumericError("dopri5: exceeded max substeps (" +
                               std::to_string(cfg.max_substeps) + ")");
        h = std::min(h, 1.0 - t);
        auto [z_next, err] = dopri5_substep(f, z, h, cfg.rtol, cfg.atol);
        ++substeps_used;
        if (!all_finite(z_next)) throw NumericError("dopri5: non-finite state");
        if (err <= 1.0) {
            z = std::move(z_next);
            t += h;
        }
        double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
    }
    return z;
}

}  // namespace

std::vector<Tensor> integrate(const Field& f, const Tensor& z0, std::size_t n_system_steps,
                              const SolverConfig& cfg) {
    if (n_system_steps < 1)
        throw InvalidParameterError("integrate: n_system_steps must be >= 1");
    if (cfg.step_size <= 0.0) throw InvalidParameterError("integrate: step_size must be > 0");
    if (cfg.rtol <= 0.0 || cfg.atol <= 0.0)
        throw InvalidParameterError("integrate: tolerances must be > 0");

    std::vector<Tensor> states;
    states.reserve(n_system_steps);
    Tensor z = z0;
    std::size_t substeps_used = 0;
    for (std::size_t step = 0; step < n_system_steps; ++step) {
        if (cfg.method == SolverMethod::dopri5) {
            z = integrate_unit_dopri5(f, z, cfg, substeps_used);
        } else {
            auto n_sub = static_cast<std::size_t>(std::ceil(1.0 / cfg.step_size - 1e-12));
            n_sub = std::max<std::size_t>(n_sub, 1);
            double h = 1.0 / static_cast<double>(n_sub);
            for (std::size_t s = 0; s < n_sub; ++s)
                z = cfg.method == SolverMethod::euler ? euler_step(f, z, h)
                                                      : rk4_step(f, z, h);
        }
        if (!all_finite(z)) throw NumericError("integrate: non-finite state");
        states.push_back(z);
    }
    return states;
}

NodeId euler_step_tape(Tape& tape, const TapeField& f, NodeId z, double h) {
    return tape.add(z, tape.scale(f(tape, z), h));
}

NodeId rk4_step_tape(Tape& tape, const TapeField& f, NodeId z, double h) {
    NodeId k1 = f(tape, z);
    NodeId k2 = f(tape, tape.add(z, tape.scale(k1, h / 2.0)));
    NodeId k3 = f(tape, tape.add(z, tape.scale(k2, h / 2.0)));
    NodeId k4 = f(tape, tape.add(z, tape.scale(k3, h)));
    NodeId sum = tape.add(tape.add(k1, tape.scale(k2, 2.0)),
                          tape.add(tape.scale(k3, 2.0), k4));
    return tape.add(z, tape.scale(sum, h / 6.0));
}

}  // namespace opinn
